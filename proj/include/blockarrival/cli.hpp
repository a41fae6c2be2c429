#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "blockarrival/chain_data.hpp"
#include "blockarrival/simulator.hpp"

namespace blockarrival::cli {

/// Environment variable naming the default data directory; `reproduce`
/// looks for lr.csv there when --data is not given.
inline constexpr const char* kDataDirEnv = "BLOCKARRIVAL_DATA_DIR";

/// Fitted exponential hash-rate parameters for one historical interval.
struct ReferenceInterval {
  int index;
  double start;  // Unix seconds
  double end;
  double a;  // per second
  double b;
};

/// The six reference intervals, 2009-01-03 to 2017-11-24.
const std::vector<ReferenceInterval>& reference_intervals();

/// Simulation of one reference interval: its exponential hash rate from the
/// interval start at steady-state difficulty, random difficulty, no delay,
/// covering the interval (at least 40,000 blocks). The seed is left at 0.
SimConfig interval_config(const ReferenceInterval& iv);

/// Timestamps of the records in [start, end).
std::vector<double> window_times(const Chain& chain, double start, double end);

/// Builds a simulation config from JSON. Relative file paths inside the
/// config resolve against `base_dir`.
SimConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json config_to_json(const SimConfig& c);

/// Runs one command line (argv[0] is the program name). Returns the exit
/// status: 0 success, 1 runtime or IO failure, 2 usage error.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace blockarrival::cli
