#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "blockarrival/delay_model.hpp"
#include "blockarrival/hashrate.hpp"
#include "blockarrival/point_process.hpp"

namespace blockarrival {

/// Block rate after `elapsed` seconds since the last block, given the
/// undelayed rate `lambda`.
double effective_rate(double lambda, const DelayModel& delay, double elapsed);
/// Mean-field delayed rate 1 / (1/λ + mean delay).
double mean_field_rate(double lambda, const DelayModel& delay);

enum class DifficultyMode { random, deterministic };

std::string_view to_string(DifficultyMode m);
DifficultyMode parse_difficulty_mode(std::string_view s);

struct ExponentialHash {
  double a = 0.0;  // per second
  double b = 0.0;  // log hashes per second at t = 0
};
struct EmpiricalHash {
  std::shared_ptr<const HashRateSeries> series;
};
using HashModel = std::variant<ExponentialHash, EmpiricalHash>;

struct SimConfig {
  HashModel hash_model = ExponentialHash{};
  DifficultyMode difficulty_mode = DifficultyMode::random;
  DelayModel delay;
  double initial_difficulty = 1.0;
  double start_time = 0.0;
  std::size_t n_blocks = 0;
  std::uint64_t seed = 0;
};

struct SimResult {
  double start_time = 0.0;
  std::vector<double> arrival_times;  // excludes start_time
  /// (change time, new difficulty); the initial difficulty is at start_time.
  std::vector<std::pair<double, double>> difficulty_history;
  bool partial = false;
  SimConfig config;

  /// Gaps X_i - X_{i-1} with X_0 = start_time.
  std::vector<double> interarrivals() const;
};

/// H(t) in hashes per second for the configured model.
RateFunction hash_rate_function(const HashModel& model);

/// Difficulty putting an exponential hash rate in steady state for a segment
/// starting at t0: the expected block count over the steady segment time is
/// exactly 2016.
double steady_initial_difficulty(double a, double b, double t0);

SimResult simulate(const SimConfig& config);

struct RepStats {
  std::uint64_t seed = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
  bool partial = false;
};

struct ReplicateSummary {
  std::vector<RepStats> reps;
  double mean = 0.0;       // average of per-rep means
  double sd = 0.0;         // average of per-rep sds
  double mean_ci95 = 0.0;  // 1.96 * s / sqrt(reps) half-widths
  double sd_ci95 = 0.0;
};

/// Replicate r runs with seed derive_seed(base_seed, r); reps are reduced in index order.
ReplicateSummary replicate(const SimConfig& config, std::size_t n_reps, std::uint64_t base_seed);

}  // namespace blockarrival
