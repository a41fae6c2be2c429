#pragma once

#include <optional>
#include <vector>

#include "blockarrival/delay_model.hpp"
#include "blockarrival/errors.hpp"
#include "blockarrival/point_process.hpp"
#include "blockarrival/units.hpp"

namespace blockarrival {

struct DifficultyState {
  int segment_index = 0;
  double difficulty = 1.0;
  Seconds segment_start{0.0};

  /// L = 2^224 / D.
  double target() const;
};

/// Difficulty for the next segment after one that took `segment_duration`.
double next_difficulty(double difficulty, Seconds segment_duration);
double target_from_difficulty(double difficulty);

/// Principal branch of the Lambert W function.
double lambert_w(double x);

/// One step of the segment-duration recursion for log hash-rate slope `a`.
Fortnights delta_step(Fortnights delta, PerFortnight a);
/// Iterates delta_step from `delta0` until successive values differ by at most `tol`.
Fortnights solve_fixed_point(PerFortnight a, Fortnights delta0, double tol = 1e-13);

/// Positive root T of e^{aT} = 1209600 / T.
Seconds steady_segment_time(PerSecond a);
/// Positive root T of e^{2016 a T} = 600 / T.
Seconds steady_block_time(PerSecond a);

struct SteadyState {
  PerFortnight a;
  Fortnights delta_star;
  Seconds segment_time;
  Seconds block_time;
};
SteadyState steady_state(PerSecond a);

struct DeterministicSchedule {
  std::vector<Seconds> y;          // y_0 .. y_N
  std::vector<double> difficulty;  // d_1 .. d_N
  std::vector<Seconds> delta;      // δ_1 .. δ_N

  std::size_t segments() const { return delta.size(); }
};

/// The hash-rate domain ended before all requested segments were solved.
class PartialScheduleError : public RangeError {
 public:
  PartialScheduleError(const std::string& what, DeterministicSchedule completed)
      : RangeError(what), completed_(std::move(completed)) {}
  const DeterministicSchedule& completed() const { return completed_; }

 private:
  DeterministicSchedule completed_;
};

/// Change times y_n at which the expected number of arrivals since y_{n-1}
/// reaches 2016, for hash rate `hashrate` (hashes per second) and starting
/// difficulty d1. With a delay model the block rate is the mean-field
/// 1 / (1/λ + mean delay).
DeterministicSchedule deterministic_schedule(const RateFunction& hashrate, double d1, Seconds y0,
                                             int n_segments,
                                             std::optional<DelayModel> delay = std::nullopt);

}  // namespace blockarrival
