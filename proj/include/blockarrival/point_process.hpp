#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "blockarrival/delay_model.hpp"
#include "blockarrival/errors.hpp"
#include "blockarrival/hashrate.hpp"
#include "blockarrival/rng.hpp"

namespace blockarrival {

/// Right-continuous difficulty step function D(t), defined from its first
/// change time onward.
class DifficultyStep {
 public:
  DifficultyStep(std::vector<double> change_times, std::vector<double> difficulties);
  static DifficultyStep constant(double difficulty, double from = -INFINITY);

  double operator()(double t) const;
  std::size_t index_of(double t) const;
  const std::vector<double>& change_times() const { return times_; }
  const std::vector<double>& difficulties() const { return values_; }
  /// First change time strictly after t, or +inf.
  double next_change_after(double t) const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

/// A block-arrival intensity λ(t) ≥ 0 (events per second).
///
/// Closed-form kinds (constant, linear, exponential) integrate and invert
/// exactly. The empirical kind is λ(t) = H(t) / (2^32 D(t)) for a linearly
/// interpolated hash-rate series and a difficulty step function; it is
/// integrated exactly piece by piece. The delayed kind multiplies a base rate
/// by a propagation-delay ramp measured from `last_event`.
class RateFunction {
 public:
  struct Constant {
    double rate;
  };
  struct Linear {
    double slope;  // λ(t) = slope * t on t >= 0
  };
  struct Exponential {
    double a;
    double b;  // λ(t) = exp(a t + b)
  };
  struct Empirical {
    std::shared_ptr<const HashRateSeries> hashrate;
    DifficultyStep difficulty;
    double scale = 1.0;
  };
  struct Delayed {
    std::shared_ptr<const RateFunction> base;
    DelayModel delay;
    double last_event;
  };
  using Kind = std::variant<Constant, Linear, Exponential, Empirical, Delayed>;

  static RateFunction constant(double rate);
  static RateFunction linear(double slope);
  static RateFunction exponential(double a, double b);
  static RateFunction empirical(HashRateSeries hashrate, DifficultyStep difficulty);
  static RateFunction empirical(std::shared_ptr<const HashRateSeries> hashrate,
                                DifficultyStep difficulty);
  static RateFunction delayed(RateFunction base, DelayModel delay, double last_event);

  const Kind& kind() const { return kind_; }
  std::string kind_name() const;
  bool is_delayed() const { return std::holds_alternative<Delayed>(kind_); }

  /// [lo, hi] on which λ is defined.
  std::pair<double, double> domain() const;
  double operator()(double t) const;

  /// Λ(t0, t1) = ∫_{t0}^{t1} λ(t) dt.
  double cumulative(double t0, double t1) const;
  /// z with Λ(t0, z) = n. RangeError if the domain holds less mass.
  double invert(double t0, double n) const;
  /// λ multiplied by a positive constant.
  RateFunction scaled(double factor) const;
  /// Same delayed rate with the ramp clock restarted at `t` (delayed kind only).
  RateFunction restarted_at(double t) const;

  /// Next event strictly after `t` of a process with this intensity: exact
  /// inversion for closed-form kinds, thinning otherwise. nullopt when the
  /// domain ends first.
  std::optional<double> next_event(double t, Rng& rng) const;

 private:
  explicit RateFunction(Kind k) : kind_(std::move(k)) {}
  void check_domain(double t0, double t1) const;

  Kind kind_;
};

struct StopRule {
  std::optional<std::size_t> count;
  std::optional<double> horizon;

  static StopRule after_count(std::size_t n) { return {n, std::nullopt}; }
  static StopRule at_horizon(double t) { return {std::nullopt, t}; }
};

struct ArrivalSample {
  std::vector<double> times;
  std::string rate_kind;
  std::uint64_t seed = 0;
};

/// Sampling stopped because the intensity's domain ran out.
class PartialSampleError : public RangeError {
 public:
  PartialSampleError(const std::string& what, ArrivalSample partial)
      : RangeError(what), partial_(std::move(partial)) {}
  const ArrivalSample& partial() const { return partial_; }

 private:
  ArrivalSample partial_;
};

/// Arrivals after t0 of the process with intensity `rate`. For the delayed
/// kind the ramp restarts at every arrival, so the output is a self-exciting
/// process rather than a Poisson process.
ArrivalSample sample_nhpp(const RateFunction& rate, double t0, StopRule stop, std::uint64_t seed);
ArrivalSample sample_nhpp(const RateFunction& rate, double t0, StopRule stop, Rng& rng);

/// Λ(X_{i-1}, X_i) with X_0 = t0; i.i.d. Exp(1) when the sample is Poisson with `rate`.
std::vector<double> time_rescaled_gaps(const RateFunction& rate, double t0,
                                       const std::vector<double>& times);

/// Density of the n-th arrival after t0: λ(t) Λ^{n-1} e^{-Λ} / (n-1)!, Λ = Λ(t0, t).
double nth_arrival_density(const RateFunction& rate, double t0, int n, double t);

/// Ei(x) = -∫_{-x}^∞ e^{-t}/t dt (principal value). DomainError at x = 0.
double exponential_integral_ei(double x);
/// e^x E1(x) for x > 0, in extended precision.
long double scaled_exponential_integral_e1(long double x);

struct ExpectedArrival {
  double value = 0.0;
  bool closed_form = true;      // false when the quadrature fallback was used
  double relative_error_bound = 0.0;  // estimate for the closed form
};

/// E[X_n | X_0 = 0] for λ(t) = e^{a t}, 1 <= n <= 2016.
///
/// Evaluates the alternating closed form in compensated extended precision.
/// Its terms grow like a^{-n}, so when the propagated rounding bound exceeds
/// 1e-6 relative the result comes instead from quadrature of
/// E[log(1 + a U) / a] with U ~ Gamma(n, 1), and `closed_form` is false.
ExpectedArrival expected_nth_arrival_exponential(double a, int n);

/// E[X_n] for λ(t) = a t: sqrt(2/a) Γ(n + 1/2) / Γ(n).
double expected_nth_arrival_linear(double a, int n);

}  // namespace blockarrival
