#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "blockarrival/chain_data.hpp"

namespace blockarrival {

/// Time-indexed hash-rate estimates, linearly interpolated between samples.
class HashRateSeries {
 public:
  /// Requires strictly increasing times and finite positive values.
  HashRateSeries(std::vector<double> sample_times, std::vector<double> values);

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return times_.size(); }
  double start() const { return times_.front(); }
  double end() const { return times_.back(); }

  /// Linear interpolation; DomainError outside [start, end].
  double operator()(double t) const;
  /// Index k of the knot interval [t_k, t_{k+1}] containing t.
  std::size_t interval_of(double t) const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

struct SegmentEstimate {
  std::uint64_t segment = 0;  // i: covers heights [2016(i-1), 2016 i)
  double start_time = 0.0;    // X_{2016(i-1)}
  double end_time = 0.0;      // X_{2016 i}
  double difficulty = 0.0;    // D_i
  double hashrate = 0.0;      // hashes per second
};

/// Average hash rate over every complete segment contained in the chain.
std::vector<SegmentEstimate> segment_hashrate(const Chain& chain);

/// Centred k-block sliding-window estimate, sampled at window midpoints.
HashRateSeries sliding_window(const Chain& chain, int k);

enum class KernelKind { rectangular, gaussian, epanechnikov };

std::string_view to_string(KernelKind k);
KernelKind parse_kernel(std::string_view name);

/// K(x); each kernel integrates to one.
double kernel_value(KernelKind kind, double x);
/// Half-width of the kernel support in bandwidth units (Gaussian is truncated
/// where its tail mass is below 1e-30).
double kernel_radius(KernelKind kind);

/// Weighted kernel smoother: (1/h) * sum_i 2^32 D_i K((t - X_i) / h).
class KernelEstimator {
 public:
  KernelEstimator(const Chain& chain, KernelKind kind, double bandwidth);

  double operator()(double t) const;
  KernelKind kind() const { return kind_; }
  double bandwidth() const { return h_; }
  /// Total weight sum_i 2^32 D_i, the integral of the estimator over all t.
  double total_mass() const { return total_mass_; }

 private:
  KernelKind kind_;
  double h_;
  std::vector<double> times_;    // sorted
  std::vector<double> weights_;  // aligned with times_
  double total_mass_ = 0.0;
};

inline KernelEstimator kernel_estimate(const Chain& chain, KernelKind kind, double bandwidth) {
  return KernelEstimator(chain, kind, bandwidth);
}

/// log H(t) ~ a t + b.
struct ExpFit {
  double a = 0.0;  // per second
  double b = 0.0;  // log hashes per second at t = 0
  double start = 0.0;
  double end = 0.0;
  std::size_t samples = 0;

  double operator()(double t) const;
};

/// Ordinary least squares of log(value) against time over samples in [start, end].
ExpFit fit_exponential(const HashRateSeries& series, double start, double end);

/// Hash-seconds credited to a gap of length `gap` when the underlying hash rate
/// grows as e^{a t} from 1 at the gap start and the effective fraction ramps as
/// 1 - e^{-c t}: (e^{aΔ}-1)/a - (e^{(a-c)Δ}-1)/(a-c).
double effective_hash_seconds(double gap, double a, double c);

/// Sliding-window estimate of the underlying (pre-delay) hash rate, assuming
/// an exponential-ramp propagation delay with rate `c` per second.
///
/// Each window's uncorrected estimate is multiplied by
///   sum_gaps ∫ e^{a(t - t_w)} dt  /  sum_gaps e^{a(X_j - t_w)} G(Δ_j; a, c),
/// the ratio of hash-seconds credited without and with the delay, where a is
/// the growth rate fitted to the corrected series itself (fixed-point
/// iteration starting from the uncorrected fit). The ratio tends to 1 as c
/// grows.
HashRateSeries delay_corrected_fit(const Chain& chain, double c, int k = 144);

}  // namespace blockarrival
