#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "blockarrival/errors.hpp"

namespace blockarrival {

struct InterarrivalSummary {
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator
  std::size_t n = 0;
  double blocks_per_hour = 0.0;
};

/// Moments of successive differences of `times`. Decreasing steps are an
/// error unless `allow_negative` is set.
InterarrivalSummary interarrival_summary(const std::vector<double>& times,
                                         bool allow_negative = false);
/// Same moments for a list of gaps.
InterarrivalSummary gap_summary(const std::vector<double>& gaps);

std::vector<double> interarrivals(const std::vector<double>& times);

struct SegmentProfile {
  std::vector<double> position_means;  // index 0 holds position 1
  std::vector<std::size_t> counts;
};

/// Mean gap by position within the 2016-block segment. `times[i]` is the
/// timestamp of block height `first_height + i`; the gap ending at height h
/// has position (h mod 2016) + 1. Empty positions have mean NaN.
SegmentProfile position_in_segment_profile(const std::vector<double>& times,
                                           std::uint64_t first_height);

/// S(x) = #{gaps > x} / n.
class SurvivorFunction {
 public:
  explicit SurvivorFunction(std::vector<double> gaps);
  double operator()(double x) const;
  /// (x, S(x)) at each distinct gap value.
  std::vector<std::pair<double, double>> steps() const;
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

SurvivorFunction empirical_survivor(const std::vector<double>& gaps);

/// Gaps above `threshold` replaced by threshold + Exp(sample mean) draws.
std::vector<double> tail_resample(const std::vector<double>& gaps, double threshold,
                                  std::uint64_t seed);

/// sup |F_n - F| over the sample, evaluated at both sides of each order statistic.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// KS statistic against Exp(sample mean).
double exponential_ks_statistic(std::vector<double> sample);
/// Asymptotic Kolmogorov tail probability P(D_n > d) with Stephens' correction.
double ks_pvalue(double d, std::size_t n);

struct Decision {
  double alpha;
  bool reject;
};

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  std::size_t n_mc = 0;
  std::uint64_t seed = 0;
  bool below_resolution = false;  // p is the bound 1/(n_mc+1)
  std::vector<Decision> decision_at;
};

/// Monte-Carlo null distribution of the exponential Lilliefors statistic for
/// sample size n. The statistic is scale-free, so one null serves every
/// sample of that size.
class LillieforsNull {
 public:
  LillieforsNull(std::size_t n, std::size_t n_mc, std::uint64_t seed);
  std::size_t sample_size() const { return n_; }
  std::size_t replicates() const { return sorted_.size(); }
  std::uint64_t seed() const { return seed_; }
  TestReport test(const std::vector<double>& sample) const;

 private:
  std::size_t n_;
  std::uint64_t seed_;
  std::vector<double> sorted_;
};

inline constexpr std::size_t kDefaultMonteCarlo = 9999;

TestReport lilliefors_exponential(const std::vector<double>& sample,
                                  std::size_t n_mc = kDefaultMonteCarlo, std::uint64_t seed = 1);

}  // namespace blockarrival
