#include "blockarrival/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockarrival/rng.hpp"
#include "blockarrival/units.hpp"

namespace blockarrival {

std::vector<double> interarrivals(const std::vector<double>& times) {
  std::vector<double> gaps;
  if (times.size() < 2) return gaps;
  gaps.reserve(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) gaps.push_back(times[i] - times[i - 1]);
  return gaps;
}

InterarrivalSummary gap_summary(const std::vector<double>& gaps) {
  if (gaps.empty()) throw PreconditionError("need at least one inter-arrival");
  // Welford's update.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double g : gaps) {
    ++n;
    const double d = g - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (g - mean);
  }
  InterarrivalSummary s;
  s.n = n;
  s.mean = mean;
  s.sd = n > 1 ? std::sqrt(std::max(0.0, m2 / static_cast<double>(n - 1))) : 0.0;
  s.blocks_per_hour = mean > 0.0 ? 3600.0 / mean : std::numeric_limits<double>::quiet_NaN();
  return s;
}

InterarrivalSummary interarrival_summary(const std::vector<double>& times, bool allow_negative) {
  if (times.size() < 2) throw PreconditionError("need at least two times");
  auto gaps = interarrivals(times);
  if (!allow_negative) {
    auto bad = std::find_if(gaps.begin(), gaps.end(), [](double g) { return g < 0.0; });
    if (bad != gaps.end())
      throw PreconditionError("negative inter-arrival at index " +
                              std::to_string(bad - gaps.begin() + 1) + " (use raw mode)");
  }
  return gap_summary(gaps);
}

SegmentProfile position_in_segment_profile(const std::vector<double>& times,
                                           std::uint64_t first_height) {
  SegmentProfile p;
  std::vector<double> sums(kBlocksPerSegment, 0.0);
  p.counts.assign(kBlocksPerSegment, 0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const std::uint64_t h = first_height + i;
    const std::size_t pos = h % kBlocksPerSegment;
    sums[pos] += times[i] - times[i - 1];
    ++p.counts[pos];
  }
  p.position_means.resize(kBlocksPerSegment);
  for (std::size_t k = 0; k < sums.size(); ++k)
    p.position_means[k] = p.counts[k] ? sums[k] / static_cast<double>(p.counts[k])
                                      : std::numeric_limits<double>::quiet_NaN();
  return p;
}

SurvivorFunction::SurvivorFunction(std::vector<double> gaps) : sorted_(std::move(gaps)) {
  if (sorted_.empty()) throw PreconditionError("survivor function needs at least one value");
  std::sort(sorted_.begin(), sorted_.end());
}

double SurvivorFunction::operator()(double x) const {
  auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(sorted_.end() - it) / static_cast<double>(sorted_.size());
}

std::vector<std::pair<double, double>> SurvivorFunction::steps() const {
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(sorted_.size());
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
    out.emplace_back(sorted_[i], static_cast<double>(sorted_.size() - i - 1) / n);
  }
  return out;
}

SurvivorFunction empirical_survivor(const std::vector<double>& gaps) { return SurvivorFunction(gaps); }

std::vector<double> tail_resample(const std::vector<double>& gaps, double threshold,
                                  std::uint64_t seed) {
  if (!(threshold > 0.0)) throw ParameterError("threshold must be positive");
  if (gaps.empty()) return gaps;
  const double mean = gap_summary(gaps).mean;
  Rng rng(seed);
  std::vector<double> out = gaps;
  for (double& g : out)
    if (g > threshold) g = threshold + rng.exponential(mean);
  return out;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw PreconditionError("KS statistic needs a non-empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

namespace {

// Sorted sample in place; Exp(mean) cdf = -expm1(-x/mean).
double sorted_exponential_ks(const std::vector<double>& sorted, double mean) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = -std::expm1(-sorted[i] / mean);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double sample_mean(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

}  // namespace

double exponential_ks_statistic(std::vector<double> sample) {
  if (sample.empty()) throw PreconditionError("KS statistic needs a non-empty sample");
  const double mean = sample_mean(sample);
  if (!(mean > 0.0)) throw DomainError("exponential fit needs a positive sample mean");
  std::sort(sample.begin(), sample.end());
  return sorted_exponential_ks(sample, mean);
}

double ks_pvalue(double d, std::size_t n) {
  if (n == 0) throw PreconditionError("ks_pvalue needs n >= 1");
  if (d <= 0.0) return 1.0;
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  // Q_KS(λ) = 2 Σ (-1)^{k-1} e^{-2 k² λ²}
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-16 * std::fabs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

LillieforsNull::LillieforsNull(std::size_t n, std::size_t n_mc, std::uint64_t seed)
    : n_(n), seed_(seed) {
  if (n < 5) throw PreconditionError("Lilliefors test needs at least 5 observations");
  if (n_mc < 999) throw ParameterError("n_mc must be >= 999");
  Rng rng(seed);
  std::vector<double> draw(n);
  sorted_.reserve(n_mc);
  for (std::size_t r = 0; r < n_mc; ++r) {
    for (double& x : draw) x = rng.exponential();
    const double mean = sample_mean(draw);
    std::sort(draw.begin(), draw.end());
    sorted_.push_back(sorted_exponential_ks(draw, mean));
  }
  std::sort(sorted_.begin(), sorted_.end());
}

TestReport LillieforsNull::test(const std::vector<double>& sample) const {
  if (sample.size() != n_) throw PreconditionError("sample size does not match the null");
  if (std::all_of(sample.begin(), sample.end(), [&](double x) { return x == sample.front(); }))
    throw DomainError("degenerate sample: all values equal");
  TestReport r;
  r.statistic = exponential_ks_statistic(sample);
  const auto at_least = static_cast<std::size_t>(
      sorted_.end() - std::lower_bound(sorted_.begin(), sorted_.end(), r.statistic));
  r.n_mc = sorted_.size();
  r.p_value = static_cast<double>(1 + at_least) / static_cast<double>(r.n_mc + 1);
  r.below_resolution = at_least == 0;
  r.method = "lilliefors-exponential-mc";
  r.seed = seed_;
  for (double alpha : {0.01, 0.05, 0.10}) r.decision_at.push_back({alpha, r.p_value <= alpha});
  return r;
}

TestReport lilliefors_exponential(const std::vector<double>& sample, std::size_t n_mc,
                                  std::uint64_t seed) {
  if (sample.size() < 5) throw PreconditionError("Lilliefors test needs at least 5 observations");
  if (std::all_of(sample.begin(), sample.end(), [&](double x) { return x == sample.front(); }))
    throw DomainError("degenerate sample: all values equal");
  return LillieforsNull(sample.size(), n_mc, seed).test(sample);
}

}  // namespace blockarrival
