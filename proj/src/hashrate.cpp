#include "blockarrival/hashrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "blockarrival/errors.hpp"
#include "blockarrival/units.hpp"

namespace blockarrival {

namespace {

struct Window {
  std::size_t lo;  // chain position of the opening timestamp
  std::size_t hi;  // chain position of the closing timestamp; blocks lo+1..hi fall inside
  double time;     // midpoint (X_lo + X_hi) / 2
  double value;    // hashes per second
};

// Windows of k blocks centred on each block with both ends inside the chain.
// Non-positive durations (possible only in raw data) are omitted.
std::vector<Window> centred_windows(const Chain& chain, int k) {
  if (k < 2) throw ParameterError("window must span at least 2 blocks");
  const auto& rs = chain.records();
  const std::size_t n = rs.size();
  if (n <= static_cast<std::size_t>(k)) throw PreconditionError("chain shorter than window");
  const std::size_t below = static_cast<std::size_t>(k / 2);
  const std::size_t above = static_cast<std::size_t>(k - k / 2);

  std::vector<long double> cumulative(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) cumulative[i + 1] = cumulative[i] + rs[i].difficulty;

  std::vector<Window> out;
  out.reserve(n - static_cast<std::size_t>(k));
  for (std::size_t i = below; i + above < n; ++i) {
    const std::size_t lo = i - below;
    const std::size_t hi = i + above;
    const double duration = rs[hi].timestamp - rs[lo].timestamp;
    if (!(duration > 0.0)) continue;
    const long double difficulty_sum = cumulative[hi + 1] - cumulative[lo + 1];
    const double value = static_cast<double>(kHashesPerDifficulty * difficulty_sum / duration);
    out.push_back({lo, hi, 0.5 * (rs[lo].timestamp + rs[hi].timestamp), value});
  }
  return out;
}

// Collapses windows sharing a midpoint into one averaged sample.
HashRateSeries to_series(const std::vector<Window>& windows) {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t run = 0;
  for (const auto& w : windows) {
    if (!times.empty() && w.time == times.back()) {
      ++run;
      values.back() += (w.value - values.back()) / static_cast<double>(run);
      continue;
    }
    if (!times.empty() && w.time < times.back())
      throw PreconditionError("window midpoints decrease; clean the chain first");
    times.push_back(w.time);
    values.push_back(w.value);
    run = 1;
  }
  if (times.empty()) throw NumericError("no window with positive duration");
  return HashRateSeries(std::move(times), std::move(values));
}

double growth_integral(double a, double from, double to) {
  // ∫_from^to e^{a t} dt
  if (a == 0.0) return to - from;
  return std::exp(a * from) * std::expm1(a * (to - from)) / a;
}

}  // namespace

HashRateSeries::HashRateSeries(std::vector<double> sample_times, std::vector<double> values)
    : times_(std::move(sample_times)), values_(std::move(values)) {
  if (times_.size() != values_.size())
    throw StructuralError("series times and values differ in length");
  if (times_.empty()) throw StructuralError("empty hash-rate series");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !std::isfinite(values_[i]) || !(values_[i] > 0.0))
      throw StructuralError("series value must be finite and positive at sample " +
                            std::to_string(i));
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw StructuralError("series sample times must strictly increase at sample " +
                            std::to_string(i));
  }
}

std::size_t HashRateSeries::interval_of(double t) const {
  if (t < times_.front() || t > times_.back())
    throw DomainError("time " + std::to_string(t) + " outside hash-rate series range");
  if (times_.size() == 1) return 0;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times_.begin());
  if (k == 0) k = 1;
  if (k >= times_.size()) k = times_.size() - 1;
  return k - 1;
}

double HashRateSeries::operator()(double t) const {
  const std::size_t k = interval_of(t);
  if (times_.size() == 1) return values_.front();
  const double t0 = times_[k];
  const double t1 = times_[k + 1];
  const double w = (t - t0) / (t1 - t0);
  return values_[k] + w * (values_[k + 1] - values_[k]);
}

std::vector<SegmentEstimate> segment_hashrate(const Chain& chain) {
  const auto& rs = chain.records();
  std::vector<SegmentEstimate> out;
  std::optional<std::size_t> previous_boundary;
  for (std::size_t p = 0; p < rs.size(); ++p) {
    if (rs[p].height % kBlocksPerSegment != 0) continue;
    if (previous_boundary) {
      const auto& first = rs[*previous_boundary];
      const double duration = rs[p].timestamp - first.timestamp;
      if (!(duration > 0.0))
        throw NumericError("non-positive segment duration ending at height " +
                           std::to_string(rs[p].height));
      SegmentEstimate e;
      e.segment = rs[p].height / kBlocksPerSegment;
      e.start_time = first.timestamp;
      e.end_time = rs[p].timestamp;
      e.difficulty = first.difficulty;
      e.hashrate = kBlocksPerSegment * kHashesPerDifficulty * first.difficulty / duration;
      out.push_back(e);
    }
    previous_boundary = p;
  }
  if (out.empty()) throw PreconditionError("chain does not cover a complete segment");
  return out;
}

HashRateSeries sliding_window(const Chain& chain, int k) { return to_series(centred_windows(chain, k)); }

std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::rectangular:
      return "rectangular";
    case KernelKind::gaussian:
      return "gaussian";
    case KernelKind::epanechnikov:
      return "epanechnikov";
  }
  return "unknown";
}

KernelKind parse_kernel(std::string_view name) {
  for (auto k : {KernelKind::rectangular, KernelKind::gaussian, KernelKind::epanechnikov})
    if (to_string(k) == name) return k;
  throw ParameterError("unknown kernel '" + std::string(name) + "'");
}

double kernel_value(KernelKind kind, double x) {
  switch (kind) {
    case KernelKind::rectangular:
      return std::fabs(x) < 1.0 ? 0.5 : 0.0;
    case KernelKind::gaussian:
      return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    case KernelKind::epanechnikov:
      return std::fabs(x) < 1.0 ? 0.75 * (1.0 - x * x) : 0.0;
  }
  return 0.0;
}

double kernel_radius(KernelKind kind) { return kind == KernelKind::gaussian ? 12.0 : 1.0; }

KernelEstimator::KernelEstimator(const Chain& chain, KernelKind kind, double bandwidth)
    : kind_(kind), h_(bandwidth) {
  if (!(bandwidth > 0.0)) throw ParameterError("bandwidth must be positive");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(chain.size());
  for (const auto& r : chain.records()) pts.emplace_back(r.timestamp, kHashesPerDifficulty * r.difficulty);
  std::sort(pts.begin(), pts.end());
  times_.reserve(pts.size());
  weights_.reserve(pts.size());
  long double mass = 0.0L;
  for (const auto& [t, w] : pts) {
    times_.push_back(t);
    weights_.push_back(w);
    mass += w;
  }
  total_mass_ = static_cast<double>(mass);
}

double KernelEstimator::operator()(double t) const {
  const double reach = kernel_radius(kind_) * h_;
  auto first = std::lower_bound(times_.begin(), times_.end(), t - reach);
  auto last = std::upper_bound(times_.begin(), times_.end(), t + reach);
  double sum = 0.0;
  for (auto it = first; it != last; ++it) {
    const auto i = static_cast<std::size_t>(it - times_.begin());
    sum += weights_[i] * kernel_value(kind_, (t - *it) / h_);
  }
  return sum / h_;
}

double ExpFit::operator()(double t) const { return std::exp(a * t + b); }

ExpFit fit_exponential(const HashRateSeries& series, double start, double end) {
  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = series.times()[i];
    if (t >= start && t <= end) {
      ts.push_back(t);
      ys.push_back(std::log(series.values()[i]));
    }
  }
  if (ts.size() < 2) throw NumericError("fewer than two samples inside the fit interval");
  const long double n = static_cast<long double>(ts.size());
  long double t_mean = 0.0L;
  long double y_mean = 0.0L;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    t_mean += ts[i];
    y_mean += ys[i];
  }
  t_mean /= n;
  y_mean /= n;
  long double sxx = 0.0L;
  long double sxy = 0.0L;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const long double dt = ts[i] - t_mean;
    sxx += dt * dt;
    sxy += dt * (ys[i] - y_mean);
  }
  if (!(sxx > 0.0L)) throw NumericError("degenerate fit: all samples at one time");
  ExpFit fit;
  const long double slope = sxy / sxx;
  fit.a = static_cast<double>(slope);
  fit.b = static_cast<double>(y_mean - slope * t_mean);
  fit.start = start;
  fit.end = end;
  fit.samples = ts.size();
  return fit;
}

double effective_hash_seconds(double gap, double a, double c) {
  const double grown = a == 0.0 ? gap : std::expm1(a * gap) / a;
  const double lost = (a - c) == 0.0 ? gap : std::expm1((a - c) * gap) / (a - c);
  return grown - lost;
}

HashRateSeries delay_corrected_fit(const Chain& chain, double c, int k) {
  if (!(c > 0.0)) throw ParameterError("delay rate c must be positive");
  const auto windows = centred_windows(chain, k);
  const auto& rs = chain.records();
  const HashRateSeries uncorrected = to_series(windows);

  double a = fit_exponential(uncorrected, uncorrected.start(), uncorrected.end()).a;
  std::vector<Window> corrected = windows;
  for (int iteration = 0; iteration < 50; ++iteration) {
    for (std::size_t w = 0; w < windows.size(); ++w) {
      const auto& win = windows[w];
      // Hash-seconds relative to the rate at the window midpoint.
      const double undelayed =
          growth_integral(a, rs[win.lo].timestamp - win.time, rs[win.hi].timestamp - win.time);
      double delayed = 0.0;
      for (std::size_t j = win.lo + 1; j <= win.hi; ++j) {
        const double gap = rs[j].timestamp - rs[j - 1].timestamp;
        delayed += std::exp(a * (rs[j - 1].timestamp - win.time)) * effective_hash_seconds(gap, a, c);
      }
      corrected[w].value = win.value * undelayed / delayed;
    }
    const auto series = to_series(corrected);
    const double next = fit_exponential(series, series.start(), series.end()).a;
    const bool settled = std::fabs(next - a) <= 1e-12 * std::fabs(a) + 1e-20;
    a = next;
    if (settled) break;
  }
  return to_series(corrected);
}

}  // namespace blockarrival
