#include "blockarrival/difficulty.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "blockarrival/numerics.hpp"

namespace blockarrival {

namespace {

constexpr double kTwoTo224 = 2.695994666715063979e67;  // 2^224

}  // namespace

double DifficultyState::target() const { return target_from_difficulty(difficulty); }

double next_difficulty(double difficulty, Seconds segment_duration) {
  if (!(segment_duration.value() > 0.0)) throw NumericError("segment duration must be positive");
  if (!(difficulty > 0.0)) throw NumericError("difficulty must be positive");
  return kSecondsPerFortnight * difficulty / segment_duration.value();
}

double target_from_difficulty(double difficulty) {
  if (!(difficulty > 0.0)) throw DomainError("difficulty must be positive");
  return kTwoTo224 / difficulty;
}

double lambert_w(double x) {
  constexpr double kMinusInvE = -0.36787944117144233;
  if (std::isnan(x) || x < kMinusInvE) throw DomainError("lambert_w needs x >= -1/e");
  if (x == 0.0) return 0.0;
  if (x == kMinusInvE) return -1.0;
  if (std::isinf(x)) return x;

  double w;
  if (x < -0.25) {
    // Series about the branch point in p = sqrt(2 (e x + 1)).
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    w = std::log1p(x);
    if (x > 3.0) w -= std::log(w);
  }
  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::fabs(step) <= 1e-15 * (1.0 + std::fabs(w))) break;
  }
  return w;
}

Fortnights delta_step(Fortnights delta, PerFortnight a) {
  const double d = delta.value();
  const double k = a.value();
  if (!(d > 0.0) || !(k > 0.0)) throw ParameterError("delta_step needs delta > 0 and a > 0");
  // (1/a) log((e^{aδ} - 1) / (e^{aδ} δ) + 1), with (e^{aδ}-1)/e^{aδ} = -expm1(-aδ).
  return Fortnights(std::log1p(-std::expm1(-k * d) / d) / k);
}

Fortnights solve_fixed_point(PerFortnight a, Fortnights delta0, double tol) {
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  if (!(a.value() > 0.0) || !(delta0.value() > 0.0))
    throw ParameterError("solve_fixed_point needs a > 0 and delta0 > 0");
  Fortnights d = delta0;
  for (int it = 0; it < 10000; ++it) {
    const Fortnights next = delta_step(d, a);
    if (std::fabs(next.value() - d.value()) <= tol) return next;
    d = next;
  }
  throw NumericError("fixed-point iteration did not converge");
}

namespace {

// Positive root of a*T + log T = log(scale) on (0, scale].
double steady_root(double a, double scale) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("growth rate must be finite and >= 0");
  if (a == 0.0) return scale;
  // Work in u = T / scale: f(u) = a*scale*u + log u, root in (0, 1].
  const double k = a * scale;
  auto f = [k](double u) { return k * u + std::log(u); };
  auto df = [k](double u) { return k + 1.0 / u; };
  // W(k)/k is the exact root; start the bracket from a coarse lower bound.
  double lo = 1.0 / (1.0 + k);
  while (f(lo) > 0.0) lo *= 0.5;
  const double u = numerics::solve_bracketed(f, df, lo, 1.0, 1e-16);
  return u * scale;
}

}  // namespace

Seconds steady_segment_time(PerSecond a) { return Seconds(steady_root(a.value(), kSecondsPerFortnight)); }

Seconds steady_block_time(PerSecond a) {
  return Seconds(steady_root(a.value() * kBlocksPerSegment, kTargetBlockSeconds));
}

SteadyState steady_state(PerSecond a) {
  SteadyState s;
  s.a = to_per_fortnight(a);
  s.segment_time = steady_segment_time(a);
  s.delta_star = to_fortnights(s.segment_time);
  s.block_time = s.segment_time / static_cast<double>(kBlocksPerSegment);
  return s;
}

DeterministicSchedule deterministic_schedule(const RateFunction& hashrate, double d1, Seconds y0,
                                             int n_segments, std::optional<DelayModel> delay) {
  if (n_segments < 1) throw ParameterError("n_segments must be >= 1");
  if (!(d1 > 0.0)) throw ParameterError("initial difficulty must be positive");
  const bool delayed = delay && delay->present();
  const double target = kBlocksPerSegment;
  const double hi_domain = hashrate.domain().second;

  DeterministicSchedule out;
  out.y.push_back(y0);
  double d = d1;
  for (int n = 0; n < n_segments; ++n) {
    const double start = out.y.back().value();
    const RateFunction lambda = hashrate.scaled(1.0 / (kHashesPerDifficulty * d));
    double end;
    try {
      if (!delayed) {
        end = lambda.invert(start, target);
        if (end > hi_domain) throw RangeError("domain exhausted");
      } else {
        const double m = delay->mean();
        auto rate = [&](double t) {
          const double l = lambda(t);
          return l / (1.0 + l * m);
        };
        auto mass = [&](double t) { return numerics::integrate(rate, start, t, 1e-13) - target; };
        // The mean-field rate is below λ, so λ's inverse is a lower bound.
        double lo = lambda.invert(start, target);
        if (lo > hi_domain) throw RangeError("domain exhausted");
        double step = (lo - start) * 0.25 + 1.0;
        double hi = lo;
        while (mass(hi) < 0.0) {
          lo = hi;
          if (hi >= hi_domain) throw RangeError("domain exhausted");
          hi = std::min(hi_domain, hi + step);
          step *= 2.0;
        }
        end = numerics::solve_bracketed(mass, rate, lo, hi, 1e-9);
        if (std::fabs(mass(end)) > 1e-8 * target)
          throw NumericError("deterministic schedule residual above tolerance");
      }
    } catch (const RangeError&) {
      throw PartialScheduleError("hash-rate domain exhausted after " + std::to_string(n) +
                                     " segments",
                                 out);
    }
    const Seconds duration(end - start);
    out.y.emplace_back(end);
    out.difficulty.push_back(d);
    out.delta.push_back(duration);
    d = next_difficulty(d, duration);
  }
  return out;
}

}  // namespace blockarrival
