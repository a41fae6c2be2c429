#include "blockarrival/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "blockarrival/numerics.hpp"
#include "blockarrival/units.hpp"

namespace blockarrival {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// One stretch of an empirical rate on which H is linear and D constant:
// λ(t) = kappa * (h_lo + slope * (t - lo)).
struct Piece {
  double lo;
  double hi;
  double h_lo;
  double h_hi;
  double kappa;

  double mass() const { return kappa * 0.5 * (h_lo + h_hi) * (hi - lo); }
  // Offset u in [0, hi - lo] at which the piece has accumulated `target`.
  double offset_for(double target) const {
    const double width = hi - lo;
    const double q = target / kappa;
    const double slope = (h_hi - h_lo) / width;
    const double disc = std::max(0.0, h_lo * h_lo + 2.0 * slope * q);
    const double u = 2.0 * q / (h_lo + std::sqrt(disc));
    return std::clamp(u, 0.0, width);
  }
};

// Walks the empirical pieces covering [t0, t1], calling visit(piece) until it
// returns false.
template <class Visit>
void walk_pieces(const RateFunction::Empirical& e, double t0, double t1, Visit&& visit) {
  const auto& series = *e.hashrate;
  const auto& knots = series.times();
  const auto& values = series.values();
  double cur = t0;
  std::size_t k = series.interval_of(t0);
  while (cur < t1) {
    while (k + 1 < knots.size() && knots[k + 1] <= cur) ++k;
    const double knot_end = k + 1 < knots.size() ? knots[k + 1] : knots[k];
    const double next = std::min({t1, knot_end, e.difficulty.next_change_after(cur)});
    if (!(next > cur)) break;
    auto interp = [&](double t) {
      if (k + 1 >= knots.size()) return values[k];
      const double w = (t - knots[k]) / (knots[k + 1] - knots[k]);
      return values[k] + w * (values[k + 1] - values[k]);
    };
    const Piece p{cur, next, interp(cur), interp(next),
                  e.scale / (kHashesPerDifficulty * e.difficulty(cur))};
    if (!visit(p)) return;
    cur = next;
  }
}

double ramp_loss_closed_form(const RateFunction& base, double c, double s, double t0, double t1,
                             bool& handled) {
  handled = true;
  return std::visit(
      Overloaded{
          [&](const RateFunction::Constant& k) {
            return k.rate * std::exp(-c * (t0 - s)) * -std::expm1(-c * (t1 - t0)) / c;
          },
          [&](const RateFunction::Exponential& k) {
            const double r = k.a - c;
            const double head = std::exp(k.a * t0 + k.b - c * (t0 - s));
            return head * (r == 0.0 ? (t1 - t0) : std::expm1(r * (t1 - t0)) / r);
          },
          [&](const auto&) {
            handled = false;
            return 0.0;
          }},
      base.kind());
}

double strictly_after(double t, double z) {
  return z > t ? z : std::nextafter(t, kInf);
}

}  // namespace

// ---------------------------------------------------------------------------
// DifficultyStep

DifficultyStep::DifficultyStep(std::vector<double> change_times, std::vector<double> difficulties)
    : times_(std::move(change_times)), values_(std::move(difficulties)) {
  if (times_.empty() || times_.size() != values_.size())
    throw StructuralError("difficulty step needs matching, non-empty times and values");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(values_[i] > 0.0)) throw StructuralError("difficulty must be positive");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw StructuralError("difficulty change times must strictly increase");
  }
}

DifficultyStep DifficultyStep::constant(double difficulty, double from) {
  return DifficultyStep({from}, {difficulty});
}

std::size_t DifficultyStep::index_of(double t) const {
  if (t < times_.front()) throw DomainError("time precedes the first difficulty");
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

double DifficultyStep::operator()(double t) const { return values_[index_of(t)]; }

double DifficultyStep::next_change_after(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return it == times_.end() ? kInf : *it;
}

// ---------------------------------------------------------------------------
// RateFunction

RateFunction RateFunction::constant(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw ParameterError("rate must be finite and >= 0");
  return RateFunction(Constant{rate});
}

RateFunction RateFunction::linear(double slope) {
  if (!(slope > 0.0)) throw ParameterError("linear rate slope must be positive");
  return RateFunction(Linear{slope});
}

RateFunction RateFunction::exponential(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw ParameterError("exponential rate needs finite a, b");
  return RateFunction(Exponential{a, b});
}

RateFunction RateFunction::empirical(HashRateSeries hashrate, DifficultyStep difficulty) {
  return empirical(std::make_shared<const HashRateSeries>(std::move(hashrate)), std::move(difficulty));
}

RateFunction RateFunction::empirical(std::shared_ptr<const HashRateSeries> hashrate,
                                     DifficultyStep difficulty) {
  return RateFunction(Empirical{std::move(hashrate), std::move(difficulty), 1.0});
}

RateFunction RateFunction::delayed(RateFunction base, DelayModel delay, double last_event) {
  return RateFunction(
      Delayed{std::make_shared<const RateFunction>(std::move(base)), delay, last_event});
}

std::string RateFunction::kind_name() const {
  return std::visit(Overloaded{[](const Constant&) { return std::string("constant"); },
                               [](const Linear&) { return std::string("linear"); },
                               [](const Exponential&) { return std::string("exponential"); },
                               [](const Empirical&) { return std::string("empirical"); },
                               [](const Delayed& d) {
                                 return "delayed(" + d.base->kind_name() + ")";
                               }},
                    kind_);
}

std::pair<double, double> RateFunction::domain() const {
  return std::visit(
      Overloaded{[](const Constant&) { return std::pair{-kInf, kInf}; },
                 [](const Linear&) { return std::pair{0.0, kInf}; },
                 [](const Exponential&) { return std::pair{-kInf, kInf}; },
                 [](const Empirical& e) {
                   return std::pair{std::max(e.hashrate->start(), e.difficulty.change_times().front()),
                                    e.hashrate->end()};
                 },
                 [](const Delayed& d) {
                   auto [lo, hi] = d.base->domain();
                   return std::pair{std::max(lo, d.last_event), hi};
                 }},
      kind_);
}

void RateFunction::check_domain(double t0, double t1) const {
  const auto [lo, hi] = domain();
  if (!(t1 >= t0)) throw DomainError("interval end precedes start");
  if (t0 < lo || t1 > hi)
    throw DomainError("interval [" + std::to_string(t0) + ", " + std::to_string(t1) +
                      "] outside rate domain");
}

double RateFunction::operator()(double t) const {
  check_domain(t, t);
  return std::visit(
      Overloaded{[](const Constant& k) { return k.rate; },
                 [t](const Linear& k) { return k.slope * t; },
                 [t](const Exponential& k) { return std::exp(k.a * t + k.b); },
                 [t](const Empirical& e) {
                   return e.scale * (*e.hashrate)(t) / (kHashesPerDifficulty * e.difficulty(t));
                 },
                 [t](const Delayed& d) { return (*d.base)(t) * d.delay.factor(t - d.last_event); }},
      kind_);
}

double RateFunction::cumulative(double t0, double t1) const {
  check_domain(t0, t1);
  if (t0 == t1) return 0.0;
  return std::visit(
      Overloaded{
          [&](const Constant& k) { return k.rate * (t1 - t0); },
          [&](const Linear& k) { return 0.5 * k.slope * (t1 - t0) * (t1 + t0); },
          [&](const Exponential& k) {
            const double head = std::exp(k.a * t0 + k.b);
            return k.a == 0.0 ? head * (t1 - t0) : head * std::expm1(k.a * (t1 - t0)) / k.a;
          },
          [&](const Empirical& e) {
            numerics::CompensatedSum sum;
            walk_pieces(e, t0, t1, [&](const Piece& p) {
              sum.add(p.mass());
              return true;
            });
            return sum.value();
          },
          [&](const Delayed& d) {
            const RateFunction& base = *d.base;
            const double s = d.last_event;
            switch (d.delay.kind) {
              case DelayModel::Kind::none:
                return base.cumulative(t0, t1);
              case DelayModel::Kind::constant: {
                const double from = std::max(t0, s + d.delay.dead_time);
                return from >= t1 ? 0.0 : base.cumulative(from, t1);
              }
              case DelayModel::Kind::exp_ramp: {
                const double c = d.delay.c;
                bool handled = false;
                double loss = ramp_loss_closed_form(base, c, s, t0, t1, handled);
                if (!handled) {
                  // e^{-c(t-s)} is below 1e-26 past s + 60/c.
                  const double upper = std::min(t1, std::max(t0, s + 60.0 / c));
                  loss = upper > t0 ? numerics::integrate(
                                          [&](double t) { return base(t) * std::exp(-c * (t - s)); },
                                          t0, upper, 1e-11)
                                    : 0.0;
                }
                return std::max(0.0, base.cumulative(t0, t1) - loss);
              }
            }
            return 0.0;
          }},
      kind_);
}

double RateFunction::invert(double t0, double n) const {
  if (!(n >= 0.0)) throw ParameterError("target mass must be non-negative");
  check_domain(t0, t0);
  if (n == 0.0) return t0;
  return std::visit(
      Overloaded{
          [&](const Constant& k) {
            if (k.rate == 0.0) throw RangeError("zero rate accumulates no mass");
            return t0 + n / k.rate;
          },
          [&](const Linear& k) { return std::sqrt(t0 * t0 + 2.0 * n / k.slope); },
          [&](const Exponential& k) {
            if (k.a == 0.0) return t0 + n * std::exp(-k.b);
            // z = t0 + log(1 + n a e^{-(a t0 + b)}) / a, evaluated in log space.
            const double y = std::log(n * std::fabs(k.a)) - (k.a * t0 + k.b);
            if (k.a > 0.0) {
              const double softplus = y > 30.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
              return t0 + softplus / k.a;
            }
            const double x = std::exp(y);
            if (!(x < 1.0)) throw RangeError("decaying exponential rate has insufficient mass");
            return t0 + std::log1p(-x) / k.a;
          },
          [&](const Empirical& e) {
            const double hi = domain().second;
            double remaining = n;
            double z = NAN;
            walk_pieces(e, t0, hi, [&](const Piece& p) {
              const double m = p.mass();
              if (remaining <= m) {
                z = p.lo + p.offset_for(remaining);
                return false;
              }
              remaining -= m;
              return true;
            });
            if (std::isnan(z)) throw RangeError("empirical rate domain exhausted before target mass");
            return z;
          },
          [&](const Delayed& d) {
            // The delayed rate never exceeds its base, so the base inverse is a lower bound.
            const double hi_domain = domain().second;
            double lo = d.base->invert(t0, n);
            if (lo > hi_domain) throw RangeError("delayed rate domain exhausted before target mass");
            auto excess = [&](double z) { return cumulative(t0, z) - n; };
            double step = (lo - t0) + d.delay.mean() + 1.0;
            double hi = lo;
            while (excess(hi) < 0.0) {
              lo = hi;
              hi = std::min(hi_domain, hi + step);
              step *= 2.0;
              if (hi == hi_domain && excess(hi) < 0.0)
                throw RangeError("delayed rate domain exhausted before target mass");
            }
            const double xtol = 1e-12 * std::max(1.0, std::fabs(hi));
            return numerics::solve_bracketed(excess, [&](double z) { return (*this)(z); }, lo, hi,
                                             xtol);
          }},
      kind_);
}

RateFunction RateFunction::scaled(double factor) const {
  if (!(factor > 0.0)) throw ParameterError("scale factor must be positive");
  return std::visit(
      Overloaded{[&](const Constant& k) { return RateFunction(Constant{k.rate * factor}); },
                 [&](const Linear& k) { return RateFunction(Linear{k.slope * factor}); },
                 [&](const Exponential& k) {
                   return RateFunction(Exponential{k.a, k.b + std::log(factor)});
                 },
                 [&](const Empirical& e) {
                   Empirical copy = e;
                   copy.scale *= factor;
                   return RateFunction(std::move(copy));
                 },
                 [&](const Delayed& d) {
                   return RateFunction::delayed(d.base->scaled(factor), d.delay, d.last_event);
                 }},
      kind_);
}

RateFunction RateFunction::restarted_at(double t) const {
  const auto* d = std::get_if<Delayed>(&kind_);
  if (d == nullptr) return *this;
  return RateFunction(Delayed{d->base, d->delay, t});
}

std::optional<double> RateFunction::next_event(double t, Rng& rng) const {
  return std::visit(
      Overloaded{
          [&](const Empirical& e) -> std::optional<double> {
            // Thinning against the per-piece majorant kappa * max(H_lo, H_hi).
            const double hi = domain().second;
            if (t < domain().first) throw DomainError("sampling start precedes rate domain");
            double cur = t;
            std::optional<double> result;
            while (cur < hi && !result) {
              walk_pieces(e, cur, hi, [&](const Piece& p) {
                const double bound = p.kappa * std::max(p.h_lo, p.h_hi);
                double x = p.lo;
                while (true) {
                  x += rng.exponential() / bound;
                  if (x >= p.hi) break;
                  const double u = (x - p.lo) / (p.hi - p.lo);
                  const double rate = p.kappa * (p.h_lo + u * (p.h_hi - p.h_lo));
                  if (rng.uniform() * bound < rate) {
                    result = strictly_after(t, x);
                    return false;
                  }
                }
                cur = p.hi;
                return true;
              });
              if (!result) break;
            }
            return result;
          },
          [&](const Delayed& d) -> std::optional<double> {
            const RateFunction& base = *d.base;
            switch (d.delay.kind) {
              case DelayModel::Kind::none:
                return base.next_event(t, rng);
              case DelayModel::Kind::constant:
                return base.next_event(std::max(t, d.last_event + d.delay.dead_time), rng);
              case DelayModel::Kind::exp_ramp: {
                // Thinning: candidates from the base rate, kept with the ramp fraction.
                double cur = t;
                while (true) {
                  auto candidate = base.next_event(cur, rng);
                  if (!candidate) return std::nullopt;
                  if (rng.uniform() < d.delay.factor(*candidate - d.last_event)) return candidate;
                  cur = *candidate;
                }
              }
            }
            return std::nullopt;
          },
          [&](const auto&) -> std::optional<double> {
            const double e = rng.exponential();
            try {
              return strictly_after(t, invert(t, e));
            } catch (const RangeError&) {
              return std::nullopt;
            }
          }},
      kind_);
}

// ---------------------------------------------------------------------------
// Sampling and distributions

ArrivalSample sample_nhpp(const RateFunction& rate, double t0, StopRule stop, std::uint64_t seed) {
  Rng rng(seed);
  return sample_nhpp(rate, t0, stop, rng);
}

ArrivalSample sample_nhpp(const RateFunction& rate, double t0, StopRule stop, Rng& rng) {
  if (!stop.count && !stop.horizon) throw ParameterError("stop rule needs a count or a horizon");
  ArrivalSample sample;
  sample.rate_kind = rate.kind_name();
  sample.seed = rng.seed();
  if (stop.count) sample.times.reserve(*stop.count);
  RateFunction current = rate;
  double t = t0;
  while (!(stop.count && sample.times.size() >= *stop.count)) {
    const auto next = current.next_event(t, rng);
    if (!next) {
      if (stop.horizon && current.domain().second >= *stop.horizon) break;
      throw PartialSampleError("rate domain exhausted after " +
                                   std::to_string(sample.times.size()) + " arrivals",
                               sample);
    }
    if (stop.horizon && *next > *stop.horizon) break;
    sample.times.push_back(*next);
    t = *next;
    if (current.is_delayed()) current = current.restarted_at(t);
  }
  return sample;
}

std::vector<double> time_rescaled_gaps(const RateFunction& rate, double t0,
                                       const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  double prev = t0;
  for (double x : times) {
    out.push_back(rate.cumulative(prev, x));
    prev = x;
  }
  return out;
}

double nth_arrival_density(const RateFunction& rate, double t0, int n, double t) {
  if (n < 1) throw ParameterError("arrival index must be >= 1");
  if (t < t0) return 0.0;
  const double lambda = rate(t);
  const double mass = rate.cumulative(t0, t);
  if (mass == 0.0) return n == 1 ? lambda : 0.0;
  if (lambda == 0.0 || std::isinf(mass)) return 0.0;
  return std::exp(std::log(lambda) + (n - 1) * std::log(mass) - mass - std::lgamma(n));
}

// ---------------------------------------------------------------------------
// Exponential integral

long double scaled_exponential_integral_e1(long double x) {
  if (!(x > 0.0L)) throw DomainError("E1 needs x > 0");
  constexpr long double kEuler = 0.577215664901532860606512090082402431L;
  constexpr long double kEps = std::numeric_limits<long double>::epsilon();
  if (x <= 1.0L) {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    long double term = 1.0L;
    long double sum = 0.0L;
    for (int k = 1; k < 200; ++k) {
      term *= -x / k;
      const long double add = term / k;
      sum += add;
      if (std::fabs(add) < kEps * std::fabs(sum)) break;
    }
    return std::exp(x) * (-kEuler - std::log(x) - sum);
  }
  // Continued fraction (modified Lentz) for e^x E1(x).
  constexpr long double kTiny = 1e-4000L;
  long double b = x + 1.0L;
  long double c = 1.0L / kTiny;
  long double d = 1.0L / b;
  long double h = d;
  for (int i = 1; i < 10000; ++i) {
    const long double an = -static_cast<long double>(i) * i;
    b += 2.0L;
    d = 1.0L / (an * d + b);
    c = b + an / c;
    const long double del = c * d;
    h *= del;
    if (std::fabs(del - 1.0L) <= kEps) break;
  }
  return h;
}

double exponential_integral_ei(double x) {
  if (x == 0.0) throw DomainError("Ei is singular at 0");
  if (!std::isfinite(x)) {
    if (std::isnan(x)) throw DomainError("Ei of NaN");
    return x > 0 ? kInf : 0.0;
  }
  if (x < 0.0) {
    const long double y = -static_cast<long double>(x);
    return static_cast<double>(-std::exp(-y) * scaled_exponential_integral_e1(y));
  }
  constexpr long double kEuler = 0.577215664901532860606512090082402431L;
  constexpr long double kEps = std::numeric_limits<long double>::epsilon();
  const long double lx = x;
  if (x < 40.0) {
    // Ei(x) = gamma + ln x + sum_{k>=1} x^k / (k k!)
    long double term = 1.0L;
    long double sum = 0.0L;
    for (int k = 1; k < 500; ++k) {
      term *= lx / k;
      const long double add = term / k;
      sum += add;
      if (add < kEps * sum) break;
    }
    return static_cast<double>(kEuler + std::log(lx) + sum);
  }
  // Asymptotic: Ei(x) ~ e^x / x * sum_k k! / x^k, truncated at the smallest term.
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 100; ++k) {
    const long double next = term * k / lx;
    if (next > term) break;
    term = next;
    sum += term;
    if (term < kEps * sum) break;
  }
  return static_cast<double>(std::exp(lx) / lx * sum);
}

// ---------------------------------------------------------------------------
// Expected arrival times

namespace {

double expected_exponential_by_quadrature(double a, int n) {
  // X_n = log(1 + a U) / a with U ~ Gamma(n, 1).
  const double log_norm = std::lgamma(static_cast<double>(n));
  auto integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double log_density = (n - 1) * std::log(u) - u - log_norm;
    return std::log1p(a * u) / a * std::exp(log_density);
  };
  const double mode = std::max(0.0, n - 1.0);
  const double spread = std::sqrt(static_cast<double>(n));
  const double lo = std::max(0.0, mode - 12.0 * spread);
  const double hi = mode + 12.0 * spread + 40.0;
  // Gamma(n) mass outside [lo, hi] is below e^-50.
  return numerics::integrate(integrand, lo, mode, 1e-13) + numerics::integrate(integrand, mode, hi, 1e-13);
}

}  // namespace

ExpectedArrival expected_nth_arrival_exponential(double a, int n) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("growth rate a must be positive");
  if (n < 1 || n > kBlocksPerSegment) throw ParameterError("n must lie in 1..2016");

  using Real = long double;
  constexpr Real kEps = std::numeric_limits<Real>::epsilon();
  const Real la = a;
  const Real x = 1.0L / la;
  // e^{1/a} Ei(-1/a) = -e^{x} E1(x)
  const Real scaled_ei = -scaled_exponential_integral_e1(x);

  // partial[j] = sum_{k<j} x^k / k!
  std::vector<Real> partial(static_cast<std::size_t>(n) + 1, 0.0L);
  {
    Real term = 1.0L;
    for (int j = 1; j <= n; ++j) {
      partial[static_cast<std::size_t>(j)] = partial[static_cast<std::size_t>(j - 1)] + term;
      term *= x / j;
    }
  }
  // Sum over i of (-a)^{-i-1} [ e^{1/a}Ei(-1/a)/i! - sum_{j=1}^{i} (-a)^j/(j (i-j)!) P_j ].
  // Terms are accumulated with Neumaier compensation; `magnitude` collects
  // |term| to bound the rounding error of the alternating sum.
  Real sum = 0.0L;
  Real comp = 0.0L;
  Real magnitude = 0.0L;
  Real ei_magnitude = 0.0L;
  auto add = [&](Real v) {
    const Real t = sum + v;
    if (std::fabs(sum) >= std::fabs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
    magnitude += std::fabs(v);
  };
  std::vector<Real> inv_factorial(static_cast<std::size_t>(n) + 1);
  inv_factorial[0] = 1.0L;
  for (int k = 1; k <= n; ++k)
    inv_factorial[static_cast<std::size_t>(k)] = inv_factorial[static_cast<std::size_t>(k - 1)] / k;

  // E[X_n] <= log(1 + a n) / a by Jensen, so once the error bound passes
  // 1e-6 of that the closed form cannot be trusted.
  const Real upper = std::log1p(la * n) / la;
  auto hopeless = [&] {
    return 16.0L * kEps * ei_magnitude + (4.0L + n) * kEps * magnitude > 1e-6L * upper;
  };
  bool abandoned = false;
  // signed_power[k] = (-x)^k, filled as the outer index grows.
  std::vector<Real> signed_power{1.0L};
  for (int i = 0; i < n && !abandoned; ++i) {
    signed_power.push_back(((i + 1) % 2 == 0 ? 1.0L : -1.0L) * std::pow(x, static_cast<Real>(i + 1)));
    // (-a)^{-i-1} = (-x)^{i+1}
    const Real outer = signed_power[static_cast<std::size_t>(i + 1)];
    const Real ei_term = outer * scaled_ei * inv_factorial[static_cast<std::size_t>(i)];
    add(ei_term);
    ei_magnitude += std::fabs(ei_term);
    for (int j = 1; j <= i; ++j) {
      // (-a)^{j-i-1} = (-x)^{i+1-j}
      const Real coeff = signed_power[static_cast<std::size_t>(i + 1 - j)];
      add(-coeff / j * inv_factorial[static_cast<std::size_t>(i - j)] *
          partial[static_cast<std::size_t>(j)]);
    }
    abandoned = hopeless();
  }
  const Real value = sum + comp;
  // E1 via series/continued fraction carries a few ulps; each term a few more.
  const Real abs_error = 16.0L * kEps * ei_magnitude + (4.0L + n) * kEps * magnitude;
  const double bound = value > 0.0L ? static_cast<double>(abs_error / value) : kInf;

  ExpectedArrival out;
  out.relative_error_bound = bound;
  if (!abandoned && bound <= 1e-6 && value > 0.0L) {
    out.value = static_cast<double>(value);
    out.closed_form = true;
    return out;
  }
  out.value = expected_exponential_by_quadrature(a, n);
  out.closed_form = false;
  return out;
}

double expected_nth_arrival_linear(double a, int n) {
  if (!(a > 0.0)) throw ParameterError("slope a must be positive");
  if (n < 1) throw ParameterError("n must be >= 1");
  return std::sqrt(2.0 / a) * std::exp(std::lgamma(n + 0.5) - std::lgamma(static_cast<double>(n)));
}

}  // namespace blockarrival
