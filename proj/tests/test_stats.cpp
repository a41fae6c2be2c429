#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "blockarrival/errors.hpp"
#include "blockarrival/point_process.hpp"
#include "blockarrival/simulator.hpp"
#include "blockarrival/stats.hpp"

using namespace blockarrival;

namespace {

double exp_cdf(double x) { return x <= 0 ? 0.0 : -std::expm1(-x); }

// sup over a fine set of points including both sides of every sample value.
double brute_force_ks(const std::vector<double>& sample, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sample.size());
  double d = 0;
  for (double x : sample) {
    const double below = static_cast<double>(std::count_if(sample.begin(), sample.end(), [&](double y) { return y < x; })) / n;
    const double at = static_cast<double>(std::count_if(sample.begin(), sample.end(), [&](double y) { return y <= x; })) / n;
    d = std::max({d, std::fabs(cdf(x) - below), std::fabs(cdf(x) - at)});
  }
  return d;
}

std::vector<double> exp_sample(std::size_t n, double mean, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.exponential(mean);
  return v;
}

}  // namespace

TEST_CASE("interarrival_summary") {
  const auto s = interarrival_summary({0, 600, 1200});
  CHECK(s.mean == 600);
  CHECK(s.sd == 0);
  CHECK(s.n == 2);
  CHECK(s.blocks_per_hour == 6.0);
  CHECK_THROWS_AS(interarrival_summary({5}), PreconditionError);
  CHECK_THROWS_AS(interarrival_summary({0, 10, 5}), PreconditionError);
  const auto raw = interarrival_summary({0, 10, 5}, true);
  CHECK(raw.mean == 2.5);
}

TEST_CASE("summary matches a two-pass variance") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0, 1e4);
  std::vector<double> v(1000000);
  for (auto& x : v) x = 1e9 + u(gen);
  long double m = 0;
  for (double x : v) m += x;
  m /= v.size();
  long double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = static_cast<double>(std::sqrt(ss / (v.size() - 1)));
  const auto s = gap_summary(v);
  CHECK(s.mean == doctest::Approx(static_cast<double>(m)).epsilon(1e-12));
  CHECK(s.sd == doctest::Approx(sd).epsilon(1e-9));
}

TEST_CASE("position profile") {
  SUBCASE("positions follow heights") {
    std::vector<double> t;
    for (int i = 0; i <= 4032; ++i) t.push_back(i * 10.0 + (i % 2016 == 1 ? 5.0 : 0.0));
    const auto p = position_in_segment_profile(t, 0);
    CHECK(p.counts[0] == 2);  // heights 2016 and 4032
    CHECK(p.counts[1] == 2);  // heights 1 and 2017
    CHECK(p.position_means[1] == doctest::Approx(15.0));
    CHECK(p.position_means[2] == doctest::Approx(5.0));
  }
  SUBCASE("weighted means reproduce the overall mean") {
    Rng rng(3);
    std::vector<double> t{0};
    for (int i = 0; i < 30000; ++i) t.push_back(t.back() + rng.exponential(600));
    const auto p = position_in_segment_profile(t, 777);
    double total = 0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < p.counts.size(); ++k) {
      total += p.position_means[k] * p.counts[k];
      count += p.counts[k];
    }
    CHECK(count == 30000);
    CHECK(total / count == doctest::Approx(interarrival_summary(t).mean).epsilon(1e-9));
    // Direct group-by for position 1: gaps ending at heights divisible by 2016.
    double direct = 0;
    int n = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
      if ((777 + i) % 2016 == 0) {
        direct += t[i] - t[i - 1];
        ++n;
      }
    CHECK(p.position_means[0] == doctest::Approx(direct / n).epsilon(1e-12));
  }
  SUBCASE("homogeneous arrivals give a flat profile") {
    Rng rng(8);
    std::vector<double> t{0};
    for (int i = 0; i < 2016 * 200; ++i) t.push_back(t.back() + rng.exponential(600));
    const auto p = position_in_segment_profile(t, 0);
    // Each position averages 200 gaps: sd 600/sqrt(200) ~ 42. Compare decile means.
    double first = 0, last = 0;
    for (int k = 0; k < 201; ++k) {
      first += p.position_means[k];
      last += p.position_means[2015 - k];
    }
    CHECK(std::fabs(first - last) / 201 < 4 * 600 / std::sqrt(200.0 * 201));
  }
}

TEST_CASE("rapidly growing hash rate gives a decreasing profile") {
  const double a = 2.72e-7;
  const double b = -326;
  const double t0 = 1278979200;
  SimConfig c;
  c.hash_model = ExponentialHash{a, b};
  c.start_time = t0;
  c.initial_difficulty = steady_initial_difficulty(a, b, t0);
  c.n_blocks = 2016 * 60;
  c.seed = 5;
  const SimResult r = simulate(c);
  std::vector<double> t{r.start_time};
  t.insert(t.end(), r.arrival_times.begin(), r.arrival_times.end());
  const auto p = position_in_segment_profile(t, 2015);
  double first = 0, last = 0;
  for (int k = 0; k < 201; ++k) {
    first += p.position_means[k];
    last += p.position_means[2015 - k];
  }
  CHECK(first > last);
}

TEST_CASE("empirical survivor function") {
  const auto s = empirical_survivor({600});
  CHECK(s(599) == 1.0);
  CHECK(s(600) == 0.0);
  const auto v = exp_sample(100000, 600, 4);
  const auto e = empirical_survivor(v);
  CHECK(e(-1) == 1.0);
  CHECK(e(*std::max_element(v.begin(), v.end())) == 0.0);
  // -log S(x) against x / mean has unit slope.
  double sxy = 0, sxx = 0;
  for (double x = 100; x <= 2400; x += 100) {
    const double y = -std::log(e(x));
    sxy += (x / 600) * y;
    sxx += (x / 600) * (x / 600);
  }
  CHECK(sxy / sxx == doctest::Approx(1.0).epsilon(0.05));
  const auto steps = e.steps();
  CHECK(steps.back().second == 0.0);
  CHECK_THROWS_AS(empirical_survivor({}), PreconditionError);
}

TEST_CASE("tail_resample") {
  auto v = exp_sample(5000, 600, 9);
  CHECK(tail_resample(v, INFINITY, 1) == v);
  const auto r = tail_resample(v, 1500, 2);
  REQUIRE(r.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 1500)
      CHECK(r[i] > 1500);
    else
      CHECK(r[i] == v[i]);
  }
  CHECK_THROWS_AS(tail_resample(v, 0, 1), ParameterError);
}

TEST_CASE("tail resampling brings a contaminated sample closer to exponential") {
  auto v = exp_sample(20000, 600, 10);
  Rng rng(11);
  // Inflate 2% of the gaps beyond the threshold by a large factor.
  for (auto& x : v)
    if (x > 2000 && rng.uniform() < 0.6) x *= 8;
  const double before = exponential_ks_statistic(v);
  const double after = exponential_ks_statistic(tail_resample(v, 2000, 12));
  CHECK(after <= before);
}

TEST_CASE("ks_statistic") {
  const std::size_t n = 50;
  std::vector<double> q;
  for (std::size_t i = 1; i <= n; ++i) q.push_back(-std::log1p(-(i - 0.5) / n));
  CHECK(ks_statistic(q, exp_cdf) == doctest::Approx(1.0 / (2 * n)).epsilon(1e-12));
  CHECK(ks_statistic({0.0}, exp_cdf) == 1.0);
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(1 + gen() % 40);
    for (auto& x : s) x = static_cast<double>(gen() % 1000) / 300.0;
    CHECK(std::fabs(ks_statistic(s, exp_cdf) - brute_force_ks(s, exp_cdf)) < 1e-12);
  }
  // Invariance under a monotone relabeling of sample and cdf argument.
  const auto s = exp_sample(300, 1, 15);
  std::vector<double> cubed;
  for (double x : s) cubed.push_back(x * x * x);
  CHECK(ks_statistic(cubed, [](double y) { return exp_cdf(std::cbrt(y)); }) ==
        doctest::Approx(ks_statistic(s, exp_cdf)).epsilon(1e-12));
}

TEST_CASE("lilliefors test") {
  const auto report = lilliefors_exponential(exp_sample(300, 600, 16), 999, 17);
  CHECK(report.n_mc == 999);
  CHECK(report.seed == 17);
  CHECK(report.p_value > 0.0);
  CHECK(report.p_value <= 1.0);
  CHECK(report.decision_at.size() == 3);
  CHECK(std::fmod(report.p_value * 1000, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(lilliefors_exponential({1, 2, 3, 4}, 999, 1), PreconditionError);
  CHECK_THROWS_AS(lilliefors_exponential(exp_sample(10, 1, 1), 998, 1), ParameterError);
  CHECK_THROWS_AS(lilliefors_exponential({5, 5, 5, 5, 5, 5}, 999, 1), DomainError);
}

TEST_CASE("lilliefors rejects a strongly trended NHPP") {
  const auto s = sample_nhpp(RateFunction::exponential(0.001, 0), 0, StopRule::after_count(5001), 18);
  std::vector<double> gaps;
  for (std::size_t i = 1; i < s.times.size(); ++i) gaps.push_back(s.times[i] - s.times[i - 1]);
  const auto r = lilliefors_exponential(gaps, 999, 19);
  CHECK(r.p_value < 0.01);
  CHECK(r.below_resolution);
}

TEST_CASE("lilliefors null p-values are close to uniform") {
  const LillieforsNull null(100, 1999, 20);
  std::vector<double> p;
  for (int trial = 0; trial < 2000; ++trial)
    p.push_back(null.test(exp_sample(100, 3.0, 1000 + trial)).p_value);
  const double d = ks_statistic(p, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d < 0.05);
}

TEST_CASE("ks_pvalue") {
  CHECK(ks_pvalue(0.0, 100) == 1.0);
  CHECK(ks_pvalue(0.5, 100) < 1e-10);
  // Critical value 1.358 / sqrt(n) at 5%.
  CHECK(ks_pvalue(1.358 / (std::sqrt(1000.0) + 0.12 + 0.11 / std::sqrt(1000.0)), 1000) == doctest::Approx(0.05).epsilon(0.01));
}
