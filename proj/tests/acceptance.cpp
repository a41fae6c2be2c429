// Acceptance checks. One PASS/FAIL/SKIP line per criterion; exit status 1 if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "blockarrival/chain_data.hpp"
#include "blockarrival/cli.hpp"
#include "blockarrival/difficulty.hpp"
#include "blockarrival/hashrate.hpp"
#include "blockarrival/point_process.hpp"
#include "blockarrival/simulator.hpp"
#include "blockarrival/stats.hpp"
#include "support.hpp"

using namespace blockarrival;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

// Principal-branch W by bisection on w e^w = x, independent of the library solver.
double lambert_w_bisect(double x) {
  double lo = 0, hi = std::max(1.0, std::log(x + 1) + 1);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::exp(mid) < x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Outcome steady_state_law() {
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const double a = 1e-3 * std::pow(1e4, i / 49.0);
    const double delta = solve_fixed_point(PerFortnight(a), Fortnights(1.0)).value();
    worst = std::max(worst, std::fabs(delta - lambert_w_bisect(a) / a));
  }
  return verdict(worst < 1e-9, "max |delta* - W(a)/a| = " + fmt("%.2e", worst) + " over 50 values");
}

Outcome long_run_mean() {
  // a = 0 and the five growing rates of the reference intervals.
  const std::vector<double> rates = {0.0, 2.01e-8, 3.88e-8, 1.96e-7, 2.18e-7, 2.72e-7};
  const double b = std::log(1e12);
  double worst = 0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    SimConfig c;
    c.hash_model = ExponentialHash{rates[i], b};
    c.initial_difficulty = steady_initial_difficulty(rates[i], b, 0.0);
    c.n_blocks = 40000;
    c.seed = derive_seed(12, i);
    const double mean = gap_summary(simulate(c).interarrivals()).mean;
    const double steady = steady_block_time(PerSecond(rates[i])).value();
    worst = std::max(worst, std::fabs(mean / steady - 1));
  }
  return verdict(worst < 0.01, "max relative deviation from steady block time " + fmt("%.3f%%", 100 * worst));
}

Outcome table2_simulated() {
  // Reference simulated mean and s.d. for intervals 2..6.
  const double mean_ref[] = {491.6, 462.6, 589.2, 493.8, 576.9};
  const double sd_ref[] = {493.7, 465.6, 589.7, 494.7, 578.0};
  double worst = 0;
  std::string cells;
  for (const auto& iv : cli::reference_intervals()) {
    if (iv.index < 2) continue;
    const auto k = static_cast<std::size_t>(iv.index - 2);
    const ReplicateSummary r = replicate(cli::interval_config(iv), 100, derive_seed(2, iv.index));
    worst = std::max({worst, std::fabs(r.mean / mean_ref[k] - 1), std::fabs(r.sd / sd_ref[k] - 1)});
    cells += " " + std::to_string(iv.index) + ":" + fmt("%.1f", r.mean) + "/" + fmt("%.1f", r.sd);
  }
  return verdict(worst < 0.02, "mean/sd" + cells + ", max deviation " + fmt("%.2f%%", 100 * worst));
}

// E[X_n] by quadrature of t times the n-th arrival density for λ(t) = e^{at}.
double expected_by_density(double a, int n) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double t) {
    const double L = std::expm1(a * t) / a;
    if (!(L < 1e300)) return 0.0;
    return t * std::exp(a * t + (n - 1) * std::log(L) - L - std::lgamma(n));
  };
  return integrator.integrate(f, 1e-14);
}

Outcome expected_arrival() {
  double worst_quad = 0;
  for (double a : {0.01, 0.1, 1.0})
    for (int n = 1; n <= 50; ++n) {
      const double v = expected_nth_arrival_exponential(a, n).value;
      worst_quad = std::max(worst_quad, std::fabs(v / expected_by_density(a, n) - 1));
    }
  double worst_sigma = 0;
  std::mt19937_64 gen(44);
  for (double a : {0.01, 0.1, 1.0})
    for (int n : {1, 10, 50}) {
      std::gamma_distribution<double> gamma(n, 1.0);
      const int reps = 1000000;
      double sum = 0, sq = 0;
      for (int i = 0; i < reps; ++i) {
        const double x = std::log1p(a * gamma(gen)) / a;
        sum += x;
        sq += x * x;
      }
      const double mean = sum / reps;
      const double se = std::sqrt((sq / reps - mean * mean) / reps);
      worst_sigma = std::max(worst_sigma, std::fabs(mean - expected_nth_arrival_exponential(a, n).value) / se);
    }
  // E[X_n] = n - a n(n+1)/2 + O(a^2), so the limit is checked where the first
  // correction is below the tolerance.
  double worst_limit = 0;
  for (int n = 1; n <= 20; ++n)
    worst_limit = std::max(worst_limit, std::fabs(expected_nth_arrival_exponential(1e-6, n).value - n));
  return verdict(worst_quad < 1e-6 && worst_sigma < 3 && worst_limit < 1e-3,
                 "quadrature rel " + fmt("%.1e", worst_quad) + ", MC " + fmt("%.2f", worst_sigma) +
                     " sigma, |E - n| at a=1e-6 " + fmt("%.1e", worst_limit));
}

Outcome cleaning() {
  const Chain fig = testing_support::chain_from_times({10, 20, 70, 80, 30, 40, 50, 60});
  const auto flags = flag_unreliable(fig, CleaningStrategy::resample_lis_intersection);
  const bool pattern = flags == std::set<std::uint64_t>{2, 3};
  std::mt19937_64 gen(55);
  int mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + gen() % 10;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
    std::shuffle(v.begin(), v.end(), gen);
    if (lis_intersection(v) != testing_support::brute_force_lis_intersection(v)) ++mismatches;
  }
  return verdict(pattern && mismatches == 0, std::string("displaced pattern ") + (pattern ? "{2,3}" : "wrong") +
                                                 ", " + std::to_string(mismatches) + " mismatches in 10000 permutations");
}

Outcome delay_sweep() {
  const auto& iv = cli::reference_intervals()[5];
  std::vector<double> sds;
  double mean0 = 0, mean10 = 0;
  std::string cells;
  for (int m = 0; m <= 30; m += 5) {
    SimConfig c = cli::interval_config(iv);
    c.delay = m == 0 ? DelayModel::none() : DelayModel::exp_ramp_from_median(m);
    const ReplicateSummary r = replicate(c, 100, derive_seed(66, static_cast<std::uint64_t>(m)));
    sds.push_back(r.sd);
    if (m == 0) mean0 = r.mean;
    if (m == 10) mean10 = r.mean;
    cells += " " + std::to_string(m) + "s:" + fmt("%.1f", r.sd);
  }
  const bool monotone = std::is_sorted(sds.rbegin(), sds.rend()) &&
                        std::adjacent_find(sds.begin(), sds.end()) == sds.end();
  const double shift = std::fabs(mean10 / mean0 - 1);
  return verdict(monotone && shift <= 0.02,
                 "sd by median" + cells + "; mean shift at 10 s " + fmt("%.2f%%", 100 * shift));
}

std::vector<double> exponential_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.exponential(600);
  return v;
}

Outcome lilliefors_calibration() {
  const std::size_t n = 500;
  const LillieforsNull null(n, 9999, 77);
  int rejections = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t)
    if (null.test(exponential_sample(n, derive_seed(78, t))).p_value <= 0.05) ++rejections;
  const double size = static_cast<double>(rejections) / trials;
  const auto trend = sample_nhpp(RateFunction::exponential(0.01, 0), 0, StopRule::after_count(n), 79);
  std::vector<double> gaps;
  double prev = 0;
  for (double t : trend.times) {
    gaps.push_back(t - prev);
    prev = t;
  }
  const double p = null.test(gaps).p_value;
  return verdict(size >= 0.04 && size <= 0.06 && p < 0.01,
                 "size " + fmt("%.4f", size) + " at alpha 0.05, trended NHPP p = " + fmt("%.4g", p));
}

Outcome real_data() {
  const char* dir = std::getenv(cli::kDataDirEnv);
  if (!dir) return {Status::skip, std::string(cli::kDataDirEnv) + " not set; raw.csv dataset absent"};
  const auto path = std::filesystem::path(dir) / "raw.csv";
  if (!std::filesystem::exists(path)) return {Status::skip, path.string() + " absent"};
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const Chain raw = parse_chain(buf.str());

  std::vector<std::string> failures;
  const auto negative = scan_negative_interarrivals(raw);
  const auto early = std::count_if(negative.begin(), negative.end(), [](std::uint64_t h) { return h < 500000; });
  if (early != 13618) failures.push_back("negative gaps " + std::to_string(early));

  const auto [lr, report] = clean_lr(raw, kDefaultCutoff, 1);
  const double reliable = 1.0 - static_cast<double>(report.unreliable_heights.size()) / lr.size();
  if (std::fabs(reliable - 441225.0 / 464372.0) > 0.005) failures.push_back("reliable fraction " + fmt("%.4f", reliable));

  const HashRateSeries series = sliding_window(lr, 144);
  const auto& iv3 = cli::reference_intervals()[2];
  const ExpFit fit = fit_exponential(series, iv3.start, iv3.end);
  if (std::fabs(fit.a / 2.72e-7 - 1) > 0.05) failures.push_back("interval 3 a " + fmt("%.3e", fit.a));

  const double obs_mean[] = {491.8, 459.1, 586.9, 503.2, 575.7};
  const double obs_sd[] = {503.3, 477.6, 578.1, 494.7, 567.3};
  for (const auto& iv : cli::reference_intervals()) {
    if (iv.index < 2) continue;
    const auto k = static_cast<std::size_t>(iv.index - 2);
    const auto s = interarrival_summary(cli::window_times(lr, iv.start, iv.end));
    if (std::fabs(s.mean - obs_mean[k]) > 0.05 || std::fabs(s.sd - obs_sd[k]) > 0.05)
      failures.push_back("interval " + std::to_string(iv.index) + " observed " + fmt("%.1f", s.mean) + "/" +
                         fmt("%.1f", s.sd));
  }

  const auto gaps = interarrivals(cli::window_times(lr, iv3.start, iv3.end));
  const TestReport lf = lilliefors_exponential(gaps, 999, 8);
  if (!lf.below_resolution) failures.push_back("Lilliefors p " + fmt("%.4f", lf.p_value));

  std::string detail = failures.empty() ? "all real-data checks match" : "";
  for (const auto& f : failures) detail += (detail.empty() ? "" : "; ") + f;
  return verdict(failures.empty(), detail);
}

double ks_exp1_pvalue(const std::vector<double>& residuals) {
  const double d = ks_statistic(residuals, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); });
  return ks_pvalue(d, residuals.size());
}

Outcome sampler_correctness() {
  const std::size_t n = 5000;
  struct Kind {
    const char* name;
    RateFunction rate;
  };
  // Hash rate around 2^32 / 600 per second, so difficulty 1 means ~600 s blocks.
  const double unit = 4294967296.0 / 600;
  const HashRateSeries series({0, 2e5, 5e5, 9e5, 1.4e6, 4e6},
                              {1.0 * unit, 3.0 * unit, 2.0 * unit, 2.0 * unit, 4.5 * unit, 1.5 * unit});
  const std::vector<Kind> kinds = {
      {"constant", RateFunction::constant(1.0 / 600)},
      {"exponential", RateFunction::exponential(2e-6, std::log(1.0 / 600))},
      {"empirical", RateFunction::empirical(series, DifficultyStep({0, 7e5}, {1.0, 1.5}))},
  };
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const auto s = sample_nhpp(kinds[i].rate, 0, StopRule::after_count(n), derive_seed(99, i));
    const double p = ks_exp1_pvalue(time_rescaled_gaps(kinds[i].rate, 0, s.times));
    ok = ok && p >= 0.01;
    detail += std::string(kinds[i].name) + " p=" + fmt("%.3f", p) + ", ";
  }
  // Delayed: the gaps are not exponential at the mean-field rate.
  const double lambda = 1.0 / 600;
  const DelayModel delay = DelayModel::exp_ramp_from_median(60);
  const RateFunction delayed = RateFunction::delayed(RateFunction::constant(lambda), delay, 0);
  const auto s = sample_nhpp(delayed, 0, StopRule::after_count(n), derive_seed(99, 9));
  const double field = mean_field_rate(lambda, delay);
  const double p_delayed = ks_exp1_pvalue(time_rescaled_gaps(RateFunction::constant(field), 0, s.times));
  ok = ok && p_delayed < 0.01;
  detail += "delayed p=" + fmt("%.2e", p_delayed);
  return verdict(ok, detail);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, steady_state_law},  {2, long_run_mean},          {3, table2_simulated},
      {4, expected_arrival},  {5, cleaning},               {6, delay_sweep},
      {7, lilliefors_calibration}, {8, real_data},         {9, sampler_correctness},
  };
  // Runtime limits in seconds.
  const double limits[] = {1, 60, 600, 600, 30, 600, 600, 3600, 600};
  bool failed = false;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double limit = limits[c.id - 1];
    if (o.status == Status::pass && secs > limit) o = {Status::fail, o.detail + "; over " + fmt("%.0f", limit) + " s"};
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    std::printf("%s criterion %d: %s (%.2f s)\n", tag, c.id, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed = failed || o.status == Status::fail;
  }
  return failed ? 1 : 0;
}
