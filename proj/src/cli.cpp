#include "blockarrival/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "blockarrival/chain_data.hpp"
#include "blockarrival/difficulty.hpp"
#include "blockarrival/hashrate.hpp"
#include "blockarrival/point_process.hpp"
#include "blockarrival/stats.hpp"

namespace blockarrival::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

constexpr int kFig12Blocks = 40000;
constexpr int kSimulationBlocksFloor = 40000;

std::string fixed(double x, int precision) {
  if (std::isnan(x)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("error writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

// Everything one command needs to echo its invocation into outputs.
struct Context {
  std::vector<std::string> argv;
  std::ostream& out;

  std::string argv_line() const {
    std::string s;
    for (const auto& a : argv) {
      if (!s.empty()) s += ' ';
      s += a;
    }
    return s;
  }
  std::string csv_header() const { return "# argv: " + argv_line() + "\n"; }
  json invocation() const { return argv; }
  void summary(json j) const { out << j.dump() << "\n"; }
};

Chain load_chain(const std::string& path) { return parse_chain(read_file(path)); }

// Series CSV: t,value with '#' comments and an optional header line.
HashRateSeries load_series(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> t;
  std::vector<double> v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(line_no, "expected two columns");
    try {
      t.push_back(std::stod(line.substr(0, comma)));
      v.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      if (t.empty() && line_no <= 2) continue;  // header
      throw ParseError(line_no, "non-numeric value");
    }
  }
  return HashRateSeries(std::move(t), std::move(v));
}

std::string series_csv(const Context& ctx, const std::vector<double>& t, const std::vector<double>& v) {
  std::string s = ctx.csv_header() + "t,value\n";
  for (std::size_t i = 0; i < t.size(); ++i) s += fixed(t[i], 3) + "," + fixed(v[i], 3) + "\n";
  return s;
}

std::string resolve_data(const std::string& given) {
  if (!given.empty()) return given;
  if (const char* dir = std::getenv(kDataDirEnv)) {
    const fs::path p = fs::path(dir) / "lr.csv";
    if (fs::exists(p)) return p.string();
  }
  return {};
}

std::size_t interval_blocks(const ReferenceInterval& iv) {
  const double steady = steady_block_time(PerSecond(iv.a)).value();
  const auto n = static_cast<std::size_t>(std::llround((iv.end - iv.start) / steady));
  return std::max<std::size_t>(n, kSimulationBlocksFloor);
}

const ReferenceInterval& interval_by_index(int index) {
  for (const auto& iv : reference_intervals())
    if (iv.index == index) return iv;
  throw UsageError("no reference interval " + std::to_string(index));
}


// ---------------------------------------------------------------------------
// clean

struct CleanArgs {
  std::string in, out, report, strategy = "lis";
  std::optional<std::uint64_t> seed;
  double cutoff = kDefaultCutoff;
  bool no_cutoff = false;
};

void cmd_clean(const Context& ctx, const CleanArgs& a) {
  if (!a.seed) throw UsageError("clean requires --seed");
  const Chain chain = load_chain(a.in);
  const CleaningStrategy strategy = parse_strategy(a.strategy);
  std::pair<Chain, CleaningReport> result = [&] {
    if (strategy == CleaningStrategy::resample_lis_intersection && !a.no_cutoff)
      return clean_lr(chain, a.cutoff, *a.seed);
    return clean(chain, strategy, *a.seed);
  }();
  const auto& [cleaned, report] = result;

  json rep;
  rep["invocation"] = ctx.invocation();
  rep["strategy"] = std::string(to_string(report.strategy));
  rep["seed"] = report.rng_seed;
  rep["rng"] = report.rng_algorithm;
  rep["cutoff"] = a.no_cutoff || strategy != CleaningStrategy::resample_lis_intersection
                      ? json(nullptr)
                      : json(a.cutoff);
  rep["unreliable"] = report.unreliable_heights;
  json resampled = json::object();
  for (const auto& [h, t] : report.resampled_values) resampled[std::to_string(h)] = fixed(t, 3);
  rep["resampled"] = resampled;

  const std::string report_path = a.report.empty() ? a.out + ".report.json" : a.report;
  write_atomic(a.out, ctx.csv_header() + format_chain_csv(cleaned));
  write_atomic(report_path, rep.dump(2) + "\n");
  ctx.summary({{"command", "clean"},
               {"records", cleaned.size()},
               {"unreliable", report.unreliable_heights.size()},
               {"out", a.out},
               {"report", report_path}});
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
  std::string in, out, kernel;
  std::optional<int> k;
  std::optional<double> h;
  double step = 3600.0;
  std::optional<double> delay_c;
  bool segment = false;
};

void cmd_estimate(const Context& ctx, const EstimateArgs& a) {
  const int modes = (a.k ? 1 : 0) + (a.kernel.empty() ? 0 : 1) + (a.segment ? 1 : 0);
  if (modes != 1) throw UsageError("estimate needs exactly one of --k, --kernel, --segment");
  const Chain chain = load_chain(a.in);
  std::vector<double> t;
  std::vector<double> v;
  std::string method;
  if (a.k) {
    const HashRateSeries s = a.delay_c ? delay_corrected_fit(chain, *a.delay_c, *a.k)
                                       : sliding_window(chain, *a.k);
    t = s.times();
    v = s.values();
    method = a.delay_c ? "sliding_window_delay_corrected" : "sliding_window";
  } else if (a.segment) {
    if (a.delay_c) throw UsageError("--delay-c applies to --k only");
    for (const auto& e : segment_hashrate(chain)) {
      t.push_back(0.5 * (e.start_time + e.end_time));
      v.push_back(e.hashrate);
    }
    method = "segment";
  } else {
    if (!a.h) throw UsageError("--kernel needs --h");
    if (a.delay_c) throw UsageError("--delay-c applies to --k only");
    if (!(a.step > 0.0)) throw UsageError("--step must be positive");
    const KernelEstimator est(chain, parse_kernel(a.kernel), *a.h);
    const double lo = chain.front().timestamp;
    const double hi = chain.back().timestamp;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / a.step));
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = lo + static_cast<double>(i) * a.step;
      t.push_back(x);
      v.push_back(est(x));
    }
    method = "kernel_" + a.kernel;
  }
  write_atomic(a.out, series_csv(ctx, t, v));
  ctx.summary({{"command", "estimate"}, {"method", method}, {"points", t.size()}, {"out", a.out}});
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string in, intervals, out;
  int k = 144;
  std::optional<double> delay_c;
};

// Accepts either a list of boundaries [t0, t1, ...] or [{"start":..,"end":..}, ...].
std::vector<std::pair<double, double>> parse_intervals(const json& j) {
  if (!j.is_array() || j.empty()) throw ParameterError("intervals must be a non-empty array");
  std::vector<std::pair<double, double>> out;
  if (j.front().is_number()) {
    if (j.size() < 2) throw ParameterError("need at least two boundaries");
    for (std::size_t i = 1; i < j.size(); ++i) out.emplace_back(j[i - 1].get<double>(), j[i].get<double>());
  } else {
    for (const auto& e : j) out.emplace_back(e.at("start").get<double>(), e.at("end").get<double>());
  }
  for (const auto& [s, e] : out)
    if (!(e > s)) throw ParameterError("interval end must follow its start");
  return out;
}

void cmd_fit(const Context& ctx, const FitArgs& a) {
  const Chain chain = load_chain(a.in);
  json bounds;
  try {
    bounds = json::parse(read_file(a.intervals));
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("intervals JSON: ") + e.what());
  }
  const auto intervals = parse_intervals(bounds);
  const HashRateSeries series = a.delay_c ? delay_corrected_fit(chain, *a.delay_c, a.k)
                                          : sliding_window(chain, a.k);
  json fits = json::array();
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const ExpFit f = fit_exponential(series, intervals[i].first, intervals[i].second);
    fits.push_back({{"interval", i + 1},
                    {"start", f.start},
                    {"end", f.end},
                    {"a", f.a},
                    {"b", f.b},
                    {"samples", f.samples}});
  }
  json doc = {{"invocation", ctx.invocation()}, {"k", a.k}, {"fits", fits}};
  if (a.delay_c) doc["delay_c"] = *a.delay_c;
  if (!a.out.empty()) write_atomic(a.out, doc.dump(2) + "\n");
  ctx.summary({{"command", "fit"}, {"fits", fits}});
}

// ---------------------------------------------------------------------------
// predict

void cmd_predict(const Context& ctx, double a) {
  if (!(a >= 0.0)) throw UsageError("--a must be >= 0");
  const SteadyState s = steady_state(PerSecond(a));
  ctx.summary({{"a_per_s", a},
               {"delta_star_fortnights", s.delta_star.value()},
               {"segment_time_s", s.segment_time.value()},
               {"block_time_s", s.block_time.value()}});
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::size_t reps = 1;
};

void cmd_simulate(const Context& ctx, const SimulateArgs& a) {
  json j;
  try {
    j = json::parse(read_file(a.config));
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("config JSON: ") + e.what());
  }
  if (a.seed) j["seed"] = *a.seed;
  if (!j.contains("seed")) throw UsageError("simulate requires a seed (--seed or config \"seed\")");
  const SimConfig config = config_from_json(j, fs::path(a.config).parent_path().string());

  json summary = {{"command", "simulate"}};
  if (a.reps > 1) {
    const ReplicateSummary r = replicate(config, a.reps, config.seed);
    summary["reps"] = a.reps;
    summary["mean_s"] = r.mean;
    summary["sd_s"] = r.sd;
    summary["ci95"] = r.mean_ci95;
    summary["sd_ci95"] = r.sd_ci95;
    std::size_t n = 0;
    bool partial = false;
    for (const auto& rep : r.reps) {
      n += rep.n;
      partial = partial || rep.partial;
    }
    summary["n"] = n;
    summary["partial"] = partial;
    if (!a.out.empty()) {
      std::string csv = ctx.csv_header() + "rep,seed,mean_s,sd_s,n\n";
      for (std::size_t i = 0; i < r.reps.size(); ++i)
        csv += std::to_string(i) + "," + std::to_string(r.reps[i].seed) + "," + fixed(r.reps[i].mean, 3) +
               "," + fixed(r.reps[i].sd, 3) + "," + std::to_string(r.reps[i].n) + "\n";
      write_atomic(a.out, csv);
    }
  } else {
    const SimResult res = simulate(config);
    const auto gaps = res.interarrivals();
    if (gaps.empty()) throw NumericError("simulation produced no arrivals");
    const InterarrivalSummary s = gap_summary(gaps);
    summary["mean_s"] = s.mean;
    summary["sd_s"] = s.sd;
    summary["n"] = s.n;
    summary["ci95"] = s.n > 1 ? 1.96 * s.sd / std::sqrt(static_cast<double>(s.n)) : 0.0;
    summary["partial"] = res.partial;
    if (!a.out.empty()) {
      std::string csv = ctx.csv_header();
      csv += "# config: " + config_to_json(config).dump() + "\n";
      csv += "index,time\n";
      for (std::size_t i = 0; i < res.arrival_times.size(); ++i)
        csv += std::to_string(i + 1) + "," + fixed(res.arrival_times[i], 3) + "\n";
      write_atomic(a.out, csv);
    }
  }
  if (!a.out.empty()) summary["out"] = a.out;
  ctx.summary(summary);
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string what, in, out;
  bool raw = false;
  std::optional<std::uint64_t> seed;
  std::size_t n_mc = kDefaultMonteCarlo;
  std::optional<double> start, end;
  std::optional<double> tail_threshold;
};

void cmd_analyze(const Context& ctx, const AnalyzeArgs& a) {
  const Chain chain = load_chain(a.in);
  std::vector<double> times;
  std::uint64_t first_height = 0;
  bool have_first = false;
  for (const auto& r : chain.records()) {
    if (a.start && r.timestamp < *a.start) continue;
    if (a.end && r.timestamp >= *a.end) continue;
    if (!have_first) {
      first_height = r.height;
      have_first = true;
    }
    times.push_back(r.timestamp);
  }
  if (times.size() < 2) throw PreconditionError("fewer than two blocks in the selected window");
  const InterarrivalSummary summary = interarrival_summary(times, a.raw);
  json out = {{"command", "analyze"},
              {"analysis", a.what},
              {"n", summary.n},
              {"mean_s", summary.mean},
              {"sd_s", summary.sd},
              {"blocks_per_hour", summary.blocks_per_hour}};

  if (a.what == "lilliefors") {
    if (!a.seed) throw UsageError("analyze lilliefors requires --seed");
    std::vector<double> gaps = interarrivals(times);
    if (a.tail_threshold) gaps = tail_resample(gaps, *a.tail_threshold, derive_seed(*a.seed, 1));
    const TestReport r = lilliefors_exponential(gaps, a.n_mc, *a.seed);
    json decisions = json::array();
    for (const auto& d : r.decision_at) decisions.push_back({{"alpha", d.alpha}, {"reject", d.reject}});
    json rep = {{"invocation", ctx.invocation()},
                {"statistic", r.statistic},
                {"p_value", r.p_value},
                {"p_value_text", r.below_resolution ? "< " + fixed(r.p_value, 6) : fixed(r.p_value, 6)},
                {"method", r.method},
                {"n_mc", r.n_mc},
                {"seed", r.seed},
                {"decision_at", decisions}};
    if (a.tail_threshold) rep["tail_threshold"] = *a.tail_threshold;
    if (!a.out.empty()) write_atomic(a.out, rep.dump(2) + "\n");
    out["statistic"] = r.statistic;
    out["p_value"] = r.p_value;
    out["below_resolution"] = r.below_resolution;
  } else if (a.what == "profile") {
    const SegmentProfile p = position_in_segment_profile(times, first_height);
    std::string csv = ctx.csv_header() + "position,mean,count\n";
    for (std::size_t k = 0; k < p.counts.size(); ++k)
      csv += std::to_string(k + 1) + "," + fixed(p.position_means[k], 3) + "," +
             std::to_string(p.counts[k]) + "\n";
    if (a.out.empty()) throw UsageError("analyze profile requires --out");
    write_atomic(a.out, csv);
    out["out"] = a.out;
  } else if (a.what == "survivor") {
    std::vector<double> gaps = interarrivals(times);
    if (a.tail_threshold) {
      if (!a.seed) throw UsageError("--tail-threshold requires --seed");
      gaps = tail_resample(gaps, *a.tail_threshold, *a.seed);
    }
    const SurvivorFunction s(gaps);
    std::string csv = ctx.csv_header() + "x,S\n";
    for (const auto& [x, v] : s.steps()) csv += fixed(x, 3) + "," + fixed(v, 9) + "\n";
    if (a.out.empty()) throw UsageError("analyze survivor requires --out");
    write_atomic(a.out, csv);
    out["out"] = a.out;
  } else {
    throw UsageError("unknown analysis '" + a.what + "' (lilliefors|profile|survivor)");
  }
  ctx.summary(out);
}

// ---------------------------------------------------------------------------
// sample, expect

struct SampleArgs {
  std::string rate = "constant", out;
  double a = 1.0 / 600;
  double b = 0.0;
  double t0 = 0.0;
  std::optional<std::size_t> count;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
};

RateFunction parse_rate(const std::string& kind, double a, double b) {
  if (kind == "constant") return RateFunction::constant(a);
  if (kind == "linear") return RateFunction::linear(a);
  if (kind == "exponential") return RateFunction::exponential(a, b);
  throw UsageError("unknown rate '" + kind + "' (constant|linear|exponential)");
}

void cmd_sample(const Context& ctx, const SampleArgs& a) {
  if (!a.seed) throw UsageError("sample requires --seed");
  if (!a.count && !a.horizon) throw UsageError("sample needs --count or --horizon");
  const RateFunction rate = parse_rate(a.rate, a.a, a.b);
  const ArrivalSample s = sample_nhpp(rate, a.t0, StopRule{a.count, a.horizon}, *a.seed);
  std::string csv = ctx.csv_header() + "index,time\n";
  for (std::size_t i = 0; i < s.times.size(); ++i)
    csv += std::to_string(i + 1) + "," + fixed(s.times[i], 6) + "\n";
  json summary = {{"command", "sample"}, {"rate", a.rate}, {"n", s.times.size()}};
  if (!a.out.empty()) {
    write_atomic(a.out, csv);
    summary["out"] = a.out;
  }
  ctx.summary(summary);
}

struct ExpectArgs {
  std::string rate = "exponential", out;
  double a = 0.0;
  int n = 1;
};

void cmd_expect(const Context& ctx, const ExpectArgs& a) {
  if (a.rate != "exponential" && a.rate != "linear")
    throw UsageError("expect supports --rate exponential|linear");
  std::string csv = ctx.csv_header() + "n,expected,closed_form,relative_error_bound\n";
  double last = 0.0;
  for (int k = 1; k <= a.n; ++k) {
    if (a.rate == "linear") {
      last = expected_nth_arrival_linear(a.a, k);
      csv += std::to_string(k) + "," + fixed(last, 9) + ",1,0\n";
    } else {
      const ExpectedArrival e = expected_nth_arrival_exponential(a.a, k);
      last = e.value;
      csv += std::to_string(k) + "," + fixed(e.value, 9) + "," + (e.closed_form ? "1" : "0") + "," +
             fixed(e.relative_error_bound, 12) + "\n";
    }
  }
  json summary = {{"command", "expect"}, {"rate", a.rate}, {"a", a.a}, {"n", a.n}, {"expected", last}};
  if (!a.out.empty()) {
    write_atomic(a.out, csv);
    summary["out"] = a.out;
  }
  ctx.summary(summary);
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceArgs {
  std::string recipe, data, out;
  std::optional<std::uint64_t> seed;
  std::size_t reps = 100;
  int interval = 6;
  std::vector<double> medians;
  std::string mode = "random";
};

std::string recipe_table1(const Context& ctx, const Chain& chain) {
  const HashRateSeries series = sliding_window(chain, 144);
  std::string csv = ctx.csv_header() + "interval,start,end,a_per_s,b\n";
  for (const auto& iv : reference_intervals()) {
    const ExpFit f = fit_exponential(series, iv.start, iv.end);
    csv += std::to_string(iv.index) + "," + fixed(iv.start, 0) + "," + fixed(iv.end, 0) + "," +
           fixed(f.a, 15) + "," + fixed(f.b, 6) + "\n";
  }
  return csv;
}

std::string recipe_table2(const Context& ctx, const ReproduceArgs& a, const Chain* chain) {
  std::optional<HashRateSeries> series;
  if (chain) series = sliding_window(*chain, 144);
  std::vector<std::string> obs_mean, sim_mean, obs_sd, sim_sd, header;
  for (const auto& ref : reference_intervals()) {
    if (ref.index < 2) continue;
    ReferenceInterval iv = ref;
    if (series) {
      const ExpFit f = fit_exponential(*series, iv.start, iv.end);
      iv.a = f.a;
      iv.b = f.b;
      const auto times = window_times(*chain, iv.start, iv.end);
      const InterarrivalSummary s = interarrival_summary(times);
      obs_mean.push_back(fixed(s.mean, 1));
      obs_sd.push_back(fixed(s.sd, 1));
    } else {
      obs_mean.push_back("NA");
      obs_sd.push_back("NA");
    }
    const ReplicateSummary r = replicate(interval_config(iv), a.reps, derive_seed(*a.seed, iv.index));
    sim_mean.push_back(fixed(r.mean, 1));
    sim_sd.push_back(fixed(r.sd, 1));
    header.push_back(std::to_string(iv.index));
  }
  auto row = [](const std::string& name, const std::vector<std::string>& cells) {
    std::string s = name;
    for (const auto& c : cells) s += "," + c;
    return s + "\n";
  };
  return ctx.csv_header() + row("interval", header) + row("Observed mean", obs_mean) +
         row("Simulated mean", sim_mean) + row("Observed s.d.", obs_sd) + row("Simulated s.d.", sim_sd);
}

std::string recipe_fig12(const Context& ctx, const ReproduceArgs& a, const Chain* chain) {
  std::string csv = ctx.csv_header() + "source,a_per_s,steady_block_time_s,mean_s\n";
  constexpr int kPoints = 21;
  const double b = std::log(1e12);
  for (int i = 0; i < kPoints; ++i) {
    const double a_s = 1e-8 * std::pow(100.0, static_cast<double>(i) / (kPoints - 1));
    SimConfig c;
    c.hash_model = ExponentialHash{a_s, b};
    c.initial_difficulty = steady_initial_difficulty(a_s, b, 0.0);
    c.n_blocks = kFig12Blocks;
    c.seed = derive_seed(*a.seed, static_cast<std::uint64_t>(i));
    const auto gaps = simulate(c).interarrivals();
    csv += "simulated," + fixed(a_s, 15) + "," + fixed(steady_block_time(PerSecond(a_s)).value(), 3) + "," +
           fixed(gap_summary(gaps).mean, 3) + "\n";
  }
  if (chain) {
    const HashRateSeries series = sliding_window(*chain, 144);
    for (const auto& iv : reference_intervals()) {
      if (iv.index < 2) continue;
      const ExpFit f = fit_exponential(series, iv.start, iv.end);
      const auto times = window_times(*chain, iv.start, iv.end);
      csv += "observed," + fixed(f.a, 15) + "," +
             fixed(steady_block_time(PerSecond(std::max(0.0, f.a))).value(), 3) + "," +
             fixed(interarrival_summary(times).mean, 3) + "\n";
    }
  }
  return csv;
}

std::string recipe_fig2016(const Context& ctx, const ReproduceArgs& a, const Chain* chain) {
  const ReferenceInterval& iv = interval_by_index(a.interval);
  std::vector<double> sums(kBlocksPerSegment, 0.0);
  std::vector<std::size_t> counts(kBlocksPerSegment, 0);
  for (std::size_t r = 0; r < a.reps; ++r) {
    SimConfig c = interval_config(iv);
    c.seed = derive_seed(*a.seed, r);
    const SimResult res = simulate(c);
    std::vector<double> times{res.start_time};
    times.insert(times.end(), res.arrival_times.begin(), res.arrival_times.end());
    // The start time closes a segment, so the first gap ends at position 1.
    const SegmentProfile p = position_in_segment_profile(times, kBlocksPerSegment - 1);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (!p.counts[k]) continue;
      sums[k] += p.position_means[k] * static_cast<double>(p.counts[k]);
      counts[k] += p.counts[k];
    }
  }
  std::optional<SegmentProfile> observed;
  if (chain) {
    std::vector<double> times;
    std::uint64_t first = 0;
    for (const auto& rec : chain->records()) {
      if (rec.timestamp < iv.start || rec.timestamp >= iv.end) continue;
      if (times.empty()) first = rec.height;
      times.push_back(rec.timestamp);
    }
    observed = position_in_segment_profile(times, first);
  }
  std::string csv = ctx.csv_header() + "position,simulated_mean,simulated_count";
  csv += observed ? ",observed_mean,observed_count\n" : "\n";
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double m = counts[k] ? sums[k] / static_cast<double>(counts[k]) : NAN;
    csv += std::to_string(k + 1) + "," + fixed(m, 3) + "," + std::to_string(counts[k]);
    if (observed)
      csv += "," + fixed(observed->position_means[k], 3) + "," + std::to_string(observed->counts[k]);
    csv += "\n";
  }
  return csv;
}

std::string recipe_fig_delay(const Context& ctx, const ReproduceArgs& a) {
  const ReferenceInterval& iv = interval_by_index(a.interval);
  std::vector<double> medians = a.medians;
  if (medians.empty())
    for (int m = 0; m <= 30; m += 2) medians.push_back(m);
  std::string csv = ctx.csv_header() +
                    "median_delay_s,mode,mean_s,mean_ci95,sd_s,sd_ci95,steady_block_time_s\n";
  const double steady = steady_block_time(PerSecond(iv.a)).value();
  for (std::size_t i = 0; i < medians.size(); ++i) {
    SimConfig c = interval_config(iv);
    c.difficulty_mode = parse_difficulty_mode(a.mode);
    c.delay = DelayModel::exp_ramp_from_median(medians[i]);
    const ReplicateSummary r = replicate(c, a.reps, derive_seed(*a.seed, i));
    csv += fixed(medians[i], 3) + "," + a.mode + "," + fixed(r.mean, 3) + "," + fixed(r.mean_ci95, 3) + "," +
           fixed(r.sd, 3) + "," + fixed(r.sd_ci95, 3) + "," + fixed(steady, 3) + "\n";
  }
  return csv;
}

void cmd_reproduce(const Context& ctx, const ReproduceArgs& a) {
  const std::string data = resolve_data(a.data);
  std::optional<Chain> chain;
  if (!data.empty()) chain = load_chain(data);
  const Chain* cp = chain ? &*chain : nullptr;
  const bool randomized = a.recipe != "table1";
  if (randomized && !a.seed) throw UsageError("reproduce " + a.recipe + " requires --seed");
  if (a.reps == 0) throw UsageError("--reps must be >= 1");

  std::string csv;
  if (a.recipe == "table1") {
    if (!cp) throw UsageError("reproduce table1 requires --data (or " + std::string(kDataDirEnv) + ")");
    csv = recipe_table1(ctx, *cp);
  } else if (a.recipe == "table2") {
    csv = recipe_table2(ctx, a, cp);
  } else if (a.recipe == "fig12") {
    csv = recipe_fig12(ctx, a, cp);
  } else if (a.recipe == "fig2016") {
    csv = recipe_fig2016(ctx, a, cp);
  } else if (a.recipe == "fig_delay") {
    csv = recipe_fig_delay(ctx, a);
  } else {
    throw UsageError("unknown recipe '" + a.recipe + "' (table1|table2|fig12|fig2016|fig_delay)");
  }
  const std::string out = a.out.empty() ? a.recipe + ".csv" : a.out;
  write_atomic(out, csv);
  ctx.summary({{"command", "reproduce"}, {"recipe", a.recipe}, {"out", out}, {"data", data}});
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<ReferenceInterval>& reference_intervals() {
  static const std::vector<ReferenceInterval> kIntervals = {
      {1, 1230940800.0, 1262131200.0, -9.44e-9, 27.1},
      {2, 1262131200.0, 1278979200.0, 2.18e-7, -259.0},
      {3, 1278979200.0, 1308873600.0, 2.72e-7, -326.0},
      {4, 1308873600.0, 1362096000.0, 2.01e-8, 3.38},
      {5, 1362096000.0, 1412812800.0, 1.96e-7, -236.0},
      {6, 1412812800.0, 1511481600.0, 3.88e-8, -15.1},
  };
  return kIntervals;
}

SimConfig interval_config(const ReferenceInterval& iv) {
  SimConfig c;
  c.hash_model = ExponentialHash{iv.a, iv.b};
  c.start_time = iv.start;
  c.initial_difficulty = steady_initial_difficulty(iv.a, iv.b, iv.start);
  c.n_blocks = interval_blocks(iv);
  return c;
}

std::vector<double> window_times(const Chain& chain, double start, double end) {
  std::vector<double> t;
  for (const auto& r : chain.records())
    if (r.timestamp >= start && r.timestamp < end) t.push_back(r.timestamp);
  return t;
}

SimConfig config_from_json(const json& j, const std::string& base_dir) {
  SimConfig c;
  try {
    const json& hm = j.at("hash_model");
    const std::string kind = hm.at("kind").get<std::string>();
    if (kind == "exponential") {
      c.hash_model = ExponentialHash{hm.at("a").get<double>(), hm.at("b").get<double>()};
    } else if (kind == "empirical") {
      fs::path p = hm.at("series").get<std::string>();
      if (p.is_relative()) p = fs::path(base_dir) / p;
      c.hash_model = EmpiricalHash{std::make_shared<const HashRateSeries>(load_series(p.string()))};
    } else {
      throw ParameterError("unknown hash_model kind '" + kind + "'");
    }
    c.difficulty_mode = parse_difficulty_mode(j.value("difficulty_mode", std::string("random")));
    if (j.contains("delay")) {
      const json& d = j.at("delay");
      const std::string dk = d.at("kind").get<std::string>();
      if (dk == "none")
        c.delay = DelayModel::none();
      else if (dk == "constant")
        c.delay = DelayModel::constant(d.at("dead_time").get<double>());
      else if (dk == "exp_ramp")
        c.delay = d.contains("c") ? DelayModel::exp_ramp(d.at("c").get<double>())
                                  : DelayModel::exp_ramp_from_median(d.at("median_s").get<double>());
      else
        throw ParameterError("unknown delay kind '" + dk + "'");
    }
    c.start_time = j.value("start_time", 0.0);
    c.n_blocks = j.at("n_blocks").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const json& d1 = j.at("initial_difficulty");
    if (d1.is_string()) {
      if (d1.get<std::string>() != "steady") throw ParameterError("initial_difficulty must be a number or \"steady\"");
      const auto* e = std::get_if<ExponentialHash>(&c.hash_model);
      if (!e) throw ParameterError("\"steady\" initial difficulty needs an exponential hash model");
      c.initial_difficulty = steady_initial_difficulty(e->a, e->b, c.start_time);
    } else {
      c.initial_difficulty = d1.get<double>();
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return c;
}

json config_to_json(const SimConfig& c) {
  json j;
  if (const auto* e = std::get_if<ExponentialHash>(&c.hash_model))
    j["hash_model"] = {{"kind", "exponential"}, {"a", e->a}, {"b", e->b}};
  else
    j["hash_model"] = {{"kind", "empirical"},
                       {"knots", std::get<EmpiricalHash>(c.hash_model).series->size()}};
  j["difficulty_mode"] = std::string(to_string(c.difficulty_mode));
  json d = {{"kind", std::string(to_string(c.delay.kind))}};
  if (c.delay.kind == DelayModel::Kind::constant) d["dead_time"] = c.delay.dead_time;
  if (c.delay.kind == DelayModel::Kind::exp_ramp) d["c"] = c.delay.c;
  j["delay"] = d;
  j["initial_difficulty"] = c.initial_difficulty;
  j["start_time"] = c.start_time;
  j["n_blocks"] = c.n_blocks;
  j["seed"] = c.seed;
  return j;
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block arrival analysis and simulation"};
  app.name(argv.empty() ? "blockarrival" : fs::path(argv[0]).filename().string());
  app.require_subcommand(1);

  CleanArgs clean_args;
  auto* clean = app.add_subcommand("clean", "Clean a raw chain into the later, resampled dataset");
  clean->add_option("--in", clean_args.in, "Input chain CSV")->required();
  clean->add_option("--out", clean_args.out, "Output chain CSV")->required();
  clean->add_option("--seed", clean_args.seed, "Resampling seed")->required();
  clean->add_option("--report", clean_args.report, "Report JSON (default <out>.report.json)");
  clean->add_option("--strategy", clean_args.strategy, "ignore|reorder|adjacent|sort|lis");
  clean->add_option("--cutoff", clean_args.cutoff, "Drop blocks before this Unix time");
  clean->add_flag("--no-cutoff", clean_args.no_cutoff, "Keep the whole chain");

  EstimateArgs est_args;
  auto* estimate = app.add_subcommand("estimate", "Estimate the hash rate");
  estimate->set_help_flag("--help", "Print this help message and exit");
  estimate->add_option("--in", est_args.in, "Input chain CSV")->required();
  estimate->add_option("--out", est_args.out, "Output series CSV")->required();
  estimate->add_option("--k", est_args.k, "Sliding window size in blocks")->check(CLI::PositiveNumber);
  estimate->add_option("--kernel", est_args.kernel, "rectangular|gaussian|epanechnikov");
  estimate->add_option("--h", est_args.h, "Kernel bandwidth (s)");
  estimate->add_option("--step", est_args.step, "Kernel evaluation step (s)");
  estimate->add_option("--delay-c", est_args.delay_c, "Exp-ramp delay rate (1/s) for correction");
  estimate->add_flag("--segment", est_args.segment, "Per-segment averages");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit piecewise exponential hash rate");
  fit->add_option("--in", fit_args.in, "Input chain CSV")->required();
  fit->add_option("--intervals", fit_args.intervals, "JSON interval boundaries")->required();
  fit->add_option("--out", fit_args.out, "Output JSON");
  fit->add_option("--k", fit_args.k, "Sliding window size")->check(CLI::PositiveNumber);
  fit->add_option("--delay-c", fit_args.delay_c, "Exp-ramp delay rate (1/s)");

  double predict_a = 0.0;
  auto* predict = app.add_subcommand("predict", "Steady-state segment and block times");
  predict->add_option("--a", predict_a, "Log hash-rate growth per second")->required();

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate block arrivals");
  sim->add_option("--config", sim_args.config, "Simulation config JSON")->required();
  sim->add_option("--seed", sim_args.seed, "Seed (overrides config)");
  sim->add_option("--out", sim_args.out, "Arrivals CSV (or per-rep CSV with --reps)");
  sim->add_option("--reps", sim_args.reps, "Replications")->check(CLI::PositiveNumber);

  AnalyzeArgs an_args;
  auto* analyze = app.add_subcommand("analyze", "Inter-arrival analysis");
  analyze->add_option("analysis", an_args.what, "lilliefors|profile|survivor")->required();
  analyze->add_option("--in", an_args.in, "Input chain CSV")->required();
  analyze->add_option("--out", an_args.out, "Output file");
  analyze->add_flag("--raw", an_args.raw, "Allow negative inter-arrivals");
  analyze->add_option("--seed", an_args.seed, "Monte-Carlo seed");
  analyze->add_option("--n-mc", an_args.n_mc, "Monte-Carlo null replicates");
  analyze->add_option("--start", an_args.start, "Window start (Unix s)");
  analyze->add_option("--end", an_args.end, "Window end (Unix s)");
  analyze->add_option("--tail-threshold", an_args.tail_threshold, "Resample gaps above this (s)");

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Sample a Poisson process");
  sample->add_option("--rate", sample_args.rate, "constant|linear|exponential");
  sample->add_option("--a", sample_args.a, "Rate, slope or growth per second");
  sample->add_option("--b", sample_args.b, "Log rate at t = 0 (exponential)");
  sample->add_option("--t0", sample_args.t0, "Start time");
  sample->add_option("--count", sample_args.count, "Number of arrivals");
  sample->add_option("--horizon", sample_args.horizon, "End time");
  sample->add_option("--seed", sample_args.seed, "Seed");
  sample->add_option("--out", sample_args.out, "Arrivals CSV");

  ExpectArgs expect_args;
  auto* expect = app.add_subcommand("expect", "Expected n-th arrival times");
  expect->add_option("--rate", expect_args.rate, "exponential|linear");
  expect->add_option("--a", expect_args.a, "Growth rate or slope")->required();
  expect->add_option("--n", expect_args.n, "Largest arrival index")->check(CLI::Range(1, 2016));
  expect->add_option("--out", expect_args.out, "Output CSV");

  ReproduceArgs rep_args;
  auto* reproduce = app.add_subcommand("reproduce", "Run a bundled experiment");
  reproduce->add_option("recipe", rep_args.recipe, "table1|table2|fig12|fig2016|fig_delay")->required();
  reproduce->add_option("--data", rep_args.data, "Cleaned chain CSV");
  reproduce->add_option("--seed", rep_args.seed, "Base seed");
  reproduce->add_option("--out", rep_args.out, "Output CSV (default <recipe>.csv)");
  reproduce->add_option("--reps", rep_args.reps, "Replications");
  reproduce->add_option("--interval", rep_args.interval, "Reference interval (fig2016, fig_delay)");
  reproduce->add_option("--medians", rep_args.medians, "Median delays (s) for fig_delay");
  reproduce->add_option("--mode", rep_args.mode, "random|deterministic (fig_delay)");

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const Context ctx{argv, out};
  try {
    if (*clean) cmd_clean(ctx, clean_args);
    else if (*estimate) cmd_estimate(ctx, est_args);
    else if (*fit) cmd_fit(ctx, fit_args);
    else if (*predict) cmd_predict(ctx, predict_a);
    else if (*sim) cmd_simulate(ctx, sim_args);
    else if (*analyze) cmd_analyze(ctx, an_args);
    else if (*sample) cmd_sample(ctx, sample_args);
    else if (*expect) cmd_expect(ctx, expect_args);
    else if (*reproduce) cmd_reproduce(ctx, rep_args);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace blockarrival::cli
