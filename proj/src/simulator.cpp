#include "blockarrival/simulator.hpp"

#include <cmath>
#include <limits>

#include "blockarrival/difficulty.hpp"
#include "blockarrival/rng.hpp"
#include "blockarrival/stats.hpp"

namespace blockarrival {

double effective_rate(double lambda, const DelayModel& delay, double elapsed) {
  if (!(elapsed >= 0.0)) throw ParameterError("elapsed time must be >= 0");
  return lambda * delay.factor(elapsed);
}

double mean_field_rate(double lambda, const DelayModel& delay) {
  if (!delay.present() || lambda == 0.0) return lambda;
  return 1.0 / (1.0 / lambda + delay.mean());
}

std::string_view to_string(DifficultyMode m) {
  return m == DifficultyMode::random ? "random" : "deterministic";
}

DifficultyMode parse_difficulty_mode(std::string_view s) {
  if (s == "random") return DifficultyMode::random;
  if (s == "deterministic") return DifficultyMode::deterministic;
  throw ParameterError("unknown difficulty mode '" + std::string(s) + "'");
}

std::vector<double> SimResult::interarrivals() const {
  std::vector<double> gaps;
  gaps.reserve(arrival_times.size());
  double prev = start_time;
  for (double t : arrival_times) {
    gaps.push_back(t - prev);
    prev = t;
  }
  return gaps;
}

RateFunction hash_rate_function(const HashModel& model) {
  if (const auto* e = std::get_if<ExponentialHash>(&model)) return RateFunction::exponential(e->a, e->b);
  const auto& emp = std::get<EmpiricalHash>(model);
  if (!emp.series) throw ParameterError("empirical hash model needs a series");
  // Difficulty 2^-32 makes the empirical intensity equal H itself.
  return RateFunction::empirical(emp.series, DifficultyStep::constant(1.0 / kHashesPerDifficulty));
}

double steady_initial_difficulty(double a, double b, double t0) {
  // The first segment must hold exactly 2016 expected blocks over the steady segment time.
  const double seg = steady_segment_time(PerSecond(a)).value();
  const double x = a * seg;
  const double growth = x == 0.0 ? 1.0 : std::expm1(x) / x;
  return std::exp(a * t0 + b) * seg * growth / (kBlocksPerSegment * kHashesPerDifficulty);
}

SimResult simulate(const SimConfig& config) {
  if (config.n_blocks == 0) throw ParameterError("n_blocks must be positive");
  if (!(config.initial_difficulty > 0.0)) throw ParameterError("initial difficulty must be positive");

  const RateFunction hash = hash_rate_function(config.hash_model);
  const bool delayed = config.delay.present();
  const bool deterministic = config.difficulty_mode == DifficultyMode::deterministic;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  SimResult result;
  result.config = config;
  result.start_time = config.start_time;
  result.arrival_times.reserve(config.n_blocks);

  DeterministicSchedule schedule;
  std::size_t seg = 0;  // index into the schedule's segments
  auto extend_schedule = [&](std::size_t need) {
    while (schedule.segments() <= need) {
      const double d = schedule.segments() == 0
                           ? config.initial_difficulty
                           : next_difficulty(schedule.difficulty.back(), schedule.delta.back());
      const Seconds y0 = schedule.y.empty() ? Seconds(config.start_time) : schedule.y.back();
      const int chunk = static_cast<int>(config.n_blocks / kBlocksPerSegment) + 2;
      DeterministicSchedule more;
      try {
        more = deterministic_schedule(hash, d, y0, chunk, config.delay);
      } catch (const PartialScheduleError& e) {
        more = e.completed();
      }
      if (more.segments() == 0) return false;
      if (schedule.y.empty()) schedule.y.push_back(more.y.front());
      schedule.y.insert(schedule.y.end(), more.y.begin() + 1, more.y.end());
      schedule.difficulty.insert(schedule.difficulty.end(), more.difficulty.begin(), more.difficulty.end());
      schedule.delta.insert(schedule.delta.end(), more.delta.begin(), more.delta.end());
    }
    return true;
  };

  double d = config.initial_difficulty;
  double seg_end = kInf;
  if (deterministic) {
    if (!extend_schedule(0)) {
      result.partial = true;
      return result;
    }
    d = schedule.difficulty[0];
    seg_end = schedule.y[1].value();
  }

  double t = config.start_time;
  double seg_start = t;
  std::size_t in_segment = 0;
  auto make_rate = [&](double difficulty, double last) {
    RateFunction base = hash.scaled(1.0 / (kHashesPerDifficulty * difficulty));
    return delayed ? RateFunction::delayed(std::move(base), config.delay, last) : base;
  };
  RateFunction rate = make_rate(d, t);
  Rng rng(config.seed);

  while (result.arrival_times.size() < config.n_blocks) {
    const auto candidate = rate.next_event(t, rng);
    if (deterministic && (!candidate || *candidate >= seg_end)) {
      // No arrival before the scheduled change; the process is memoryless so
      // sampling restarts at the change time.
      if (!extend_schedule(seg + 1)) {
        result.partial = true;
        break;
      }
      ++seg;
      t = seg_end;
      d = schedule.difficulty[seg];
      seg_end = schedule.y[seg + 1].value();
      result.difficulty_history.emplace_back(t, d);
      const double last = result.arrival_times.empty() ? config.start_time : result.arrival_times.back();
      rate = make_rate(d, last);
      continue;
    }
    if (!candidate) {
      result.partial = true;
      break;
    }
    t = *candidate;
    result.arrival_times.push_back(t);
    if (!deterministic && ++in_segment == static_cast<std::size_t>(kBlocksPerSegment)) {
      d = next_difficulty(d, Seconds(t - seg_start));
      result.difficulty_history.emplace_back(t, d);
      seg_start = t;
      in_segment = 0;
      rate = make_rate(d, t);
    } else if (delayed) {
      rate = rate.restarted_at(t);
    }
  }
  return result;
}

ReplicateSummary replicate(const SimConfig& config, std::size_t n_reps, std::uint64_t base_seed) {
  if (n_reps == 0) throw ParameterError("n_reps must be >= 1");
  ReplicateSummary out;
  out.reps.reserve(n_reps);
  for (std::size_t r = 0; r < n_reps; ++r) {
    SimConfig c = config;
    c.seed = derive_seed(base_seed, r);
    const SimResult res = simulate(c);
    RepStats s;
    s.seed = c.seed;
    s.partial = res.partial;
    if (!res.arrival_times.empty()) {
      const auto sum = gap_summary(res.interarrivals());
      s.mean = sum.mean;
      s.sd = sum.sd;
      s.n = sum.n;
    }
    out.reps.push_back(s);
  }
  std::vector<double> means;
  std::vector<double> sds;
  for (const auto& s : out.reps) {
    means.push_back(s.mean);
    sds.push_back(s.sd);
  }
  const auto m = gap_summary(means);
  const auto v = gap_summary(sds);
  const double root = std::sqrt(static_cast<double>(n_reps));
  out.mean = m.mean;
  out.sd = v.mean;
  out.mean_ci95 = n_reps > 1 ? 1.96 * m.sd / root : 0.0;
  out.sd_ci95 = n_reps > 1 ? 1.96 * v.sd / root : 0.0;
  return out;
}

}  // namespace blockarrival
