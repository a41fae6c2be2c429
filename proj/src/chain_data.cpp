#include "blockarrival/chain_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "blockarrival/errors.hpp"
#include "blockarrival/rng.hpp"
#include "blockarrival/units.hpp"

namespace blockarrival {

namespace {

std::uint64_t segment_of(std::uint64_t height) { return height / kBlocksPerSegment; }

template <class T>
bool parse_field(std::string_view field, T& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Length of the longest non-decreasing subsequence ending at each element.
std::vector<int> prefix_ranks(std::span<const double> values) {
  std::vector<double> tails;
  std::vector<int> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto it = std::upper_bound(tails.begin(), tails.end(), values[i]);
    ranks[i] = static_cast<int>(it - tails.begin()) + 1;
    if (it == tails.end())
      tails.push_back(values[i]);
    else
      *it = values[i];
  }
  return ranks;
}

void unflag_boundaries(const Chain& chain, std::set<std::uint64_t>& flags) {
  flags.erase(chain.front().height);
  flags.erase(chain.back().height);
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::raw:
      return "raw";
    case Provenance::cleaned_lr:
      return "cleaned-LR";
    case Provenance::synthetic:
      return "synthetic";
  }
  return "unknown";
}

std::string_view to_string(CleaningStrategy s) {
  switch (s) {
    case CleaningStrategy::ignore:
      return "ignore";
    case CleaningStrategy::reorder:
      return "reorder";
    case CleaningStrategy::resample_adjacent_negative:
      return "resample-adjacent-negative";
    case CleaningStrategy::resample_sort_displacement:
      return "resample-sort-displacement";
    case CleaningStrategy::resample_lis_intersection:
      return "resample-lis-intersection";
  }
  return "unknown";
}

CleaningStrategy parse_strategy(std::string_view name) {
  for (auto s : {CleaningStrategy::ignore, CleaningStrategy::reorder,
                 CleaningStrategy::resample_adjacent_negative,
                 CleaningStrategy::resample_sort_displacement,
                 CleaningStrategy::resample_lis_intersection}) {
    if (to_string(s) == name) return s;
  }
  if (name == "lis") return CleaningStrategy::resample_lis_intersection;
  if (name == "adjacent") return CleaningStrategy::resample_adjacent_negative;
  if (name == "sort") return CleaningStrategy::resample_sort_displacement;
  throw ParameterError("unknown cleaning strategy '" + std::string(name) + "'");
}

Chain::Chain(std::vector<BlockRecord> records, Provenance provenance)
    : records_(std::move(records)), provenance_(provenance) {
  if (records_.empty()) throw StructuralError("empty chain");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!(r.difficulty > 0.0) || !std::isfinite(r.difficulty))
      throw StructuralError("non-positive difficulty at height " + std::to_string(r.height));
    if (!std::isfinite(r.timestamp))
      throw StructuralError("non-finite timestamp at height " + std::to_string(r.height));
    if (i == 0) continue;
    const auto& prev = records_[i - 1];
    if (r.height != prev.height + 1) {
      if (r.height > prev.height + 1)
        throw StructuralError("gap at height " + std::to_string(prev.height + 1));
      throw StructuralError("heights not increasing at height " + std::to_string(r.height));
    }
    if (segment_of(r.height) == segment_of(prev.height) && r.difficulty != prev.difficulty)
      throw StructuralError("difficulty changes inside a segment at height " +
                            std::to_string(r.height));
    if (provenance_ != Provenance::raw && r.timestamp < prev.timestamp)
      throw StructuralError("decreasing timestamp at height " + std::to_string(r.height) +
                            " in a " + std::string(to_string(provenance_)) + " chain");
  }
}

std::vector<double> Chain::timestamps() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.timestamp);
  return out;
}

Chain parse_chain(std::string_view text) {
  std::vector<BlockRecord> records;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (!have_header) {
      if (line != "height,time,difficulty")
        throw ParseError(line_no, "expected header 'height,time,difficulty'");
      have_header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
      throw ParseError(line_no, "expected 3 comma-separated fields");
    BlockRecord r;
    if (!parse_field(line.substr(0, c1), r.height))
      throw ParseError(line_no, "bad height");
    if (!parse_field(line.substr(c1 + 1, c2 - c1 - 1), r.timestamp))
      throw ParseError(line_no, "bad time");
    if (!parse_field(line.substr(c2 + 1), r.difficulty))
      throw ParseError(line_no, "bad difficulty");
    if (!records.empty() && r.height <= records.back().height)
      throw ParseError(line_no, "rows not sorted by height");
    records.push_back(r);
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseError(line_no, "missing header");
  return Chain(std::move(records), Provenance::raw);
}

std::string format_chain_csv(const Chain& chain) {
  std::string out = "height,time,difficulty\n";
  char buf[64];
  for (const auto& r : chain.records()) {
    out += std::to_string(r.height);
    out += ',';
    if (r.timestamp == std::floor(r.timestamp) && std::fabs(r.timestamp) < 9e15)
      std::snprintf(buf, sizeof buf, "%.0f", r.timestamp);
    else
      std::snprintf(buf, sizeof buf, "%.3f", r.timestamp);
    out += buf;
    out += ',';
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r.difficulty);
    out.append(buf, ptr);
    out += '\n';
  }
  return out;
}

std::vector<std::uint64_t> scan_negative_interarrivals(const Chain& chain) {
  std::vector<std::uint64_t> out;
  const auto& rs = chain.records();
  for (std::size_t i = 1; i < rs.size(); ++i)
    if (rs[i].timestamp < rs[i - 1].timestamp) out.push_back(rs[i].height);
  return out;
}

std::vector<bool> lis_intersection(std::span<const double> timestamps) {
  const std::size_t n = timestamps.size();
  std::vector<bool> reliable(n, false);
  if (n == 0) return reliable;

  const auto prefix = prefix_ranks(timestamps);
  // Longest non-decreasing run starting at i = longest non-decreasing run
  // ending at i in the reversed, negated sequence.
  std::vector<double> mirrored(n);
  for (std::size_t i = 0; i < n; ++i) mirrored[i] = -timestamps[n - 1 - i];
  const auto mirrored_ranks = prefix_ranks(mirrored);

  const int longest = *std::max_element(prefix.begin(), prefix.end());
  // An element sits on some longest subsequence iff prefix + suffix - 1 equals
  // the longest length; it then occupies position prefix[i] in that
  // subsequence. It is on every longest subsequence iff no other such element
  // can occupy the same position.
  std::vector<int> occupants(static_cast<std::size_t>(longest) + 1, 0);
  std::vector<bool> on_some(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const int suffix = mirrored_ranks[n - 1 - i];
    if (prefix[i] + suffix - 1 == longest) {
      on_some[i] = true;
      ++occupants[static_cast<std::size_t>(prefix[i])];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    reliable[i] = on_some[i] && occupants[static_cast<std::size_t>(prefix[i])] == 1;
  return reliable;
}

std::set<std::uint64_t> flag_unreliable(const Chain& chain, CleaningStrategy strategy) {
  std::set<std::uint64_t> flags;
  const auto& rs = chain.records();
  const std::size_t n = rs.size();
  switch (strategy) {
    case CleaningStrategy::ignore:
    case CleaningStrategy::reorder:
      return flags;
    case CleaningStrategy::resample_adjacent_negative:
      for (std::size_t i = 1; i < n; ++i) {
        if (rs[i].timestamp < rs[i - 1].timestamp) {
          flags.insert(rs[i - 1].height);
          flags.insert(rs[i].height);
        }
      }
      break;
    case CleaningStrategy::resample_sort_displacement: {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rs[a].timestamp < rs[b].timestamp;
      });
      for (std::size_t k = 0; k < n; ++k)
        if (order[k] != k) flags.insert(rs[k].height);
      break;
    }
    case CleaningStrategy::resample_lis_intersection: {
      const auto ts = chain.timestamps();
      auto reliable = lis_intersection(ts);
      if (n >= 2 && !(reliable.front() && reliable.back())) {
        // A boundary record is off some longest subsequence. Anchor both ends:
        // restrict to longest subsequences through the first and last record,
        // i.e. to interior values inside [first, last].
        const double lo = ts.front();
        const double hi = ts.back();
        if (hi < lo)
          throw StructuralError("boundary timestamps out of order; cannot anchor resampling");
        std::vector<std::size_t> kept{0};
        std::vector<double> sub{lo};
        for (std::size_t i = 1; i + 1 < n; ++i) {
          if (ts[i] >= lo && ts[i] <= hi) {
            kept.push_back(i);
            sub.push_back(ts[i]);
          }
        }
        kept.push_back(n - 1);
        sub.push_back(hi);
        const auto sub_reliable = lis_intersection(sub);
        reliable.assign(n, false);
        for (std::size_t k = 0; k < kept.size(); ++k) reliable[kept[k]] = sub_reliable[k];
        reliable.front() = true;
        reliable.back() = true;
      }
      for (std::size_t i = 0; i < n; ++i)
        if (!reliable[i]) flags.insert(rs[i].height);
      break;
    }
  }
  unflag_boundaries(chain, flags);
  return flags;
}

std::pair<Chain, CleaningReport> resample_flagged(const Chain& chain,
                                                  const std::set<std::uint64_t>& flags,
                                                  std::uint64_t seed) {
  CleaningReport report;
  report.rng_seed = seed;
  report.rng_algorithm = std::string(Rng::kAlgorithm);
  report.unreliable_heights = flags;

  std::vector<BlockRecord> rs = chain.records();
  const std::size_t n = rs.size();
  const std::uint64_t h0 = rs.front().height;
  std::vector<bool> flagged(n, false);
  for (auto h : flags) {
    if (h < h0 || h - h0 >= n)
      throw PreconditionError("flagged height " + std::to_string(h) + " not in chain");
    const std::size_t i = h - h0;
    if (i == 0 || i == n - 1)
      throw PreconditionError("boundary record at height " + std::to_string(h) +
                              " cannot be resampled");
    flagged[i] = true;
  }

  Rng rng(seed);
  std::vector<double> draws;
  for (std::size_t i = 1; i + 1 < n;) {
    if (!flagged[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (flagged[j]) ++j;  // the last record is never flagged
    const double lo = rs[i - 1].timestamp;
    const double hi = rs[j].timestamp;
    if (hi < lo)
      throw NumericError("reliable anchors out of order around height " +
                         std::to_string(rs[i].height));
    draws.clear();
    for (std::size_t k = i; k < j; ++k) {
      double v = lo;
      if (hi > lo) {
        do {
          v = rng.uniform(lo, hi);
        } while (!(v > lo && v < hi));
      }
      draws.push_back(v);
    }
    std::sort(draws.begin(), draws.end());
    for (std::size_t k = i; k < j; ++k) {
      rs[k].timestamp = draws[k - i];
      report.resampled_values[rs[k].height] = draws[k - i];
    }
    i = j;
  }
  return {Chain(std::move(rs), chain.provenance()), std::move(report)};
}

std::pair<Chain, CleaningReport> clean(const Chain& chain, CleaningStrategy strategy,
                                       std::uint64_t seed) {
  if (strategy == CleaningStrategy::ignore) {
    CleaningReport report;
    report.strategy = strategy;
    report.rng_seed = seed;
    report.rng_algorithm = std::string(Rng::kAlgorithm);
    return {chain, report};
  }
  if (strategy == CleaningStrategy::reorder) {
    auto rs = chain.records();
    auto ts = chain.timestamps();
    std::sort(ts.begin(), ts.end());
    CleaningReport report;
    report.strategy = strategy;
    report.rng_seed = seed;
    report.rng_algorithm = std::string(Rng::kAlgorithm);
    for (std::size_t i = 0; i < rs.size(); ++i) rs[i].timestamp = ts[i];
    return {Chain(std::move(rs), chain.provenance()), report};
  }
  auto [out, report] = resample_flagged(chain, flag_unreliable(chain, strategy), seed);
  report.strategy = strategy;
  return {std::move(out), std::move(report)};
}

std::pair<Chain, CleaningReport> clean_lr(const Chain& chain, double cutoff, std::uint64_t seed) {
  const auto& rs = chain.records();
  auto first = std::find_if(rs.begin(), rs.end(),
                            [&](const BlockRecord& r) { return r.timestamp >= cutoff; });
  if (first == rs.end()) throw StructuralError("all records precede the cutoff");
  Chain later(std::vector<BlockRecord>(first, rs.end()), Provenance::raw);
  auto flags = flag_unreliable(later, CleaningStrategy::resample_lis_intersection);
  auto [resampled, report] = resample_flagged(later, flags, seed);
  report.strategy = CleaningStrategy::resample_lis_intersection;
  return {Chain(resampled.records(), Provenance::cleaned_lr), std::move(report)};
}

}  // namespace blockarrival
