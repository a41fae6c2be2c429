#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "blockarrival/chain_data.hpp"
#include "blockarrival/simulator.hpp"

namespace testing_support {

using blockarrival::BlockRecord;
using blockarrival::Chain;
using blockarrival::Provenance;

// Heights 0..n-1 at the given times, difficulty 1.
inline Chain chain_from_times(const std::vector<double>& times, Provenance p = Provenance::raw,
                              double difficulty = 1.0) {
  std::vector<BlockRecord> recs;
  for (std::size_t i = 0; i < times.size(); ++i) recs.push_back({i, times[i], difficulty});
  return Chain(std::move(recs), p);
}

// Height 0 at the simulation start, then one record per arrival; each
// record carries the difficulty in force for its 2016-block segment.
inline Chain chain_from_simulation(const blockarrival::SimResult& r) {
  std::vector<double> seg_difficulty{r.config.initial_difficulty};
  for (const auto& [t, d] : r.difficulty_history) seg_difficulty.push_back(d);
  std::vector<BlockRecord> recs;
  recs.push_back({0, r.start_time, seg_difficulty[0]});
  for (std::size_t i = 0; i < r.arrival_times.size(); ++i) {
    const std::uint64_t h = i + 1;
    const std::size_t seg = std::min<std::size_t>(h / 2016, seg_difficulty.size() - 1);
    recs.push_back({h, r.arrival_times[i], seg_difficulty[seg]});
  }
  return Chain(std::move(recs), Provenance::synthetic);
}

// Every element of every longest non-decreasing subsequence, by subset enumeration.
inline std::vector<bool> brute_force_lis_intersection(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::size_t best = 0;
  std::vector<std::uint32_t> longest;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    bool ok = true;
    double prev = -1e300;
    std::size_t len = 0;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      if (v[i] < prev) ok = false;
      prev = v[i];
      ++len;
    }
    if (!ok) continue;
    if (len > best) {
      best = len;
      longest.clear();
    }
    if (len == best) longest.push_back(mask);
  }
  std::vector<bool> out(n, true);
  for (std::size_t i = 0; i < n; ++i)
    for (auto m : longest)
      if (!(m >> i & 1u)) out[i] = false;
  return out;
}

}  // namespace testing_support
