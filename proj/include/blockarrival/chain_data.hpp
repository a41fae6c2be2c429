#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blockarrival {

/// Default data cutoff: 2009-12-30 00:00:00 UTC.
inline constexpr double kDefaultCutoff = 1262131200.0;

struct BlockRecord {
  std::uint64_t height = 0;
  /// Seconds since the Unix epoch. Raw timestamps are whole seconds; resampled
  /// ones are real-valued, so the field is a double (exact for integers < 2^53).
  double timestamp = 0.0;
  double difficulty = 1.0;
};

enum class Provenance { raw, cleaned_lr, synthetic };

std::string_view to_string(Provenance p);

/// An ordered, height-contiguous run of blocks.
///
/// Invariants enforced on construction: non-empty, heights increase by one,
/// difficulty positive and constant within each 2016-height segment, and
/// timestamps non-decreasing unless the provenance is raw.
class Chain {
 public:
  Chain(std::vector<BlockRecord> records, Provenance provenance);

  const std::vector<BlockRecord>& records() const { return records_; }
  Provenance provenance() const { return provenance_; }
  std::size_t size() const { return records_.size(); }
  const BlockRecord& operator[](std::size_t i) const { return records_[i]; }
  const BlockRecord& front() const { return records_.front(); }
  const BlockRecord& back() const { return records_.back(); }

  std::vector<double> timestamps() const;

 private:
  std::vector<BlockRecord> records_;
  Provenance provenance_;
};

enum class CleaningStrategy {
  ignore,
  reorder,
  resample_adjacent_negative,    // (b) both ends of a negative inter-arrival
  resample_sort_displacement,    // (c) any timestamp that moves under a stable sort
  resample_lis_intersection,     // (d) outside the intersection of all longest runs
};

std::string_view to_string(CleaningStrategy s);
CleaningStrategy parse_strategy(std::string_view name);

struct CleaningReport {
  CleaningStrategy strategy = CleaningStrategy::resample_lis_intersection;
  std::set<std::uint64_t> unreliable_heights;
  std::map<std::uint64_t, double> resampled_values;
  std::uint64_t rng_seed = 0;
  std::string rng_algorithm;
};

/// Parses `height,time,difficulty` CSV. Lines starting with '#' are comments.
Chain parse_chain(std::string_view text);

/// Serializes a chain in the same CSV layout. Whole-second timestamps are
/// written as integers, fractional ones with 3 decimals.
std::string format_chain_csv(const Chain& chain);

/// Heights i whose inter-arrival X_i - X_{i-1} is negative, ascending.
std::vector<std::uint64_t> scan_negative_interarrivals(const Chain& chain);

/// One flag per element: true iff the element lies on every longest
/// non-decreasing subsequence. O(n log n).
std::vector<bool> lis_intersection(std::span<const double> timestamps);

/// Heights judged unreliable by a resampling strategy. The first and last
/// records are always anchors and never flagged.
std::set<std::uint64_t> flag_unreliable(const Chain& chain, CleaningStrategy strategy);

/// Replaces each maximal run of flagged heights by sorted uniform draws
/// between the surrounding reliable timestamps.
std::pair<Chain, CleaningReport> resample_flagged(const Chain& chain,
                                                  const std::set<std::uint64_t>& flags,
                                                  std::uint64_t seed);

/// Produces the "later, resampled" dataset: drops the prefix before `cutoff`,
/// flags with strategy (d), and resamples.
std::pair<Chain, CleaningReport> clean_lr(const Chain& chain, double cutoff, std::uint64_t seed);

/// Applies any strategy: `ignore` passes through, `reorder` sorts timestamps,
/// the resample strategies flag then resample.
std::pair<Chain, CleaningReport> clean(const Chain& chain, CleaningStrategy strategy,
                                       std::uint64_t seed);

}  // namespace blockarrival
