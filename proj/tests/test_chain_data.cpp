#include "doctest.h"

#include <algorithm>
#include <random>

#include "blockarrival/chain_data.hpp"
#include "blockarrival/errors.hpp"
#include "support.hpp"

using namespace blockarrival;
using testing_support::brute_force_lis_intersection;
using testing_support::chain_from_times;

namespace {

const std::vector<double> kDisplaced = {10, 20, 70, 80, 30, 40, 50, 60};

std::vector<std::uint64_t> as_vector(const std::set<std::uint64_t>& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("parse_chain reads the three-column layout") {
  const Chain c = parse_chain("height,time,difficulty\n0,0,1\n1,600,1\n");
  CHECK(c.size() == 2);
  CHECK(c.provenance() == Provenance::raw);
  CHECK(c[1].timestamp == 600.0);
  CHECK(c[1].difficulty == 1.0);
}

TEST_CASE("parse_chain skips comments and accepts CRLF") {
  const Chain c = parse_chain("# produced elsewhere\nheight,time,difficulty\r\n5,100,2\r\n6,90,2\r\n");
  CHECK(c.front().height == 5);
  CHECK(c.back().timestamp == 90.0);
}

TEST_CASE("parse_chain errors") {
  CHECK_THROWS_AS(parse_chain("height,time,difficulty\n"), StructuralError);
  try {
    parse_chain("height,time,difficulty\n0,0,1\n2,600,1\n");
    FAIL("expected a gap error");
  } catch (const StructuralError& e) {
    CHECK(std::string(e.what()).find("gap at height 1") != std::string::npos);
  }
  try {
    parse_chain("height,time,difficulty\n0,0,1\n1,abc,1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_chain("h,t,d\n0,0,1\n"), ParseError);
  CHECK_THROWS_AS(parse_chain("height,time,difficulty\n0,0,1,4\n"), ParseError);
  CHECK_THROWS_AS(parse_chain("height,time,difficulty\n0,0,0\n"), StructuralError);
}

TEST_CASE("difficulty must be constant within a segment") {
  std::vector<BlockRecord> recs{{2014, 0, 1}, {2015, 1, 1}, {2016, 2, 3}, {2017, 3, 3}};
  CHECK_NOTHROW(Chain(recs, Provenance::synthetic));
  recs[3].difficulty = 4;
  CHECK_THROWS_AS(Chain(recs, Provenance::synthetic), StructuralError);
}

TEST_CASE("non-raw chains must be non-decreasing") {
  CHECK_NOTHROW(chain_from_times({0, 10, 5}, Provenance::raw));
  CHECK_THROWS_AS(chain_from_times({0, 10, 5}, Provenance::cleaned_lr), StructuralError);
  CHECK_NOTHROW(chain_from_times({0, 10, 10}, Provenance::synthetic));
}

TEST_CASE("format_chain_csv round-trips") {
  const Chain c = chain_from_times({1262131200, 1262131800.25, 1262132400}, Provenance::synthetic, 1.5);
  const Chain back = parse_chain(format_chain_csv(c));
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].timestamp == c[i].timestamp);
    CHECK(back[i].difficulty == c[i].difficulty);
  }
  CHECK(format_chain_csv(c).find("1262131200,") != std::string::npos);
}

TEST_CASE("scan_negative_interarrivals") {
  CHECK(scan_negative_interarrivals(chain_from_times({0, 10, 5, 20})) == std::vector<std::uint64_t>{2});
  CHECK(scan_negative_interarrivals(chain_from_times({0, 10, 20})).empty());
  CHECK(scan_negative_interarrivals(chain_from_times({0, 10, 10})).empty());
}

TEST_CASE("lis_intersection on the displaced-pair pattern") {
  const auto flags = lis_intersection(kDisplaced);
  const std::vector<bool> expected{true, true, false, false, true, true, true, true};
  CHECK(flags == expected);
}

TEST_CASE("lis_intersection simple cases") {
  const std::vector<double> sorted{1, 2, 3, 4, 5};
  CHECK(lis_intersection(sorted) == std::vector<bool>(5, true));
  const std::vector<double> swap{10, 30, 20, 40};
  CHECK(lis_intersection(swap) == std::vector<bool>{true, false, false, true});
  const std::vector<double> ties{5, 5, 5};
  CHECK(lis_intersection(ties) == std::vector<bool>(3, true));
  const std::vector<double> one{7};
  CHECK(lis_intersection(one) == std::vector<bool>{true});
}

TEST_CASE("lis_intersection matches subset enumeration") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = 1 + gen() % 12;
    std::vector<double> v(n);
    // Small value range forces ties.
    for (auto& x : v) x = static_cast<double>(gen() % (trial % 2 ? 6 : 100));
    const auto fast = lis_intersection(v);
    const auto slow = brute_force_lis_intersection(v);
    REQUIRE(fast == slow);
  }
}

TEST_CASE("lis_intersection unchanged by appending a larger element") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + gen() % 30);
    for (auto& x : v) x = static_cast<double>(gen() % 50);
    const auto before = lis_intersection(v);
    v.push_back(1000.0);
    auto after = lis_intersection(v);
    CHECK(after.back());
    after.pop_back();
    CHECK(after == before);
  }
}

TEST_CASE("flag_unreliable strategies") {
  const Chain c = chain_from_times({0, 10, 5, 20});
  CHECK(as_vector(flag_unreliable(c, CleaningStrategy::resample_adjacent_negative)) ==
        std::vector<std::uint64_t>{1, 2});
  CHECK(as_vector(flag_unreliable(c, CleaningStrategy::resample_sort_displacement)) ==
        std::vector<std::uint64_t>{1, 2});
  CHECK(as_vector(flag_unreliable(chain_from_times(kDisplaced), CleaningStrategy::resample_lis_intersection)) ==
        std::vector<std::uint64_t>{2, 3});
  // Sort displacement flags everything the two large values jumped over,
  // except the final record, which is an anchor.
  CHECK(as_vector(flag_unreliable(chain_from_times(kDisplaced), CleaningStrategy::resample_sort_displacement)) ==
        std::vector<std::uint64_t>{2, 3, 4, 5, 6});
}

TEST_CASE("strategy d against strategy c") {
  // One displaced value: d flags only that value, c flags the whole run it jumped over.
  const Chain one = chain_from_times({0, 5, 1, 2, 3, 6});
  CHECK(as_vector(flag_unreliable(one, CleaningStrategy::resample_lis_intersection)) == std::vector<std::uint64_t>{1});
  CHECK(as_vector(flag_unreliable(one, CleaningStrategy::resample_sort_displacement)) ==
        std::vector<std::uint64_t>{1, 2, 3, 4});
  // A value that keeps its sorted rank can still lie outside some longest subsequence.
  const Chain rev = chain_from_times({0, 3, 2, 1, 4});
  CHECK(as_vector(flag_unreliable(rev, CleaningStrategy::resample_lis_intersection)) ==
        std::vector<std::uint64_t>{1, 2, 3});
  CHECK(as_vector(flag_unreliable(rev, CleaningStrategy::resample_sort_displacement)) ==
        std::vector<std::uint64_t>{1, 3});
  // On noisy chains d flags fewer heights in total.
  std::mt19937_64 gen(9);
  std::size_t d_total = 0, c_total = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<double> v(3 + gen() % 40);
    double t = 0;
    for (auto& x : v) {
      t += 600;
      x = t + static_cast<double>(static_cast<int>(gen() % 4001) - 2000);
    }
    v.front() = -1e6;
    v.back() = 1e7;
    const Chain c = chain_from_times(v);
    d_total += flag_unreliable(c, CleaningStrategy::resample_lis_intersection).size();
    c_total += flag_unreliable(c, CleaningStrategy::resample_sort_displacement).size();
  }
  CHECK(d_total < c_total);
}

TEST_CASE("boundary records are never flagged") {
  const Chain c = chain_from_times({15, 10, 20, 30, 25});
  for (auto s : {CleaningStrategy::resample_adjacent_negative, CleaningStrategy::resample_sort_displacement,
                 CleaningStrategy::resample_lis_intersection}) {
    const auto f = flag_unreliable(c, s);
    CHECK(f.count(0) == 0);
    CHECK(f.count(4) == 0);
  }
  // Anchors out of order leave nothing to resample between.
  CHECK_THROWS_AS(flag_unreliable(chain_from_times({100, 10, 20, 30, 5}),
                                  CleaningStrategy::resample_lis_intersection),
                  StructuralError);
}

TEST_CASE("resample_flagged") {
  const Chain c = chain_from_times({0, 70, 30, 100});
  SUBCASE("no flags leaves the chain unchanged") {
    const Chain sorted = chain_from_times({0, 30, 70, 100});
    const auto [out, report] = resample_flagged(sorted, {}, 1);
    CHECK(out.timestamps() == sorted.timestamps());
    CHECK(report.resampled_values.empty());
    CHECK(report.unreliable_heights.empty());
  }
  SUBCASE("two flagged values between anchors") {
    const auto [out, report] = resample_flagged(c, {1, 2}, 42);
    CHECK(out[1].timestamp > 0.0);
    CHECK(out[2].timestamp < 100.0);
    CHECK(out[1].timestamp <= out[2].timestamp);
    CHECK(report.resampled_values.size() == 2);
    CHECK(report.rng_seed == 42);
    CHECK(report.rng_algorithm == "mt19937_64");
    const auto again = resample_flagged(c, {1, 2}, 42).first;
    CHECK(again.timestamps() == out.timestamps());
  }
  SUBCASE("boundary flags are rejected") {
    CHECK_THROWS_AS(resample_flagged(c, {0}, 1), PreconditionError);
    CHECK_THROWS_AS(resample_flagged(c, {3}, 1), PreconditionError);
    CHECK_THROWS_AS(resample_flagged(c, {9}, 1), PreconditionError);
  }
}

TEST_CASE("resampled single value has mean 50 between anchors 0 and 100") {
  const Chain c = chain_from_times({0, 500, 100});
  double sum = 0;
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    const double v = resample_flagged(c, {1}, static_cast<std::uint64_t>(s)).first[1].timestamp;
    REQUIRE(v > 0.0);
    REQUIRE(v < 100.0);
    sum += v;
  }
  // sd of the mean is 100/sqrt(12 n) ~ 0.09
  CHECK(sum / n == doctest::Approx(50.0).epsilon(0.02));
}

TEST_CASE("clean_lr") {
  SUBCASE("sorted chain passes through") {
    const Chain c = chain_from_times({1262131200, 1262131800, 1262132400, 1262133000});
    const auto [out, report] = clean_lr(c, kDefaultCutoff, 3);
    CHECK(out.timestamps() == c.timestamps());
    CHECK(report.resampled_values.empty());
    CHECK(out.provenance() == Provenance::cleaned_lr);
  }
  SUBCASE("displaced pair is resampled between its anchors") {
    const auto [out, report] = clean_lr(chain_from_times(kDisplaced), 0.0, 8);
    REQUIRE(report.resampled_values.size() == 2);
    for (const auto& [h, v] : report.resampled_values) {
      CHECK(v > 20.0);
      CHECK(v < 30.0);
    }
  }
  SUBCASE("cutoff drops the prefix") {
    const auto [out, report] = clean_lr(chain_from_times({5, 1, 100, 200, 300}), 100.0, 1);
    CHECK(out.size() == 3);
    CHECK(out.front().height == 2);
  }
  SUBCASE("everything before the cutoff") {
    CHECK_THROWS_AS(clean_lr(chain_from_times({1, 2, 3}), 100.0, 1), StructuralError);
  }
}

TEST_CASE("clean_lr output is monotone and idempotent") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(2 + gen() % 60);
    double t = 0;
    for (auto& x : v) {
      t += 600;
      x = t + static_cast<double>(static_cast<int>(gen() % 7201) - 3600);
    }
    v.front() -= 1e5;
    v.back() += 1e5;
    const Chain raw = chain_from_times(v);
    const auto [once, r1] = clean_lr(raw, -1e18, trial);
    const auto ts = once.timestamps();
    CHECK(std::is_sorted(ts.begin(), ts.end()));
    CHECK(once.size() == raw.size());
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i].height == raw[i].height);
    const auto [twice, r2] = clean_lr(once, -1e18, trial + 1);
    CHECK(r2.resampled_values.empty());
    CHECK(twice.timestamps() == ts);
  }
}

TEST_CASE("clean with baseline strategies") {
  const Chain c = chain_from_times({0, 10, 5, 20});
  CHECK(clean(c, CleaningStrategy::ignore, 1).first.timestamps() == c.timestamps());
  CHECK(clean(c, CleaningStrategy::reorder, 1).first.timestamps() == std::vector<double>{0, 5, 10, 20});
  const auto [b, rep] = clean(c, CleaningStrategy::resample_adjacent_negative, 1);
  CHECK(rep.resampled_values.size() == 2);
  const auto ts = b.timestamps();
  CHECK(std::is_sorted(ts.begin(), ts.end()));
  CHECK(parse_strategy("lis") == CleaningStrategy::resample_lis_intersection);
  CHECK_THROWS_AS(parse_strategy("magic"), ParameterError);
}
