#pragma once

#include <cmath>
#include <numbers>
#include <string_view>

namespace blockarrival {

/// Propagation-delay model: the fraction of the global hash rate that is
/// mining on top of the latest block, as a function of the time elapsed since
/// that block arrived.
///
/// `exp_ramp` uses the fraction 1 - e^{-c t} (c > 0, median delay ln2 / c).
struct DelayModel {
  enum class Kind { none, constant, exp_ramp };

  Kind kind = Kind::none;
  double dead_time = 0.0;  // seconds, constant kind
  double c = 0.0;          // per second, exp_ramp kind

  static DelayModel none() { return {}; }
  static DelayModel constant(double dead_time);
  static DelayModel exp_ramp(double c);
  static DelayModel exp_ramp_from_median(double median_seconds);

  bool present() const { return kind != Kind::none; }
  double median() const;
  /// Mean time before a new block is fully adopted: dead_time or 1/c.
  double mean() const;
  /// Effective fraction of hash power after `elapsed` seconds, in [0, 1].
  double factor(double elapsed) const {
    switch (kind) {
      case Kind::none:
        return 1.0;
      case Kind::constant:
        return elapsed < dead_time ? 0.0 : 1.0;
      case Kind::exp_ramp:
        return -std::expm1(-c * elapsed);
    }
    return 1.0;
  }
};

std::string_view to_string(DelayModel::Kind k);

}  // namespace blockarrival
