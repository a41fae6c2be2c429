#pragma once

#include <compare>

namespace blockarrival {

/// Seconds in a fortnight: the design duration of one 2016-block segment.
inline constexpr double kSecondsPerFortnight = 1209600.0;
inline constexpr int kBlocksPerSegment = 2016;
inline constexpr double kTargetBlockSeconds = 600.0;
/// Expected hashes per block at difficulty 1.
inline constexpr double kHashesPerDifficulty = 4294967296.0;  // 2^32

/// A double tagged with its physical unit. Arithmetic is only defined
/// between quantities of the same unit; conversions are explicit.
template <class Tag>
class Quantity {
 public:
  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : value_(v) {}
  constexpr double value() const { return value_; }

  constexpr Quantity operator+(Quantity o) const { return Quantity(value_ + o.value_); }
  constexpr Quantity operator-(Quantity o) const { return Quantity(value_ - o.value_); }
  constexpr Quantity operator*(double s) const { return Quantity(value_ * s); }
  constexpr Quantity operator/(double s) const { return Quantity(value_ / s); }
  constexpr double operator/(Quantity o) const { return value_ / o.value_; }
  constexpr auto operator<=>(const Quantity&) const = default;

 private:
  double value_ = 0.0;
};

struct SecondsTag {};
struct FortnightsTag {};
struct PerSecondTag {};
struct PerFortnightTag {};

using Seconds = Quantity<SecondsTag>;
using Fortnights = Quantity<FortnightsTag>;
/// Growth rate of log hash rate, per second.
using PerSecond = Quantity<PerSecondTag>;
/// Growth rate of log hash rate, per fortnight.
using PerFortnight = Quantity<PerFortnightTag>;

constexpr Fortnights to_fortnights(Seconds s) { return Fortnights(s.value() / kSecondsPerFortnight); }
constexpr Seconds to_seconds(Fortnights f) { return Seconds(f.value() * kSecondsPerFortnight); }
constexpr PerFortnight to_per_fortnight(PerSecond a) { return PerFortnight(a.value() * kSecondsPerFortnight); }
constexpr PerSecond to_per_second(PerFortnight a) { return PerSecond(a.value() / kSecondsPerFortnight); }

}  // namespace blockarrival
