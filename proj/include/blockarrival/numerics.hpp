#pragma once

#include <cmath>
#include <functional>

namespace blockarrival::numerics {

/// Root of a monotone function on [lo, hi] by Newton steps safeguarded with
/// bisection. `f` and `df` must be consistent; the bracket must contain a sign
/// change. Converges when the bracket or step shrinks below `xtol`.
double solve_bracketed(const std::function<double(double)>& f,
                       const std::function<double(double)>& df, double lo, double hi,
                       double xtol, int max_iter = 300);

/// Root of a monotone function on [lo, hi] by bisection + secant (no derivative).
double solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                       double xtol, int max_iter = 300);

/// Adaptive Gauss-Kronrod (61 point) integral of `f` over [a, b]; `b` may be +inf.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace blockarrival::numerics
