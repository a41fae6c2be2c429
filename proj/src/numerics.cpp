#include "blockarrival/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <utility>

#include "blockarrival/errors.hpp"

namespace blockarrival::numerics {

double solve_bracketed(const std::function<double(double)>& f,
                       const std::function<double(double)>& df, double lo, double hi,
                       double xtol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw NumericError("root not bracketed");
  // Orient so that f(lo) < 0 < f(hi).
  if (flo > 0) {
    std::swap(lo, hi);
    std::swap(flo, fhi);
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx < 0)
      lo = x;
    else
      hi = x;
    const double d = df(x);
    double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
    const double a = std::min(lo, hi);
    const double b = std::max(lo, hi);
    if (!(next > a && next < b)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= xtol || std::fabs(hi - lo) <= xtol) return next;
    x = next;
  }
  return x;
}

double solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                       double xtol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw NumericError("root not bracketed");
  // Illinois-modified regula falsi, with bisection every third step.
  int side = 0;
  for (int it = 0; it < max_iter; ++it) {
    double x = (it % 3 == 2) ? 0.5 * (lo + hi) : (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > std::min(lo, hi) && x < std::max(lo, hi))) x = 0.5 * (lo + hi);
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0) == (fhi > 0)) {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    } else {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    }
    if (std::fabs(hi - lo) <= xtol) return 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol,
                                                                        &err);
}

}  // namespace blockarrival::numerics
