#include "war/correction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "war/errors.hpp"

namespace war {

double correction_residual(double x, double p, std::size_t length, double full_type_count,
                           double sampled_instances, double zero_observed) {
  const double miss = 1.0 - std::pow(p, static_cast<double>(length) - 1.0);
  const double scaled = sampled_instances / std::pow(p, static_cast<double>(length));
  double survive_term = 0.0;  // x * miss^(scaled / x)
  if (miss <= 0.0) {
    survive_term = 0.0;
  } else if (scaled == 0.0) {
    survive_term = x;
  } else if (x > 0.0) {
    survive_term = x * std::exp(scaled / x * std::log(miss));
  }
  return p * (full_type_count - x + survive_term) - zero_observed;
}

namespace {

[[noreturn]] void throw_non_finite(double p, std::size_t length, double n, double inst,
                                   double zero, double x) {
  std::ostringstream msg;
  msg << "non-finite correction residual at x=" << x << " (p=" << p << ", L=" << length
      << ", N=" << n << ", instances=" << inst << ", zero_observed=" << zero << ")";
  throw NumericError(msg.str());
}

}  // namespace

CorrectionResult solve_correction(double p, std::size_t length, double full_type_count,
                                  double sampled_instances, double zero_observed,
                                  double observed_covered, const CorrectionOptions& options) {
  CorrectionResult result;
  if (p == 1.0) {
    result.covered = full_type_count - zero_observed;
    return result;
  }

  auto f = [&](double x) {
    const double v =
        correction_residual(x, p, length, full_type_count, sampled_instances, zero_observed);
    if (!std::isfinite(v)) {
      throw_non_finite(p, length, full_type_count, sampled_instances, zero_observed, x);
    }
    return v;
  };

  auto uncorrected = [&] {
    result.fallback = true;
    result.covered = std::min(observed_covered / p, full_type_count);
    return result;
  };

  double a = std::min(std::max(observed_covered, 1.0), full_type_count);
  double b = full_type_count;
  double fa = f(a);
  double fb = f(b);
  const double tol = options.residual_tolerance;
  if (std::abs(fa) <= tol) {
    result.covered = a;
    return result;
  }
  if (std::abs(fb) <= tol) {
    result.covered = b;
    return result;
  }
  if ((fa > 0.0) == (fb > 0.0)) return uncorrected();

  // Brent's method (inverse quadratic interpolation with bisection safeguard).
  double c = a, fc = fa;
  double d = b - a, e = d;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double xtol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
    const double half = 0.5 * (c - b);
    if (std::abs(fb) <= tol || std::abs(half) <= xtol) break;

    if (std::abs(e) >= xtol && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa;
      double P, Q;
      if (a == c) {
        P = 2.0 * half * s;
        Q = 1.0 - s;
      } else {
        const double q = fa / fc;
        const double r = fb / fc;
        P = s * (2.0 * half * q * (q - r) - (b - a) * (r - 1.0));
        Q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (P > 0.0) Q = -Q;
      P = std::abs(P);
      if (2.0 * P < std::min(3.0 * half * Q - std::abs(xtol * Q), std::abs(e * Q))) {
        e = d;
        d = P / Q;
      } else {
        d = half;
        e = d;
      }
    } else {
      d = half;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > xtol) ? d : (half > 0.0 ? xtol : -xtol);
    fb = f(b);
  }

  // Iteration budget exhausted: finish by bisection on the remaining bracket.
  if (std::abs(fb) > tol && it >= options.max_iterations) {
    double lo = std::min(b, c), hi = std::max(b, c);
    double flo = f(lo);
    for (int k = 0; k < 200 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi; ++k) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if (std::abs(fm) <= tol) {
        lo = hi = mid;
        break;
      }
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    b = 0.5 * (lo + hi);
  }
  result.covered = b;
  result.iterations = it;
  return result;
}

}  // namespace war
