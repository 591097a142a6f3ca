#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "betasel/error.hpp"

namespace betasel {

/// log Γ(u) for u > 0.
inline double log_gamma(double u) {
  if (!(u > 0.0) || !std::isfinite(u))
    fail(errc::validation, "log_gamma: argument must be positive and finite, got " +
                               std::to_string(u));
#if defined(__unix__) || defined(__APPLE__)
  int sign = 0;
  return ::lgamma_r(u, &sign);
#else
  return std::lgamma(u);
#endif
}

namespace detail {

// Shift the argument above the asymptotic-series threshold, accumulating the
// recurrence terms, then evaluate the Bernoulli tail.
constexpr double kPsiSeriesCut = 10.0;

}  // namespace detail

/// Digamma ψ(u) = d log Γ(u) / du for u > 0.
inline double digamma(double u) {
  if (!(u > 0.0) || !std::isfinite(u))
    fail(errc::validation, "digamma: argument must be positive and finite, got " +
                               std::to_string(u));
  double result = 0.0;
  while (u < detail::kPsiSeriesCut) {
    result -= 1.0 / u;  // psi(u) = psi(u+1) - 1/u
    u += 1.0;
  }
  const double inv = 1.0 / u;
  const double inv2 = inv * inv;
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
  return result + std::log(u) - 0.5 * inv - tail;
}

/// Trigamma ψ'(u) for u > 0; strictly positive.
inline double trigamma(double u) {
  if (!(u > 0.0) || !std::isfinite(u))
    fail(errc::validation, "trigamma: argument must be positive and finite, got " +
                               std::to_string(u));
  double result = 0.0;
  while (u < detail::kPsiSeriesCut) {
    result += 1.0 / (u * u);  // psi'(u) = psi'(u+1) + 1/u^2
    u += 1.0;
  }
  const double inv = 1.0 / u;
  const double inv2 = inv * inv;
  const double tail =
      1.0 +
      inv * (0.5 +
             inv * (1.0 / 6.0 -
                    inv2 * (1.0 / 30.0 -
                            inv2 * (1.0 / 42.0 -
                                    inv2 * (1.0 / 30.0 -
                                            inv2 * (5.0 / 66.0 -
                                                    inv2 * (691.0 / 2730.0 -
                                                            inv2 * (7.0 / 6.0))))))));
  return result + inv * tail;
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal quantile (Wichura's PPND16); p in (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0) && !(p < 1.0))
    fail(errc::validation, "normal_quantile: p must lie in (0,1)");
  if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
  if (!(p < 1.0)) return std::numeric_limits<double>::infinity();

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -value : value;
}

/// Standard normal density.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace betasel
