#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "betasel/error.hpp"
#include "betasel/special.hpp"

namespace betasel {

// Inverse-link outputs are clamped into [kMuEps, 1-kMuEps] so the likelihood
// stays evaluable when the optimizer probes extreme linear predictors.
constexpr double kMuEps = 1e-12;

enum class link_kind { logit, probit, loglog, cloglog, cauchy, identity };

inline const char* link_name(link_kind kind) {
  switch (kind) {
    case link_kind::logit: return "logit";
    case link_kind::probit: return "probit";
    case link_kind::loglog: return "loglog";
    case link_kind::cloglog: return "cloglog";
    case link_kind::cauchy: return "cauchy";
    case link_kind::identity: return "identity";
  }
  return "?";
}

inline link_kind link_from_name(std::string_view name) {
  if (name == "logit") return link_kind::logit;
  if (name == "probit") return link_kind::probit;
  if (name == "loglog") return link_kind::loglog;
  if (name == "cloglog") return link_kind::cloglog;
  if (name == "cauchy") return link_kind::cauchy;
  if (name == "identity") return link_kind::identity;
  fail(errc::parse, "unknown link name: " + std::string(name));
}

namespace detail {
inline void check_unit_open(link_kind kind, double m, const char* fn) {
  if (kind != link_kind::identity && !(m > 0.0 && m < 1.0))
    fail(errc::validation,
         std::string(fn) + "(" + link_name(kind) + "): argument must lie in (0,1), got " +
             std::to_string(m));
}
}  // namespace detail

/// g(m): maps (0,1) to the real line (identity passes through).
inline double link_eval(link_kind kind, double m) {
  detail::check_unit_open(kind, m, "link_eval");
  switch (kind) {
    case link_kind::logit: return std::log(m) - std::log1p(-m);
    case link_kind::probit: return normal_quantile(m);
    case link_kind::loglog: return -std::log(-std::log(m));
    case link_kind::cloglog: return std::log(-std::log1p(-m));
    case link_kind::cauchy: return std::tan(M_PI * (m - 0.5));
    case link_kind::identity: return m;
  }
  return 0.0;
}

/// g^{-1}(eta), clamped into [kMuEps, 1-kMuEps].
inline double link_inverse(link_kind kind, double eta) {
  if (!std::isfinite(eta))
    fail(errc::validation, "link_inverse: eta must be finite");
  double m = 0.0;
  switch (kind) {
    case link_kind::logit:
      m = (eta >= 0.0) ? 1.0 / (1.0 + std::exp(-eta))
                       : std::exp(eta) / (1.0 + std::exp(eta));
      break;
    case link_kind::probit: m = normal_cdf(eta); break;
    case link_kind::loglog: m = std::exp(-std::exp(-eta)); break;
    case link_kind::cloglog: m = -std::expm1(-std::exp(eta)); break;
    case link_kind::cauchy: m = 0.5 + std::atan(eta) / M_PI; break;
    case link_kind::identity: m = eta; break;
  }
  return std::min(1.0 - kMuEps, std::max(kMuEps, m));
}

/// g'(m); nonzero on (0,1).
inline double link_deriv(link_kind kind, double m) {
  detail::check_unit_open(kind, m, "link_deriv");
  switch (kind) {
    case link_kind::logit: return 1.0 / (m * (1.0 - m));
    case link_kind::probit: return 1.0 / normal_pdf(normal_quantile(m));
    case link_kind::loglog: return -1.0 / (m * std::log(m));
    case link_kind::cloglog: return -1.0 / ((1.0 - m) * std::log(1.0 - m));
    case link_kind::cauchy: {
      const double g = std::tan(M_PI * (m - 0.5));
      return M_PI * (1.0 + g * g);
    }
    case link_kind::identity: return 1.0;
  }
  return 0.0;
}

}  // namespace betasel
