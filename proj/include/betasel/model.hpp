#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "betasel/data.hpp"
#include "betasel/special.hpp"

namespace betasel {

/// Beta log-density in the (mean, dispersion) parameterization with
/// phi = (1-sigma^2)/sigma^2 and shapes p = mu*phi, q = (1-mu)*phi.
inline double log_density(double y, double mu, double sigma) {
  if (!(y > 0.0 && y < 1.0) || !(mu > 0.0 && mu < 1.0) || !(sigma > 0.0 && sigma < 1.0))
    fail(errc::validation, "log_density: all arguments must lie strictly in (0,1)");
  const double phi = (1.0 - sigma * sigma) / (sigma * sigma);
  const double p = mu * phi;
  const double q = (1.0 - mu) * phi;
  return log_gamma(phi) - log_gamma(p) - log_gamma(q) + (p - 1.0) * std::log(y) +
         (q - 1.0) * std::log1p(-y);
}

/// Design matrices and response transforms for one (dataset, spec) pair.
/// Bootstrap refits swap the response against fixed designs.
struct model_frame {
  model_spec spec;
  Eigen::MatrixXd X;  // n x r
  Eigen::MatrixXd Z;  // n x s
  Eigen::VectorXd y;
  Eigen::VectorXd ystar;    // log(y/(1-y))
  Eigen::VectorXd log_y;    // log(y)
  Eigen::VectorXd log_1my;  // log(1-y)

  static model_frame build(const dataset& data, const model_spec& spec) {
    validate_spec(data, spec);
    model_frame frame;
    frame.spec = spec;
    frame.X = design_mean(data, spec);
    frame.Z = design_disp(data, spec);
    frame.set_response(data.y);
    return frame;
  }

  void set_response(const Eigen::VectorXd& response) {
    y = response;
    log_y = y.array().log().matrix();
    log_1my = (-y.array()).log1p().matrix();
    ystar = log_y - log_1my;
  }

  model_frame with_response(const Eigen::VectorXd& response) const {
    model_frame frame = *this;
    frame.set_response(response);
    return frame;
  }

  model_frame subset(const std::vector<int>& rows) const {
    model_frame frame;
    frame.spec = spec;
    const auto m = static_cast<Eigen::Index>(rows.size());
    frame.X.resize(m, X.cols());
    frame.Z.resize(m, Z.cols());
    Eigen::VectorXd response(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      frame.X.row(i) = X.row(rows[i]);
      frame.Z.row(i) = Z.row(rows[i]);
      response[i] = y[rows[i]];
    }
    frame.set_response(response);
    return frame;
  }

  Eigen::Index n() const { return y.size(); }
  int r() const { return static_cast<int>(X.cols()); }
  int s() const { return static_cast<int>(Z.cols()); }
  int k() const { return r() + s(); }
};

namespace detail {

// mu_t, sigma_t, phi_t at theta; values clamped into [kMuEps, 1-kMuEps].
struct mean_disp {
  Eigen::ArrayXd mu, sigma, phi;
};

inline mean_disp eval_mean_disp(const model_frame& frame, const param_vector& theta) {
  const Eigen::VectorXd eta = frame.X * theta.beta;
  const Eigen::VectorXd nu = frame.Z * theta.gamma;
  const auto n = frame.n();
  mean_disp out;
  out.mu.resize(n);
  out.sigma.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    out.mu[t] = link_inverse(frame.spec.mean_link, eta[t]);
    out.sigma[t] = link_inverse(frame.spec.disp_link, nu[t]);
  }
  out.phi = (1.0 - out.sigma.square()) / out.sigma.square();
  return out;
}

inline void check_dims(const model_frame& frame, const param_vector& theta) {
  if (theta.beta.size() != frame.r() || theta.gamma.size() != frame.s())
    fail(errc::validation, "parameter vector dimensions do not match the model spec");
}

}  // namespace detail

/// Log-likelihood; may return -inf/NaN instead of throwing (optimizer path).
inline double loglik_nothrow(const model_frame& frame, const param_vector& theta,
                             Eigen::Index* bad_index = nullptr) {
  const auto md = detail::eval_mean_disp(frame, theta);
  double total = 0.0;
  for (Eigen::Index t = 0; t < frame.n(); ++t) {
    const double phi = md.phi[t];
    const double p = md.mu[t] * phi;
    const double q = (1.0 - md.mu[t]) * phi;
    const double term = log_gamma(phi) - log_gamma(p) - log_gamma(q) +
                        (p - 1.0) * frame.log_y[t] + (q - 1.0) * frame.log_1my[t];
    if (!std::isfinite(term)) {
      if (bad_index) *bad_index = t;
      return term;
    }
    total += term;
  }
  return total;
}

inline double loglik(const model_frame& frame, const param_vector& theta) {
  detail::check_dims(frame, theta);
  Eigen::Index bad = -1;
  const double value = loglik_nothrow(frame, theta, &bad);
  if (!std::isfinite(value))
    fail(errc::validation,
         "loglik: non-finite contribution at observation " + std::to_string(bad + 1));
  return value;
}

inline double loglik(const dataset& data, const model_spec& spec,
                     const param_vector& theta) {
  return loglik(model_frame::build(data, spec), theta);
}

/// Analytic score (U_beta, U_gamma) stacked into one k-vector.
inline Eigen::VectorXd score(const model_frame& frame, const param_vector& theta) {
  detail::check_dims(frame, theta);
  const auto md = detail::eval_mean_disp(frame, theta);
  const auto n = frame.n();

  Eigen::ArrayXd mustar(n), weight_mean(n), a(n), weight_disp(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double mu = md.mu[t];
    const double sigma = md.sigma[t];
    const double phi = md.phi[t];
    mustar[t] = digamma(mu * phi) - digamma((1.0 - mu) * phi);
    const double resid = frame.ystar[t] - mustar[t];
    weight_mean[t] = phi * resid / link_deriv(frame.spec.mean_link, mu);
    a[t] = -(2.0 / (sigma * sigma * sigma)) *
           (mu * resid + frame.log_1my[t] - digamma((1.0 - mu) * phi) + digamma(phi));
    weight_disp[t] = a[t] / link_deriv(frame.spec.disp_link, sigma);
  }

  Eigen::VectorXd grad(frame.k());
  grad.head(frame.r()) = frame.X.transpose() * weight_mean.matrix();
  grad.tail(frame.s()) = frame.Z.transpose() * weight_disp.matrix();
  return grad;
}

inline Eigen::VectorXd score(const dataset& data, const model_spec& spec,
                             const param_vector& theta) {
  return score(model_frame::build(data, spec), theta);
}

/// Expected (Fisher) information, symmetric k x k, assembled from the
/// per-observation weights w_t, c_t, d_t.
inline Eigen::MatrixXd fisher_info(const model_frame& frame, const param_vector& theta) {
  detail::check_dims(frame, theta);
  const auto md = detail::eval_mean_disp(frame, theta);
  const auto n = frame.n();

  Eigen::ArrayXd wbb(n), wbg(n), wgg(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double mu = md.mu[t];
    const double sigma = md.sigma[t];
    const double phi = md.phi[t];
    const double psi1_p = trigamma(mu * phi);
    const double psi1_q = trigamma((1.0 - mu) * phi);
    const double gprime = link_deriv(frame.spec.mean_link, mu);
    const double hprime = link_deriv(frame.spec.disp_link, sigma);
    const double s2 = sigma * sigma;

    const double w = phi * (psi1_p + psi1_q) / (gprime * gprime);
    // dphi/dsigma = -2/sigma^3 < 0, hence the leading minus in the cross term.
    const double c =
        -((2.0 - 2.0 * s2) / (s2 * s2 * sigma)) * (mu * psi1_p - (1.0 - mu) * psi1_q);
    const double d = (4.0 / (s2 * s2 * s2)) *
                     (mu * mu * psi1_p + (1.0 - mu) * (1.0 - mu) * psi1_q -
                      trigamma(phi)) /
                     (hprime * hprime);

    wbb[t] = phi * w;
    wbg[t] = c / (gprime * hprime);
    wgg[t] = d;
  }

  const int r = frame.r();
  const int s = frame.s();
  Eigen::MatrixXd info(r + s, r + s);
  info.topLeftCorner(r, r) = frame.X.transpose() * wbb.matrix().asDiagonal() * frame.X;
  info.topRightCorner(r, s) = frame.X.transpose() * wbg.matrix().asDiagonal() * frame.Z;
  info.bottomLeftCorner(s, r) = info.topRightCorner(r, s).transpose();
  info.bottomRightCorner(s, s) =
      frame.Z.transpose() * wgg.matrix().asDiagonal() * frame.Z;
  info = ((info + info.transpose()) / 2.0).eval();  // exact symmetry
  return info;
}

inline Eigen::MatrixXd fisher_info(const dataset& data, const model_spec& spec,
                                   const param_vector& theta) {
  return fisher_info(model_frame::build(data, spec), theta);
}

}  // namespace betasel
