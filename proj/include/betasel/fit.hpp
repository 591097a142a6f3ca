#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>

#include "betasel/model.hpp"

namespace betasel {

struct fit_options {
  double tol = 1e-8;  // scaled by max(1, |loglik|)
  int max_iterations = 500;
  std::optional<param_vector> start;               // warm start when present
  std::atomic<std::int64_t>* fit_counter = nullptr;  // instrumentation hook
};

struct fit_result {
  param_vector theta;
  double loglik = 0.0;
  Eigen::MatrixXd fisher;
  Eigen::VectorXd std_errors;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

namespace detail {

// OLS of g(y) on X for beta; gamma starts at (h(sigma_tilde), 0, ..., 0) with
// sigma_tilde^2 a method-of-moments dispersion estimate from the OLS residual
// variance, clamped into [0.05, 0.95].
inline param_vector starting_values(const model_frame& frame) {
  const auto n = frame.n();
  Eigen::VectorXd gy(n);
  for (Eigen::Index t = 0; t < n; ++t)
    gy[t] = link_eval(frame.spec.mean_link, frame.y[t]);

  Eigen::VectorXd beta = frame.X.colPivHouseholderQr().solve(gy);
  const Eigen::VectorXd resid = gy - frame.X * beta;
  const double dof = std::max<double>(1.0, static_cast<double>(n - frame.r()));
  const double s2_link = resid.squaredNorm() / dof;

  double s2_sum = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double mu = link_inverse(frame.spec.mean_link, frame.X.row(t) * beta);
    const double gprime = link_deriv(frame.spec.mean_link, mu);
    s2_sum += s2_link / (gprime * gprime * mu * (1.0 - mu));
  }
  const double s2 = std::min(0.95, std::max(0.05, s2_sum / static_cast<double>(n)));
  const double sigma_tilde = std::sqrt(s2);

  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(frame.s());
  gamma[0] = link_eval(frame.spec.disp_link, sigma_tilde);
  return {beta, gamma};
}

inline bool spd_inverse(const Eigen::MatrixXd& matrix, Eigen::MatrixXd& inverse) {
  Eigen::LLT<Eigen::MatrixXd> llt(matrix);
  if (llt.info() != Eigen::Success) return false;
  inverse = llt.solve(Eigen::MatrixXd::Identity(matrix.rows(), matrix.cols()));
  return true;
}

}  // namespace detail

/// Maximum likelihood via BFGS with analytic first derivatives and a
/// backtracking Armijo line search. Deterministic for fixed inputs.
inline fit_result fit(const model_frame& frame, const fit_options& opts = {}) {
  if (frame.n() <= frame.k())
    fail(errc::validation, "fit: requires n > k");
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_x(frame.X);
    if (qr_x.rank() < frame.X.cols())
      fail(errc::validation, "fit: mean design matrix is rank deficient");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_z(frame.Z);
    if (qr_z.rank() < frame.Z.cols())
      fail(errc::validation, "fit: dispersion design matrix is rank deficient");
  }
  if (opts.fit_counter) opts.fit_counter->fetch_add(1, std::memory_order_relaxed);

  const int r = frame.r();
  const int k = frame.k();

  param_vector theta = opts.start ? *opts.start : detail::starting_values(frame);
  if (theta.beta.size() != r || theta.gamma.size() != frame.s())
    fail(errc::validation, "fit: start point dimensions do not match the spec");

  double ll = loglik_nothrow(frame, theta);
  if (!std::isfinite(ll)) {
    // fall back to the cold start if a supplied warm start is unusable
    theta = detail::starting_values(frame);
    ll = loglik_nothrow(frame, theta);
    if (!std::isfinite(ll))
      fail(errc::convergence, "fit: log-likelihood not finite at the start point");
  }
  Eigen::VectorXd grad = score(frame, theta);

  // Inverse-Hessian seed from the Fisher information: gives the search the
  // right parameter scales from the first step.
  Eigen::MatrixXd hinv;
  if (!detail::spd_inverse(fisher_info(frame, theta), hinv))
    hinv = Eigen::MatrixXd::Identity(k, k);

  auto reset_metric = [&](const param_vector& at) {
    if (!detail::spd_inverse(fisher_info(frame, at), hinv))
      hinv = Eigen::MatrixXd::Identity(k, k);
  };

  fit_result result;
  constexpr double armijo = 1e-4;
  bool just_reset = true;  // hinv was just seeded from the Fisher matrix
  int iter = 0;
  while (iter < opts.max_iterations) {
    ++iter;
    if (grad.lpNorm<Eigen::Infinity>() <= opts.tol * std::max(1.0, std::fabs(ll)) &&
        iter > 1)
      break;

    Eigen::VectorXd direction = hinv * grad;  // ascent direction
    if (!(grad.dot(direction) > 0.0)) {
      reset_metric(theta);
      just_reset = true;
      direction = hinv * grad;
      if (!(grad.dot(direction) > 0.0)) direction = grad;
    }

    // Backtracking line search on the log-likelihood; non-finite probes are
    // treated as failed and the step halved.
    double step = 1.0;
    double ll_new = -std::numeric_limits<double>::infinity();
    param_vector theta_new = theta;
    const double slope = grad.dot(direction);
    bool accepted = false;
    while (step > 1e-16) {
      const Eigen::VectorXd trial = theta.stacked() + step * direction;
      theta_new = param_vector::split(trial, r);
      ll_new = loglik_nothrow(frame, theta_new);
      if (std::isfinite(ll_new) && ll_new >= ll + armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // no representable improvement along this direction; retry once with a
      // fresh Fisher metric, then stop at the current point
      if (just_reset) break;
      reset_metric(theta);
      just_reset = true;
      continue;
    }

    const Eigen::VectorXd grad_new = score(frame, theta_new);
    const Eigen::VectorXd s_vec = step * direction;
    const Eigen::VectorXd y_vec = grad - grad_new;  // minimization convention
    const bool tiny_step = s_vec.lpNorm<Eigen::Infinity>() <= 1e-10;

    theta = theta_new;
    ll = ll_new;
    grad = grad_new;

    if (tiny_step) {
      if (just_reset) break;  // stalled even under the Fisher metric
      reset_metric(theta);
      just_reset = true;
      continue;
    }

    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
      const double rho = 1.0 / sy;
      hinv = (eye - rho * s_vec * y_vec.transpose()) * hinv *
                 (eye - rho * y_vec * s_vec.transpose()) +
             rho * s_vec * s_vec.transpose();
    }
    just_reset = false;
  }

  // Near the optimum the log-likelihood is flat to machine precision while
  // the score can still be sizeable under strong curvature, so the final
  // polish solves the score equation by Newton steps with a finite-difference
  // Jacobian of the analytic score, accepting on score-norm decrease. A fit
  // that exhausted its iteration budget is left unpolished and unconverged.
  const bool hit_cap = iter >= opts.max_iterations &&
                       grad.lpNorm<Eigen::Infinity>() >
                           opts.tol * std::max(1.0, std::fabs(ll));
  const double polish_tol = 1e-3 * opts.tol;
  for (int p = 0; !hit_cap && p < 15; ++p) {
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    if (gnorm <= polish_tol * std::max(1.0, std::fabs(ll))) break;

    Eigen::MatrixXd jacobian(k, k);
    const Eigen::VectorXd at = theta.stacked();
    bool jacobian_ok = true;
    for (int j = 0; j < k; ++j) {
      const double h = 1e-7 * std::max(1.0, std::fabs(at[j]));
      Eigen::VectorXd up = at, down = at;
      up[j] += h;
      down[j] -= h;
      const Eigen::VectorXd su = score(frame, param_vector::split(up, r));
      const Eigen::VectorXd sd = score(frame, param_vector::split(down, r));
      jacobian.col(j) = (su - sd) / (2.0 * h);
      if (!jacobian.col(j).allFinite()) {
        jacobian_ok = false;
        break;
      }
    }
    if (!jacobian_ok) break;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian);
    const Eigen::VectorXd direction = lu.solve(-grad);
    if (!direction.allFinite()) break;

    double step = 1.0;
    bool accepted = false;
    param_vector theta_new = theta;
    Eigen::VectorXd grad_new;
    while (step > 1e-4) {
      theta_new = param_vector::split(at + step * direction, r);
      const double ll_trial = loglik_nothrow(frame, theta_new);
      if (std::isfinite(ll_trial) &&
          ll_trial >= ll - 1e-10 * std::max(1.0, std::fabs(ll))) {
        grad_new = score(frame, theta_new);
        if (grad_new.lpNorm<Eigen::Infinity>() < gnorm) {
          accepted = true;
          ll = ll_trial;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
    theta = theta_new;
    grad = grad_new;
    ll = loglik_nothrow(frame, theta);
  }

  result.theta = theta;
  result.loglik = ll;
  result.iterations = iter;
  result.grad_norm = grad.lpNorm<Eigen::Infinity>();
  result.fisher = fisher_info(frame, theta);

  Eigen::MatrixXd cov;
  const bool fisher_pd = detail::spd_inverse(result.fisher, cov);
  if (fisher_pd) {
    result.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    result.std_errors =
        Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  }
  result.converged =
      result.grad_norm <= opts.tol * std::max(1.0, std::fabs(ll)) && fisher_pd;
  return result;
}

inline fit_result fit(const dataset& data, const model_spec& spec,
                      const fit_options& opts = {}) {
  return fit(model_frame::build(data, spec), opts);
}

}  // namespace betasel
