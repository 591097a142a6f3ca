#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "betasel/fit.hpp"
#include "betasel/parallel.hpp"
#include "betasel/rng.hpp"

namespace betasel {

struct pseudo_r2_result {
  double r2_lr = 0.0;
  double r2_fc = 0.0;
  bool warned = false;  // fitted loglik fell below the null loglik
};

/// Intercept-only (both submodels) fit sharing the full model's links.
inline fit_result fit_null_model(const dataset& data, const model_spec& spec,
                                 const fit_options& opts = {}) {
  model_spec null_spec;
  null_spec.mean_link = spec.mean_link;
  null_spec.disp_link = spec.disp_link;
  null_spec.intercept_disp = true;
  if (spec.constant_dispersion()) null_spec.disp_link = link_kind::identity;
  return fit(data, null_spec, opts);
}

/// Likelihood-ratio pseudo-R2 and the squared correlation between g(y) and
/// the fitted mean linear predictor.
inline pseudo_r2_result pseudo_r2(const dataset& data, const model_spec& spec,
                                  const fit_result& fitted, const fit_result& null_fit) {
  pseudo_r2_result out;
  const double n = static_cast<double>(data.n());
  out.warned = fitted.loglik < null_fit.loglik;
  out.r2_lr = 1.0 - std::exp((2.0 / n) * (null_fit.loglik - fitted.loglik));

  const Eigen::MatrixXd X = design_mean(data, spec);
  const Eigen::VectorXd eta = X * fitted.theta.beta;
  Eigen::VectorXd gy(data.n());
  for (Eigen::Index t = 0; t < data.n(); ++t)
    gy[t] = link_eval(spec.mean_link, data.y[t]);

  const Eigen::VectorXd gc = gy.array() - gy.mean();
  const Eigen::VectorXd ec = eta.array() - eta.mean();
  const double denom = gc.norm() * ec.norm();
  const double corr = denom > 0.0 ? gc.dot(ec) / denom : 0.0;
  out.r2_fc = corr * corr;
  return out;
}

struct residuals_result {
  Eigen::VectorXd residuals;  // standardized weighted residual 2
  Eigen::VectorXd leverage;   // hat-matrix diagonal
};

/// r_w2 residuals: logit-scale response minus its digamma mean, standardized
/// by the trigamma variance and the GLM hat-matrix leverage built from the
/// Fisher mean-block weights.
inline residuals_result residuals_w2(const dataset& data, const model_spec& spec,
                                     const fit_result& fitted) {
  if (!fitted.converged)
    fail(errc::convergence, "residuals_w2: fit did not converge");
  const model_frame frame = model_frame::build(data, spec);
  const auto md = detail::eval_mean_disp(frame, fitted.theta);
  const auto n = frame.n();

  Eigen::VectorXd weights(n), vstar(n), mustar(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double mu = md.mu[t], phi = md.phi[t];
    const double psi1_p = trigamma(mu * phi);
    const double psi1_q = trigamma((1.0 - mu) * phi);
    const double gprime = link_deriv(spec.mean_link, mu);
    vstar[t] = psi1_p + psi1_q;
    mustar[t] = digamma(mu * phi) - digamma((1.0 - mu) * phi);
    weights[t] = phi * phi * (psi1_p + psi1_q) / (gprime * gprime);  // Phi*W diagonal
  }

  const Eigen::MatrixXd xtmx =
      frame.X.transpose() * weights.asDiagonal() * frame.X;
  Eigen::LLT<Eigen::MatrixXd> llt(xtmx);
  if (llt.info() != Eigen::Success)
    fail(errc::validation, "residuals_w2: weighted design is not positive definite");

  residuals_result out;
  out.residuals.resize(n);
  out.leverage.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::VectorXd xt = frame.X.row(t).transpose();
    const double htt = weights[t] * xt.dot(llt.solve(xt));
    if (htt >= 1.0)
      fail(errc::validation,
           "residuals_w2: degenerate leverage at observation " + std::to_string(t + 1));
    out.leverage[t] = htt;
    out.residuals[t] =
        (frame.ystar[t] - mustar[t]) / std::sqrt(vstar[t] * (1.0 - htt));
  }
  return out;
}

struct envelope_result {
  Eigen::VectorXd normal_quantile;  // half-normal plotting positions
  Eigen::VectorXd observed;         // sorted |r_w2| of the data fit
  Eigen::VectorXd lower, median, upper;
  int requested = 0;
  int succeeded = 0;
};

/// Simulated envelope for the sorted absolute residuals: simulate E response
/// vectors from the fitted model, refit each, and band the per-rank order
/// statistics (min / median / max).
inline envelope_result simulated_envelope(const dataset& data, const model_spec& spec,
                                          const fit_result& fitted, int E,
                                          std::uint64_t seed, int threads = 1) {
  if (!fitted.converged)
    fail(errc::convergence, "envelope: fit did not converge");
  if (E < 1) fail(errc::validation, "envelope: needs at least one simulation");

  const model_frame frame = model_frame::build(data, spec);
  const auto md = detail::eval_mean_disp(frame, fitted.theta);
  const auto n = frame.n();

  std::vector<Eigen::VectorXd> profiles(E);
  std::vector<char> ok(E, 0);
  parallel_for(E, threads, [&](int e) {
    rng_stream stream(seed, stream_id(static_cast<std::uint64_t>(e) + 1, 0, 0));
    Eigen::VectorXd ysim(n);
    for (Eigen::Index t = 0; t < n; ++t)
      ysim[t] = stream.beta(md.mu[t] * md.phi[t], (1.0 - md.mu[t]) * md.phi[t]);
    try {
      const model_frame sim_frame = frame.with_response(ysim);
      fit_options opts;
      opts.start = fitted.theta;
      const fit_result refit = fit(sim_frame, opts);
      if (!refit.converged) return;
      dataset sim_data{ysim, data.names, data.columns};
      const residuals_result res = residuals_w2(sim_data, spec, refit);
      Eigen::VectorXd sorted = res.residuals.cwiseAbs();
      std::sort(sorted.data(), sorted.data() + sorted.size());
      profiles[e] = std::move(sorted);
      ok[e] = 1;
    } catch (const error&) {
      // failed refits are recorded and excluded below
    }
  });

  envelope_result out;
  out.requested = E;
  for (int e = 0; e < E; ++e) out.succeeded += ok[e];
  if (out.succeeded < static_cast<int>(std::ceil(0.8 * E)))
    fail(errc::quorum, "envelope: more than 20% of the simulated refits failed (" +
                           std::to_string(E - out.succeeded) + " of " +
                           std::to_string(E) + ")");

  const residuals_result observed = residuals_w2(data, spec, fitted);
  out.observed = observed.residuals.cwiseAbs();
  std::sort(out.observed.data(), out.observed.data() + out.observed.size());

  out.normal_quantile.resize(n);
  out.lower.resize(n);
  out.median.resize(n);
  out.upper.resize(n);
  std::vector<double> rank_values;
  rank_values.reserve(out.succeeded);
  const double nd = static_cast<double>(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    out.normal_quantile[t] =
        normal_quantile((static_cast<double>(t + 1) + nd - 0.125) / (2.0 * nd + 0.5));
    rank_values.clear();
    for (int e = 0; e < E; ++e)
      if (ok[e]) rank_values.push_back(profiles[e][t]);
    std::sort(rank_values.begin(), rank_values.end());
    out.lower[t] = rank_values.front();
    out.upper[t] = rank_values.back();
    const std::size_t m = rank_values.size();
    out.median[t] = (m % 2 == 1) ? rank_values[m / 2]
                                 : 0.5 * (rank_values[m / 2 - 1] + rank_values[m / 2]);
  }
  return out;
}

}  // namespace betasel
