#pragma once

#include <string>
#include <vector>

#include "betasel/diagnostics.hpp"
#include "betasel/json_writer.hpp"
#include "betasel/selection.hpp"
#include "betasel/simulation.hpp"

namespace betasel {

namespace detail {

inline jval names_array(const std::vector<int>& cols, const dataset& data) {
  jval arr = jval::array();
  for (int c : cols) arr.push(data.names[static_cast<std::size_t>(c)]);
  return arr;
}

inline jval spec_json(const model_spec& spec, const dataset& data) {
  jval mean = jval::object();
  mean.set("link", link_name(spec.mean_link));
  mean.set("intercept", spec.intercept_mean);
  mean.set("columns", names_array(spec.mean_cols, data));
  jval disp = jval::object();
  disp.set("link", link_name(spec.disp_link));
  disp.set("intercept", spec.intercept_disp);
  disp.set("columns", names_array(spec.disp_cols, data));
  jval out = jval::object();
  out.set("mean", std::move(mean));
  out.set("disp", std::move(disp));
  return out;
}

inline jval vector_json(const Eigen::VectorXd& v) {
  jval arr = jval::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push(v[i]);
  return arr;
}

inline jval criterion_json(const criterion_report& report) {
  jval out = jval::object();
  out.set("name", criterion_name(report.kind));
  out.set("value", report.value);
  out.set("w_requested", report.w_requested);
  out.set("w_succeeded", report.w_succeeded);
  if (report.bias_term)
    out.set("bias_term", *report.bias_term);
  out.set("seed", report.seed);
  return out;
}

}  // namespace detail

inline jval fit_report_json(const dataset& data, const model_spec& spec,
                            const fit_result& fitted,
                            const std::vector<evaluated_criterion>& criteria,
                            std::uint64_t seed, int W) {
  jval out = jval::object();
  out.set("command", "fit");
  out.set("n", static_cast<std::int64_t>(data.n()));
  out.set("spec", detail::spec_json(spec, data));
  out.set("converged", fitted.converged);
  out.set("iterations", fitted.iterations);
  out.set("loglik", fitted.loglik);
  out.set("grad_norm", fitted.grad_norm);
  out.set("beta", detail::vector_json(fitted.theta.beta));
  out.set("gamma", detail::vector_json(fitted.theta.gamma));
  out.set("std_errors", detail::vector_json(fitted.std_errors));
  if (!criteria.empty()) {
    jval arr = jval::array();
    for (const auto& entry : criteria) {
      if (entry.ok) {
        arr.push(detail::criterion_json(entry.report));
      } else {
        jval failed = jval::object();
        failed.set("name", criterion_name(entry.kind));
        failed.set("error", entry.message);
        arr.push(std::move(failed));
      }
    }
    out.set("criteria", std::move(arr));
  }
  out.set("seed", seed);
  out.set("w", W);
  return out;
}

inline jval diagnostics_json(const pseudo_r2_result& r2, const residuals_result& res) {
  jval out = jval::object();
  out.set("r2_fc", r2.r2_fc);
  out.set("r2_lr", r2.r2_lr);
  out.set("r2_warning", r2.warned);
  out.set("residuals_w2", detail::vector_json(res.residuals));
  out.set("leverage", detail::vector_json(res.leverage));
  return out;
}

inline jval selection_report_json(const dataset& data, const selection_result& result) {
  jval out = jval::object();
  out.set("command", "select");
  out.set("criterion", criterion_name(result.criterion));
  jval winner = detail::spec_json(result.winner, data);
  out.set("winner", std::move(winner));
  jval arr = jval::array();
  for (const auto& cand : result.per_candidate) {
    jval entry = jval::object();
    entry.set("spec", detail::spec_json(cand.spec, data));
    entry.set("step", cand.step);
    entry.set("k", cand.k);
    entry.set("converged", cand.converged);
    entry.set("loglik", cand.fit_ok ? jval(cand.loglik) : jval());
    entry.set("value", cand.criterion_ok ? jval(cand.value) : jval());
    if (!cand.note.empty()) entry.set("note", cand.note);
    arr.push(std::move(entry));
  }
  out.set("candidates", std::move(arr));
  out.set("ties_broken", result.ties_broken);
  out.set("seed", result.seed);
  out.set("w", result.W);
  return out;
}

inline jval simulation_report_json(const simulation_report& report) {
  jval out = jval::object();
  out.set("command", "simulate");
  out.set("dgp", report.dgp);
  out.set("n", report.n);
  out.set("reps", report.reps);
  out.set("w", report.W);
  out.set("mode", select_mode_name(report.mode));
  jval arr = jval::array();
  for (std::size_t c = 0; c < report.criteria.size(); ++c) {
    jval entry = jval::object();
    entry.set("criterion", criterion_name(report.criteria[c]));
    entry.set("under", report.per_criterion[c].under);
    entry.set("correct", report.per_criterion[c].correct);
    entry.set("over", report.per_criterion[c].over);
    entry.set("failed", report.per_criterion[c].failed);
    arr.push(std::move(entry));
  }
  out.set("frequencies", std::move(arr));
  out.set("failures", report.failures);
  out.set("seed", report.seed);
  return out;
}

/// Frequency table: one row per criterion with
/// under / correct / over counts.
inline std::string simulation_report_csv(const simulation_report& report) {
  std::string out = "criterion,under,correct,over,failed\n";
  for (std::size_t c = 0; c < report.criteria.size(); ++c) {
    out += criterion_name(report.criteria[c]);
    out += ',' + std::to_string(report.per_criterion[c].under);
    out += ',' + std::to_string(report.per_criterion[c].correct);
    out += ',' + std::to_string(report.per_criterion[c].over);
    out += ',' + std::to_string(report.per_criterion[c].failed);
    out += '\n';
  }
  return out;
}

inline jval envelope_json(const envelope_result& env) {
  jval out = jval::object();
  out.set("command", "envelope");
  out.set("simulations", env.requested);
  out.set("succeeded", env.succeeded);
  out.set("normal_quantile", detail::vector_json(env.normal_quantile));
  out.set("observed", detail::vector_json(env.observed));
  out.set("lower", detail::vector_json(env.lower));
  out.set("median", detail::vector_json(env.median));
  out.set("upper", detail::vector_json(env.upper));
  return out;
}

/// Plot-ready CSV: rank, normal_quantile, observed, lower, median, upper.
inline std::string envelope_csv(const envelope_result& env) {
  std::string out = "rank,normal_quantile,observed,lower,median,upper\n";
  char buf[200];
  for (Eigen::Index t = 0; t < env.observed.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long>(t + 1), env.normal_quantile[t], env.observed[t],
                  env.lower[t], env.median[t], env.upper[t]);
    out += buf;
  }
  return out;
}

}  // namespace betasel
