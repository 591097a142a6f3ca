#pragma once

// Composition root shared by the CLI and the end-to-end tests: resolves a
// RunConfig into library calls, owns the thread budget, writes the report.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "betasel/csv.hpp"
#include "betasel/report.hpp"

namespace betasel {

enum class run_command { fit, select, simulate, envelope };

struct run_config {
  run_command command = run_command::fit;

  // data ingestion
  std::string data_path;
  std::string y_column;
  std::string y_denominator;
  std::vector<std::string> derive;  // "name=a*b" / "name=a^2"

  // submodels (column names; pools for selection)
  std::vector<std::string> mean_columns;
  std::vector<std::string> disp_columns;
  std::string mean_link = "logit";
  std::string disp_link = "logit";

  // selection
  std::string scheme = "two_step";  // joint | mean_only | disp_only | two_step
  std::string nesting = "exhaustive";

  // simulation
  std::string dgp = "model7";
  int n = 40;
  int reps = 200;
  std::string sim_mode = "mean_only";

  // shared knobs
  std::vector<std::string> criteria;  // names; "all" expands
  int W = 200;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 -> BETASEL_THREADS env var -> 1
  int envelope_sims = 100;
  bool diagnostics = false;

  std::string output;           // report path; empty -> stdout
  std::string format = "json";  // json | csv
};

namespace detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BETASEL_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

inline dataset load_dataset(const run_config& config) {
  csv_ingest_options opts;
  opts.y_column = config.y_column;
  opts.y_denominator = config.y_denominator;
  for (const auto& text : config.derive) opts.derive.push_back(parse_derive(text));
  return ingest_csv(config.data_path, opts);
}

inline std::vector<int> resolve_columns(const dataset& data,
                                        const std::vector<std::string>& names) {
  std::vector<int> cols;
  cols.reserve(names.size());
  for (const auto& name : names) cols.push_back(data.column_index(name));
  return cols;
}

inline nesting_kind nesting_from_name(const std::string& name) {
  if (name == "sequential" || name == "seq") return nesting_kind::sequential;
  if (name == "exhaustive") return nesting_kind::exhaustive;
  fail(errc::parse, "unknown nesting: " + name);
}

inline void write_report(const run_config& config, const std::string& payload) {
  if (config.output.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(config.output, std::ios::binary);
  if (!out) fail(errc::io, "cannot write '" + config.output + "'");
  out << payload;
  if (!out) fail(errc::io, "write failed for '" + config.output + "'");
}

inline std::string run_fit(const run_config& config, int threads) {
  const dataset data = load_dataset(config);
  model_spec spec;
  spec.mean_cols = resolve_columns(data, config.mean_columns);
  spec.disp_cols = resolve_columns(data, config.disp_columns);
  spec.mean_link = link_from_name(config.mean_link);
  spec.disp_link = link_from_name(config.disp_link);

  const model_frame frame = model_frame::build(data, spec);
  const fit_result fitted = fit(frame);
  if (!fitted.converged)
    fail(errc::convergence, "fit did not converge (grad_norm " +
                                std::to_string(fitted.grad_norm) + " after " +
                                std::to_string(fitted.iterations) + " iterations)");

  std::vector<evaluated_criterion> criteria;
  if (!config.criteria.empty()) {
    const auto kinds = criteria_from_names(config.criteria);
    criteria = evaluate_criteria(frame, fitted, kinds, config.W, config.seed,
                                 stream_id(0, 1, 0), threads);
  }

  if (config.diagnostics && config.format == "csv") {
    const auto env = simulated_envelope(data, spec, fitted, config.envelope_sims,
                                        config.seed, threads);
    return envelope_csv(env);
  }

  jval report = fit_report_json(data, spec, fitted, criteria, config.seed, config.W);
  if (config.diagnostics) {
    const fit_result null_fit = fit_null_model(data, spec);
    const auto r2 = pseudo_r2(data, spec, fitted, null_fit);
    const auto res = residuals_w2(data, spec, fitted);
    report.set("diagnostics", diagnostics_json(r2, res));
  }
  return report.dump() + "\n";
}

inline std::string run_select(const run_config& config, int threads) {
  const dataset data = load_dataset(config);
  if (config.criteria.size() != 1 || config.criteria[0] == "all")
    fail(errc::validation, "select: exactly one criterion is required");
  const criterion_kind criterion = criterion_from_name(config.criteria[0]);
  const auto mode = select_mode_from_name(config.scheme);
  const auto nesting = nesting_from_name(config.nesting);
  const auto mean_pool = resolve_columns(data, config.mean_columns);
  const auto disp_pool = resolve_columns(data, config.disp_columns);

  select_options opts;
  opts.threads = threads;

  selection_result result;
  if (mode == select_mode::two_step) {
    result = select_two_step(data, mean_pool, disp_pool, nesting,
                             link_from_name(config.mean_link),
                             link_from_name(config.disp_link), criterion, config.W,
                             config.seed, opts);
  } else {
    candidate_set cs;
    cs.mode = mode;
    cs.mean_pool = mean_pool;
    cs.disp_pool = disp_pool;
    cs.nesting = nesting;
    cs.mean_link = link_from_name(config.mean_link);
    cs.disp_link = link_from_name(config.disp_link);
    if (mode == select_mode::mean_only) cs.fixed_disp_cols = disp_pool;
    if (mode == select_mode::disp_only) cs.fixed_mean_cols = mean_pool;
    result = select(data, cs, criterion, config.W, config.seed, opts);
  }
  return selection_report_json(data, result).dump() + "\n";
}

inline std::string run_simulate(const run_config& config, int threads) {
  const auto preset = dgp_by_name(config.dgp);
  const auto kinds = criteria_from_names(config.criteria.empty()
                                             ? std::vector<std::string>{"all"}
                                             : config.criteria);
  experiment_options opts;
  opts.threads = threads;
  const auto report = run_experiment(preset, config.n, config.reps, config.W,
                                     select_mode_from_name(config.sim_mode), kinds,
                                     config.seed, opts);
  if (config.format == "csv") return simulation_report_csv(report);
  return simulation_report_json(report).dump() + "\n";
}

inline std::string run_envelope(const run_config& config, int threads) {
  const dataset data = load_dataset(config);
  model_spec spec;
  spec.mean_cols = resolve_columns(data, config.mean_columns);
  spec.disp_cols = resolve_columns(data, config.disp_columns);
  spec.mean_link = link_from_name(config.mean_link);
  spec.disp_link = link_from_name(config.disp_link);
  const fit_result fitted = fit(data, spec);
  if (!fitted.converged) fail(errc::convergence, "envelope: fit did not converge");
  const auto env =
      simulated_envelope(data, spec, fitted, config.envelope_sims, config.seed, threads);
  if (config.format == "csv") return envelope_csv(env);
  return envelope_json(env).dump() + "\n";
}

}  // namespace detail

/// Execute a run; returns the process exit code. Reports are byte-identical
/// for identical (config, seed) regardless of the thread count.
inline int run(const run_config& config) {
  try {
    const int threads = detail::resolve_threads(config.threads);
    std::string payload;
    switch (config.command) {
      case run_command::fit: payload = detail::run_fit(config, threads); break;
      case run_command::select: payload = detail::run_select(config, threads); break;
      case run_command::simulate: payload = detail::run_simulate(config, threads); break;
      case run_command::envelope: payload = detail::run_envelope(config, threads); break;
    }
    detail::write_report(config, payload);
    return 0;
  } catch (const error& err) {
    jval out = jval::object();
    out.set("error",
            jval::object().set("category", errc_name(err.category())).set("message", err.what()));
    std::cerr << out.dump() << "\n";
    return errc_exit_code(err.category());
  } catch (const std::exception& ex) {
    jval out = jval::object();
    out.set("error", jval::object().set("category", "internal").set("message", ex.what()));
    std::cerr << out.dump() << "\n";
    return 1;
  }
}

}  // namespace betasel
