#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "betasel/selection.hpp"

namespace betasel {

/// True data-generating process: logit mean and dispersion submodels over an
/// intercept plus the first two uniform covariates.
struct dgp_preset {
  std::string name;
  Eigen::Vector3d beta_true;
  Eigen::Vector3d gamma_true;
  link_kind mean_link = link_kind::logit;
  link_kind disp_link = link_kind::logit;
  int r0 = 3;
  int s0 = 3;
};

inline dgp_preset dgp_by_name(std::string_view name) {
  dgp_preset preset;
  preset.name = std::string(name);
  if (name == "model5") {
    preset.beta_true << -1.5, 1.0, 1.0;
    preset.gamma_true << -0.7, -0.6, -0.6;
  } else if (name == "model6") {
    preset.beta_true << 1.0, -0.75, -0.25;
    preset.gamma_true << -0.7, -0.5, -0.3;
  } else if (name == "model7") {
    preset.beta_true << -1.5, 1.0, 1.0;
    preset.gamma_true << -1.1, -1.1, -1.1;
  } else if (name == "model8") {
    preset.beta_true << 1.0, -0.75, -0.25;
    preset.gamma_true << -1.45, -1.0, -0.5;
  } else {
    fail(errc::parse, "unknown DGP preset: " + std::string(name));
  }
  return preset;
}

/// Experiment design matrix: column 0 is the intercept, the rest are U(0,1)
/// draws. Generated once per experiment and shared by all replications.
inline Eigen::MatrixXd make_design(int n, int p, std::uint64_t seed) {
  if (n < 1 || p < 1) fail(errc::validation, "make_design: n and p must be positive");
  Eigen::MatrixXd design(n, p);
  design.col(0).setOnes();
  rng_stream stream(seed, stream_id(0, 0, 0));
  for (int j = 1; j < p; ++j)
    for (int t = 0; t < n; ++t) design(t, j) = stream.uniform();
  return design;
}

/// Simulate one response vector from the DGP over a fixed design; covariate
/// columns x2.. become the candidate pool of the returned dataset.
inline dataset simulate_dgp_dataset(const dgp_preset& preset, const Eigen::MatrixXd& design,
                                    std::uint64_t seed, std::uint64_t replicate) {
  const auto n = design.rows();
  rng_stream stream(seed, stream_id(replicate, 0, 0));
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double eta = design.row(t).head(3).dot(preset.beta_true);
    const double nu = design.row(t).head(3).dot(preset.gamma_true);
    const double mu = link_inverse(preset.mean_link, eta);
    const double sigma = link_inverse(preset.disp_link, nu);
    const double phi = (1.0 - sigma * sigma) / (sigma * sigma);
    y[t] = stream.beta(mu * phi, (1.0 - mu) * phi);
  }
  std::vector<std::string> names;
  for (Eigen::Index j = 1; j < design.cols(); ++j)
    names.push_back("x" + std::to_string(j + 1));
  return dataset::make(std::move(y), std::move(names), design.rightCols(design.cols() - 1));
}

enum class order_class { under, correct, over };

/// Classify a selected model against the true nested orders. Any deficient
/// active submodel dominates: it marks the winner underspecified.
inline order_class classify(const model_spec& winner, const dgp_preset& preset,
                            select_mode mode) {
  const bool mean_active = mode == select_mode::joint || mode == select_mode::mean_only;
  const bool disp_active = mode == select_mode::joint || mode == select_mode::disp_only;
  bool under = false, exact = true;
  if (mean_active) {
    if (winner.r() < preset.r0) under = true;
    exact = exact && winner.r() == preset.r0;
  }
  if (disp_active) {
    if (winner.s() < preset.s0) under = true;
    exact = exact && winner.s() == preset.s0;
  }
  if (under) return order_class::under;
  return exact ? order_class::correct : order_class::over;
}

struct order_counts {
  int under = 0;
  int correct = 0;
  int over = 0;
  int failed = 0;

  int total() const { return under + correct + over + failed; }
};

struct simulation_report {
  std::string dgp;
  int n = 0;
  int reps = 0;
  int W = 0;
  select_mode mode = select_mode::joint;
  std::vector<criterion_kind> criteria;
  std::vector<order_counts> per_criterion;  // parallel to `criteria`
  int failures = 0;                         // replications whose true-model fit failed
  std::uint64_t seed = 0;
};

struct experiment_options {
  int threads = 1;
  std::uint64_t replicate_offset = 0;  // shift replicate stream blocks
  std::atomic<std::int64_t>* fit_counter = nullptr;
};

/// Monte Carlo selection-frequency experiment: per replication, simulate a
/// response from the DGP over the shared design, fit every candidate once,
/// evaluate all requested criteria on the shared fits and bootstrap sets, and
/// tabulate under/correct/over counts per criterion.
inline simulation_report run_experiment(const dgp_preset& preset, int n, int reps, int W,
                                        select_mode mode,
                                        const std::vector<criterion_kind>& criteria,
                                        std::uint64_t seed,
                                        const experiment_options& opts = {}) {
  if (mode == select_mode::two_step)
    fail(errc::validation, "run_experiment: modes are joint, mean_only, disp_only");
  if (n <= 12 && mode == select_mode::joint)
    fail(errc::validation, "run_experiment: joint mode needs n > 12");
  if (reps < 1) fail(errc::validation, "run_experiment: reps must be positive");

  const Eigen::MatrixXd design = make_design(n, 6, seed);

  candidate_set candidates;
  candidates.mode = mode;
  candidates.nesting = nesting_kind::sequential;
  candidates.mean_link = preset.mean_link;
  candidates.disp_link = preset.disp_link;
  const std::vector<int> pool = {0, 1, 2, 3, 4};  // x2..x6
  const std::vector<int> true_cols = {0, 1};      // x2, x3
  switch (mode) {
    case select_mode::joint:
      candidates.mean_pool = pool;
      candidates.disp_pool = pool;
      break;
    case select_mode::mean_only:
      candidates.mean_pool = pool;
      candidates.fixed_disp_cols = true_cols;
      break;
    case select_mode::disp_only:
      candidates.disp_pool = pool;
      candidates.fixed_mean_cols = true_cols;
      break;
    default: break;
  }
  const std::vector<model_spec> specs = enumerate_candidates(candidates);

  // locate the true model among the candidates
  int true_index = -1;
  for (std::size_t j = 0; j < specs.size(); ++j) {
    const bool mean_true = specs[j].mean_cols == true_cols;
    const bool disp_true =
        mode == select_mode::mean_only || specs[j].disp_cols == true_cols;
    const bool mean_ok = mode == select_mode::disp_only || mean_true;
    if (mean_ok && disp_true) {
      true_index = static_cast<int>(j);
      break;
    }
  }
  if (true_index < 0)
    fail(errc::validation, "run_experiment: true model not among the candidates");

  struct rep_outcome {
    bool true_fit_failed = false;
    // per criterion: -1 failed, else order_class
    std::vector<int> classes;
  };
  std::vector<rep_outcome> outcomes(reps);

  parallel_for(reps, opts.threads, [&](int rep) {
    const std::uint64_t rep_block = opts.replicate_offset + static_cast<std::uint64_t>(rep) + 1;
    const dataset data = simulate_dgp_dataset(preset, design, seed, rep_block);

    rep_outcome outcome;
    outcome.classes.assign(criteria.size(), -1);

    // one fit pass per candidate, shared by every criterion
    std::vector<model_frame> frames;
    std::vector<fit_result> fits(specs.size());
    std::vector<char> fit_ok(specs.size(), 0);
    frames.reserve(specs.size());
    for (std::size_t j = 0; j < specs.size(); ++j) {
      frames.push_back(model_frame::build(data, specs[j]));
      try {
        fit_options fopts;
        fopts.fit_counter = opts.fit_counter;
        fits[j] = fit(frames[j], fopts);
        fit_ok[j] = fits[j].converged;
      } catch (const error&) {
        fit_ok[j] = 0;
      }
    }
    if (!fit_ok[static_cast<std::size_t>(true_index)]) {
      outcome.true_fit_failed = true;
      outcomes[rep] = std::move(outcome);
      return;
    }

    // criterion values for all candidates, bootstrap sets shared per candidate
    const std::size_t n_kinds = criteria.size();
    std::vector<std::vector<double>> values(n_kinds,
                                            std::vector<double>(specs.size(),
                                                                std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t j = 0; j < specs.size(); ++j) {
      if (!fit_ok[j]) continue;
      const std::uint64_t block = stream_id(rep_block, static_cast<std::uint64_t>(j) + 1, 0);
      const auto evaluated =
          evaluate_criteria(frames[j], fits[j], criteria, W, seed, block, 1,
                            opts.fit_counter);
      for (std::size_t c = 0; c < n_kinds; ++c)
        if (evaluated[c].ok) values[c][j] = evaluated[c].report.value;
    }

    for (std::size_t c = 0; c < n_kinds; ++c) {
      int best = -1;
      for (std::size_t j = 0; j < specs.size(); ++j) {
        if (std::isnan(values[c][j])) continue;
        if (best < 0 || values[c][j] < values[c][static_cast<std::size_t>(best)] ||
            (values[c][j] == values[c][static_cast<std::size_t>(best)] &&
             specs[j].k() < specs[static_cast<std::size_t>(best)].k()))
          best = static_cast<int>(j);
      }
      if (best < 0) continue;  // stays failed
      outcome.classes[c] =
          static_cast<int>(classify(specs[static_cast<std::size_t>(best)], preset, mode));
    }
    outcomes[rep] = std::move(outcome);
  });

  simulation_report report;
  report.dgp = preset.name;
  report.n = n;
  report.reps = reps;
  report.W = W;
  report.mode = mode;
  report.criteria = criteria;
  report.per_criterion.assign(criteria.size(), order_counts{});
  report.seed = seed;
  for (const auto& outcome : outcomes) {
    if (outcome.true_fit_failed) {
      ++report.failures;
      for (auto& counts : report.per_criterion) ++counts.failed;
      continue;
    }
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      auto& counts = report.per_criterion[c];
      switch (outcome.classes[c]) {
        case -1: ++counts.failed; break;
        case static_cast<int>(order_class::under): ++counts.under; break;
        case static_cast<int>(order_class::correct): ++counts.correct; break;
        case static_cast<int>(order_class::over): ++counts.over; break;
      }
    }
  }
  return report;
}

}  // namespace betasel
