#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "betasel/criteria.hpp"

namespace betasel {

enum class select_mode { joint, mean_only, disp_only, two_step };
enum class nesting_kind { sequential, exhaustive };

inline const char* select_mode_name(select_mode mode) {
  switch (mode) {
    case select_mode::joint: return "joint";
    case select_mode::mean_only: return "mean_only";
    case select_mode::disp_only: return "disp_only";
    case select_mode::two_step: return "two_step";
  }
  return "?";
}

inline select_mode select_mode_from_name(std::string_view name) {
  if (name == "joint") return select_mode::joint;
  if (name == "mean_only" || name == "mean") return select_mode::mean_only;
  if (name == "disp_only" || name == "disp") return select_mode::disp_only;
  if (name == "two_step" || name == "two-step") return select_mode::two_step;
  fail(errc::parse, "unknown selection mode: " + std::string(name));
}

/// Candidate enumeration recipe. Pools list covariate column indices in
/// priority order; the intercept is always kept. Sequential nesting yields the
/// nested ladder intercept-only, +first, +first two, ...; exhaustive yields
/// every subset (ordered by size, then by subset pattern).
struct candidate_set {
  select_mode mode = select_mode::joint;
  std::vector<int> mean_pool;
  std::vector<int> disp_pool;
  nesting_kind nesting = nesting_kind::sequential;
  link_kind mean_link = link_kind::logit;
  link_kind disp_link = link_kind::logit;
  // fixed submodel for the non-varied side
  std::vector<int> fixed_mean_cols;
  std::vector<int> fixed_disp_cols;
  bool fixed_disp_constant = false;  // mean_only with constant dispersion
};

namespace detail {

inline std::vector<std::vector<int>> submodel_subsets(const std::vector<int>& pool,
                                                      nesting_kind nesting) {
  std::vector<std::vector<int>> out;
  if (nesting == nesting_kind::sequential) {
    for (std::size_t len = 0; len <= pool.size(); ++len)
      out.emplace_back(pool.begin(), pool.begin() + static_cast<long>(len));
    return out;
  }
  const int p = static_cast<int>(pool.size());
  if (p > 20) fail(errc::validation, "exhaustive enumeration over more than 20 covariates");
  std::vector<unsigned> masks;
  for (unsigned mask = 0; mask < (1u << p); ++mask) masks.push_back(mask);
  std::stable_sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
    const int ca = __builtin_popcount(a), cb = __builtin_popcount(b);
    return ca != cb ? ca < cb : a < b;
  });
  for (unsigned mask : masks) {
    std::vector<int> subset;
    for (int j = 0; j < p; ++j)
      if (mask & (1u << j)) subset.push_back(pool[j]);
    out.push_back(std::move(subset));
  }
  return out;
}

}  // namespace detail

inline std::vector<model_spec> enumerate_candidates(const candidate_set& candidates) {
  std::vector<model_spec> specs;
  auto make_spec = [&](std::vector<int> mean_cols, std::vector<int> disp_cols,
                       bool const_disp) {
    model_spec spec;
    spec.mean_cols = std::move(mean_cols);
    spec.mean_link = candidates.mean_link;
    if (const_disp) {
      spec.disp_link = link_kind::identity;
    } else {
      spec.disp_cols = std::move(disp_cols);
      spec.disp_link = candidates.disp_link;
    }
    return spec;
  };

  switch (candidates.mode) {
    case select_mode::joint: {
      if (candidates.mean_pool.empty() || candidates.disp_pool.empty())
        fail(errc::validation, "joint selection requires both pools to be non-empty");
      const auto means = detail::submodel_subsets(candidates.mean_pool, candidates.nesting);
      const auto disps = detail::submodel_subsets(candidates.disp_pool, candidates.nesting);
      for (const auto& m : means)
        for (const auto& d : disps) specs.push_back(make_spec(m, d, false));
      break;
    }
    case select_mode::mean_only: {
      if (candidates.mean_pool.empty())
        fail(errc::validation, "mean_only selection requires a non-empty mean pool");
      for (const auto& m : detail::submodel_subsets(candidates.mean_pool, candidates.nesting))
        specs.push_back(
            make_spec(m, candidates.fixed_disp_cols, candidates.fixed_disp_constant));
      break;
    }
    case select_mode::disp_only: {
      if (candidates.disp_pool.empty())
        fail(errc::validation, "disp_only selection requires a non-empty dispersion pool");
      for (const auto& d : detail::submodel_subsets(candidates.disp_pool, candidates.nesting))
        specs.push_back(make_spec(candidates.fixed_mean_cols, d, false));
      break;
    }
    case select_mode::two_step:
      fail(errc::validation, "two_step mode is driven by select_two_step");
  }
  return specs;
}

struct candidate_outcome {
  model_spec spec;
  int step = 1;        // two-step stage
  int enum_index = 0;  // position in enumeration order
  bool fit_ok = false;
  bool criterion_ok = false;
  bool converged = false;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  int k = 0;
  double value = std::numeric_limits<double>::quiet_NaN();
  criterion_report report;
  std::string note;
};

struct selection_result {
  model_spec winner;
  criterion_kind criterion = criterion_kind::aic;
  int W = 0;
  std::uint64_t seed = 0;
  bool ties_broken = false;
  std::vector<candidate_outcome> per_candidate;
};

// Step-2 candidates of the two-step scheme live in their own stream block so
// step-1 draws never depend on step-2 membership.
constexpr std::uint64_t kTwoStepStage2Offset = 1ULL << 15;

struct select_options {
  int threads = 1;
  std::uint64_t replicate_block = 0;   // outer Monte Carlo replicate, 0 = none
  std::uint64_t candidate_offset = 0;  // shifts candidate block indices
  std::atomic<std::int64_t>* fit_counter = nullptr;
  int step_tag = 1;
};

namespace detail {

inline bool outcome_better(const candidate_outcome& a, const candidate_outcome& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.k != b.k) return a.k < b.k;
  return a.enum_index < b.enum_index;
}

}  // namespace detail

/// Fit every candidate, evaluate one criterion on each, return the argmin.
/// Candidate j draws from stream block (replicate, offset+j, *) so adding or
/// removing candidates never perturbs the others' bootstrap draws.
inline selection_result select(const dataset& data, const candidate_set& candidates,
                               criterion_kind criterion, int W, std::uint64_t seed,
                               const select_options& opts = {}) {
  if (candidates.mode == select_mode::two_step)
    fail(errc::validation, "select: use select_two_step for the two-step scheme");
  const auto specs = enumerate_candidates(candidates);
  for (const auto& spec : specs) validate_spec(data, spec);

  std::vector<candidate_outcome> outcomes(specs.size());
  parallel_for(static_cast<int>(specs.size()), opts.threads, [&](int j) {
    candidate_outcome out;
    out.spec = specs[j];
    out.enum_index = j;
    out.step = opts.step_tag;
    out.k = specs[j].k();
    try {
      const model_frame frame = model_frame::build(data, specs[j]);
      fit_options fopts;
      fopts.fit_counter = opts.fit_counter;
      const fit_result fitted = fit(frame, fopts);
      out.converged = fitted.converged;
      out.loglik = fitted.loglik;
      out.fit_ok = fitted.converged;
      if (out.fit_ok) {
        const std::uint64_t block = stream_id(
            opts.replicate_block, opts.candidate_offset + static_cast<std::uint64_t>(j) + 1,
            0);
        const auto evaluated =
            evaluate_criteria(frame, fitted, {criterion}, W, seed, block, 1);
        out.criterion_ok = evaluated[0].ok;
        out.report = evaluated[0].report;
        out.value = evaluated[0].report.value;
        if (!evaluated[0].ok) {
          out.note = evaluated[0].message;
          out.value = std::numeric_limits<double>::quiet_NaN();
        }
      } else {
        out.note = "fit did not converge";
      }
    } catch (const error& err) {
      out.fit_ok = false;
      out.criterion_ok = false;
      out.note = err.what();
    }
    outcomes[j] = std::move(out);
  });

  const candidate_outcome* best = nullptr;
  int min_count = 0;
  for (const auto& out : outcomes) {
    if (!out.criterion_ok) continue;
    if (!best || detail::outcome_better(out, *best)) best = &out;
  }
  if (!best)
    fail(errc::convergence, "select: every candidate failed to fit or evaluate");
  for (const auto& out : outcomes)
    if (out.criterion_ok && out.value == best->value) ++min_count;

  selection_result result;
  result.winner = best->spec;
  result.criterion = criterion;
  result.W = W;
  result.seed = seed;
  result.ties_broken = min_count > 1;
  result.per_candidate = std::move(outcomes);
  return result;
}

/// Two-step scheme: select mean covariates under constant dispersion, then
/// freeze the winning mean submodel and select the dispersion covariates.
inline selection_result select_two_step(const dataset& data,
                                        const std::vector<int>& mean_pool,
                                        const std::vector<int>& disp_pool,
                                        nesting_kind nesting, link_kind mean_link,
                                        link_kind disp_link, criterion_kind criterion,
                                        int W, std::uint64_t seed,
                                        const select_options& opts = {}) {
  candidate_set step1;
  step1.mode = select_mode::mean_only;
  step1.mean_pool = mean_pool;
  step1.nesting = nesting;
  step1.mean_link = mean_link;
  step1.fixed_disp_constant = true;
  select_options opts1 = opts;
  opts1.step_tag = 1;
  selection_result first = select(data, step1, criterion, W, seed, opts1);

  if (disp_pool.empty()) return first;

  candidate_set step2;
  step2.mode = select_mode::disp_only;
  step2.disp_pool = disp_pool;
  step2.nesting = nesting;
  step2.mean_link = mean_link;
  step2.disp_link = disp_link;
  step2.fixed_mean_cols = first.winner.mean_cols;
  select_options opts2 = opts;
  opts2.candidate_offset = opts.candidate_offset + kTwoStepStage2Offset;
  opts2.step_tag = 2;
  selection_result second = select(data, step2, criterion, W, seed, opts2);

  selection_result combined;
  combined.winner = second.winner;  // carries the frozen step-1 mean submodel
  combined.criterion = criterion;
  combined.W = W;
  combined.seed = seed;
  combined.ties_broken = first.ties_broken || second.ties_broken;
  combined.per_candidate = std::move(first.per_candidate);
  for (auto& out : second.per_candidate) combined.per_candidate.push_back(std::move(out));
  return combined;
}

}  // namespace betasel
