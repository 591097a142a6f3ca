#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "betasel/fit.hpp"
#include "betasel/parallel.hpp"
#include "betasel/rng.hpp"

namespace betasel {

enum class criterion_kind {
  aic, aicc, sic, sicc, hq, hqc,
  eic1p, eic2p, eic3p, eic4p, eic5p,
  eic1np, eic2np, eic3np, eic4np, eic5np,
  bcv, cv632, bqcv, qcv632,
};

inline const std::vector<criterion_kind>& all_criteria() {
  static const std::vector<criterion_kind> all = {
      criterion_kind::aic,    criterion_kind::aicc,   criterion_kind::sic,
      criterion_kind::sicc,   criterion_kind::hq,     criterion_kind::hqc,
      criterion_kind::eic1p,  criterion_kind::eic2p,  criterion_kind::eic3p,
      criterion_kind::eic4p,  criterion_kind::eic5p,  criterion_kind::eic1np,
      criterion_kind::eic2np, criterion_kind::eic3np, criterion_kind::eic4np,
      criterion_kind::eic5np, criterion_kind::bcv,    criterion_kind::cv632,
      criterion_kind::bqcv,   criterion_kind::qcv632};
  return all;
}

inline const char* criterion_name(criterion_kind kind) {
  switch (kind) {
    case criterion_kind::aic: return "aic";
    case criterion_kind::aicc: return "aicc";
    case criterion_kind::sic: return "sic";
    case criterion_kind::sicc: return "sicc";
    case criterion_kind::hq: return "hq";
    case criterion_kind::hqc: return "hqc";
    case criterion_kind::eic1p: return "eic1p";
    case criterion_kind::eic2p: return "eic2p";
    case criterion_kind::eic3p: return "eic3p";
    case criterion_kind::eic4p: return "eic4p";
    case criterion_kind::eic5p: return "eic5p";
    case criterion_kind::eic1np: return "eic1np";
    case criterion_kind::eic2np: return "eic2np";
    case criterion_kind::eic3np: return "eic3np";
    case criterion_kind::eic4np: return "eic4np";
    case criterion_kind::eic5np: return "eic5np";
    case criterion_kind::bcv: return "bcv";
    case criterion_kind::cv632: return "632cv";
    case criterion_kind::bqcv: return "bqcv";
    case criterion_kind::qcv632: return "632qcv";
  }
  return "?";
}

inline criterion_kind criterion_from_name(std::string_view name) {
  for (criterion_kind kind : all_criteria())
    if (name == criterion_name(kind)) return kind;
  fail(errc::parse, "unknown criterion name: " + std::string(name));
}

/// Expand a CLI list ("all" or comma-free tokens) into kinds.
inline std::vector<criterion_kind> criteria_from_names(const std::vector<std::string>& names) {
  std::vector<criterion_kind> kinds;
  for (const auto& name : names) {
    if (name == "all") {
      for (criterion_kind kind : all_criteria()) kinds.push_back(kind);
      continue;
    }
    kinds.push_back(criterion_from_name(name));
  }
  return kinds;
}

inline bool uses_parametric_bootstrap(criterion_kind kind) {
  switch (kind) {
    case criterion_kind::eic1p:
    case criterion_kind::eic2p:
    case criterion_kind::eic3p:
    case criterion_kind::eic4p:
    case criterion_kind::eic5p:
    case criterion_kind::bqcv:
    case criterion_kind::qcv632: return true;
    default: return false;
  }
}

inline bool uses_nonparametric_bootstrap(criterion_kind kind) {
  switch (kind) {
    case criterion_kind::eic1np:
    case criterion_kind::eic2np:
    case criterion_kind::eic3np:
    case criterion_kind::eic4np:
    case criterion_kind::eic5np:
    case criterion_kind::bcv:
    case criterion_kind::cv632: return true;
    default: return false;
  }
}

inline bool is_bootstrap_criterion(criterion_kind kind) {
  return uses_parametric_bootstrap(kind) || uses_nonparametric_bootstrap(kind);
}

struct criterion_report {
  criterion_kind kind = criterion_kind::aic;
  double value = 0.0;  // smaller = better
  int w_requested = 0;
  int w_succeeded = 0;
  std::optional<double> bias_term;  // B_i for the EICs
  std::uint64_t seed = 0;
};

/// Penalized-likelihood criteria. n is real-valued so exact-logarithm sample
/// sizes remain expressible; k counts all parameters (r+s).
inline double classic_criterion(criterion_kind kind, double loglik, int k, double n) {
  const double minus2ll = -2.0 * loglik;
  const double kd = static_cast<double>(k);
  switch (kind) {
    case criterion_kind::aic: return minus2ll + 2.0 * kd;
    case criterion_kind::aicc: {
      const double denom = n - kd - 1.0;
      if (!(denom > 0.0)) fail(errc::validation, "aicc: degenerate sample, n <= k+1");
      return minus2ll + 2.0 * kd + 2.0 * kd * (kd + 1.0) / denom;
    }
    case criterion_kind::sic: return minus2ll + kd * std::log(n);
    case criterion_kind::sicc: {
      const double denom = n - kd - 2.0;
      if (!(denom > 0.0)) fail(errc::validation, "sicc: degenerate sample, n <= k+2");
      return minus2ll + kd * std::log(n) * n / denom;
    }
    case criterion_kind::hq: return minus2ll + 2.0 * kd * std::log(std::log(n));
    case criterion_kind::hqc: {
      const double denom = n - kd - 2.0;
      if (!(denom > 0.0)) fail(errc::validation, "hqc: degenerate sample, n <= k+2");
      return minus2ll + 2.0 * kd * std::log(std::log(n)) * n / denom;
    }
    default:
      fail(errc::validation, std::string("classic_criterion: ") + criterion_name(kind) +
                                 " is not a penalized-likelihood criterion");
  }
}

enum class boot_mode { parametric, nonparametric };

/// One bootstrap replicate: the pseudo-sample handle plus every
/// log-likelihood the criteria need, so transcripts can be replayed.
struct boot_replicate {
  int index = 0;  // 1-based
  bool ok = false;
  double ll_rep_at_refit = 0.0;   // log f(Y* | theta*)
  double ll_orig_at_refit = 0.0;  // log f(Y  | theta*)
  double ll_rep_at_fit0 = 0.0;    // log f(Y* | theta_hat)
  double ll_oob_at_refit = 0.0;   // log f(Y- | theta*), nonparametric only
  int m_oob = 0;                  // |Y-|, nonparametric only
  std::vector<int> rows;          // resampled row indices, nonparametric only
  Eigen::VectorXd y_rep;          // kept when requested
};

struct bootstrap_set {
  boot_mode mode = boot_mode::parametric;
  int w_requested = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_block = 0;
  int n = 0;
  std::vector<boot_replicate> replicates;

  int succeeded() const {
    int count = 0;
    for (const auto& rep : replicates) count += rep.ok;
    return count;
  }
  int quorum() const { return (w_requested + 1) / 2; }
};

struct bootstrap_options {
  int threads = 1;
  bool keep_responses = false;
  int max_oob_retries = 10;  // per replicate; bounds total retries by 10*W
  std::atomic<std::int64_t>* fit_counter = nullptr;
};

// Nonparametric replicates draw from block + kNonparametricOffset so the two
// modes never share streams within a candidate block.
constexpr std::uint64_t kNonparametricStreamOffset = 1ULL << 19;

/// Generate W bootstrap pseudo-samples and refit each one (warm-started from
/// the original fit). Failed refits are recorded and excluded, never redrawn;
/// only an empty out-of-bag set triggers a bounded redraw.
inline bootstrap_set make_bootstrap(const model_frame& frame, const fit_result& fit0,
                                    boot_mode mode, int W, std::uint64_t master_seed,
                                    std::uint64_t stream_block,
                                    const bootstrap_options& opts = {}) {
  if (!fit0.converged)
    fail(errc::convergence, "bootstrap: the original fit did not converge");
  if (W < 1) fail(errc::validation, "bootstrap: W must be at least 1");

  const auto n = frame.n();
  const auto md = detail::eval_mean_disp(frame, fit0.theta);

  bootstrap_set set;
  set.mode = mode;
  set.w_requested = W;
  set.seed = master_seed;
  set.stream_block = stream_block;
  set.n = static_cast<int>(n);
  set.replicates.resize(W);

  const std::uint64_t base =
      stream_block + (mode == boot_mode::nonparametric ? kNonparametricStreamOffset : 0);

  parallel_for(W, opts.threads, [&](int i) {
    boot_replicate rep;
    rep.index = i + 1;
    rng_stream stream(master_seed, base + static_cast<std::uint64_t>(i) + 1);

    model_frame rep_frame = frame;
    bool have_oob = true;
    if (mode == boot_mode::parametric) {
      Eigen::VectorXd y_rep(n);
      for (Eigen::Index t = 0; t < n; ++t)
        y_rep[t] = stream.beta(md.mu[t] * md.phi[t], (1.0 - md.mu[t]) * md.phi[t]);
      rep_frame = frame.with_response(y_rep);
    } else {
      std::vector<int> rows(n);
      std::vector<char> drawn(n);
      int tries = 0;
      for (;;) {
        std::fill(drawn.begin(), drawn.end(), 0);
        for (Eigen::Index t = 0; t < n; ++t) {
          const int idx = static_cast<int>(stream.next_u64() % static_cast<std::uint64_t>(n));
          rows[t] = idx;
          drawn[idx] = 1;
        }
        rep.m_oob = 0;
        for (Eigen::Index t = 0; t < n; ++t) rep.m_oob += (drawn[t] == 0);
        if (rep.m_oob > 0 || ++tries > opts.max_oob_retries) break;
      }
      have_oob = rep.m_oob > 0;
      rep.rows = rows;
      rep_frame = frame.subset(rows);
    }

    fit_options refit_opts;
    refit_opts.start = fit0.theta;  // pseudo-samples sit near the original data
    refit_opts.fit_counter = opts.fit_counter;
    bool converged = false;
    param_vector theta_star;
    try {
      const fit_result refit = fit(rep_frame, refit_opts);
      converged = refit.converged;
      theta_star = refit.theta;
      rep.ll_rep_at_refit = refit.loglik;
    } catch (const error&) {
      converged = false;
    }

    if (converged) {
      rep.ll_orig_at_refit = loglik_nothrow(frame, theta_star);
      rep.ll_rep_at_fit0 = loglik_nothrow(rep_frame, fit0.theta);
      rep.ok = std::isfinite(rep.ll_orig_at_refit) && std::isfinite(rep.ll_rep_at_fit0) &&
               std::isfinite(rep.ll_rep_at_refit);
      if (mode == boot_mode::nonparametric && rep.ok) {
        if (have_oob) {
          std::vector<char> drawn(n, 0);
          for (int row : rep.rows) drawn[row] = 1;
          std::vector<int> oob;
          for (Eigen::Index t = 0; t < n; ++t)
            if (!drawn[t]) oob.push_back(static_cast<int>(t));
          rep.ll_oob_at_refit = loglik_nothrow(frame.subset(oob), theta_star);
          rep.ok = std::isfinite(rep.ll_oob_at_refit);
        } else {
          rep.ok = false;  // OOB never materialized within the retry budget
        }
      }
    }
    if (opts.keep_responses) rep.y_rep = rep_frame.y;
    set.replicates[i] = std::move(rep);
  });
  return set;
}

namespace detail {

inline void require_quorum(const bootstrap_set& set, const char* what) {
  if (set.succeeded() < set.quorum())
    fail(errc::quorum, std::string(what) + ": only " + std::to_string(set.succeeded()) +
                           " of " + std::to_string(set.w_requested) +
                           " bootstrap refits succeeded (quorum " +
                           std::to_string(set.quorum()) + ")");
}

// Mean over successful replicates, in replicate-index order.
template <typename Fn>
double replicate_mean(const bootstrap_set& set, Fn&& term) {
  double sum = 0.0;
  int count = 0;
  for (const auto& rep : set.replicates) {
    if (!rep.ok) continue;
    sum += term(rep);
    ++count;
  }
  return sum / static_cast<double>(count);
}

}  // namespace detail

/// Bootstrap extensions of the AIC: value = -2 loglik + B_variant.
inline criterion_report eic_report(const bootstrap_set& set, int variant,
                                   const fit_result& fit0) {
  if (variant < 1 || variant > 5)
    fail(errc::validation, "eic: variant must lie in 1..5");
  detail::require_quorum(set, "eic");

  const double ll_hat = fit0.loglik;
  double bias = 0.0;
  switch (variant) {
    case 1:
      bias = detail::replicate_mean(set, [](const boot_replicate& r) {
        return 2.0 * r.ll_rep_at_refit - 2.0 * r.ll_orig_at_refit;
      });
      break;
    case 2:
      bias = 2.0 * detail::replicate_mean(set, [&](const boot_replicate& r) {
        return 2.0 * ll_hat - 2.0 * r.ll_orig_at_refit;
      });
      break;
    case 3:
      bias = 2.0 * detail::replicate_mean(set, [](const boot_replicate& r) {
        return 2.0 * r.ll_rep_at_refit - 2.0 * r.ll_rep_at_fit0;
      });
      break;
    case 4:
      bias = 2.0 * detail::replicate_mean(set, [](const boot_replicate& r) {
        return 2.0 * r.ll_rep_at_fit0 - 2.0 * r.ll_orig_at_refit;
      });
      break;
    case 5:
      bias = 2.0 * detail::replicate_mean(set, [&](const boot_replicate& r) {
        return 2.0 * r.ll_rep_at_refit - 2.0 * ll_hat;
      });
      break;
  }

  criterion_report report;
  const bool parametric = set.mode == boot_mode::parametric;
  static constexpr criterion_kind kP[] = {criterion_kind::eic1p, criterion_kind::eic2p,
                                          criterion_kind::eic3p, criterion_kind::eic4p,
                                          criterion_kind::eic5p};
  static constexpr criterion_kind kNp[] = {criterion_kind::eic1np, criterion_kind::eic2np,
                                           criterion_kind::eic3np, criterion_kind::eic4np,
                                           criterion_kind::eic5np};
  report.kind = parametric ? kP[variant - 1] : kNp[variant - 1];
  report.value = -2.0 * ll_hat + bias;
  report.bias_term = bias;
  report.w_requested = set.w_requested;
  report.w_succeeded = set.succeeded();
  report.seed = set.seed;
  return report;
}

/// Bootstrapped-likelihood CV: out-of-bag -2 loglik scaled to full sample size.
inline criterion_report bcv_report(const bootstrap_set& set, const fit_result& fit0) {
  (void)fit0;
  if (set.mode != boot_mode::nonparametric)
    fail(errc::validation, "bcv: requires nonparametric bootstrap replicates");
  detail::require_quorum(set, "bcv");
  const double n = static_cast<double>(set.n);
  criterion_report report;
  report.kind = criterion_kind::bcv;
  report.value = detail::replicate_mean(set, [n](const boot_replicate& r) {
    return -2.0 * r.ll_oob_at_refit * n / static_cast<double>(r.m_oob);
  });
  report.w_requested = set.w_requested;
  report.w_succeeded = set.succeeded();
  report.seed = set.seed;
  return report;
}

inline criterion_report cv632_report(const bootstrap_set& set, const fit_result& fit0) {
  criterion_report report = bcv_report(set, fit0);
  report.kind = criterion_kind::cv632;
  report.value = 0.368 * (-2.0 * fit0.loglik) + 0.632 * report.value;
  return report;
}

/// Bootstrapped likelihood quasi-CV: train on the pseudo-sample, validate the
/// replicate estimate on the original data.
inline criterion_report bqcv_report(const bootstrap_set& set, const fit_result& fit0) {
  (void)fit0;
  if (set.mode != boot_mode::parametric)
    fail(errc::validation, "bqcv: requires parametric bootstrap replicates");
  detail::require_quorum(set, "bqcv");
  criterion_report report;
  report.kind = criterion_kind::bqcv;
  report.value = detail::replicate_mean(
      set, [](const boot_replicate& r) { return -2.0 * r.ll_orig_at_refit; });
  report.w_requested = set.w_requested;
  report.w_succeeded = set.succeeded();
  report.seed = set.seed;
  return report;
}

inline criterion_report qcv632_report(const bootstrap_set& set, const fit_result& fit0) {
  criterion_report report = bqcv_report(set, fit0);
  report.kind = criterion_kind::qcv632;
  report.value = 0.368 * (-2.0 * fit0.loglik) + 0.632 * report.value;
  return report;
}

inline criterion_report classic_report(criterion_kind kind, const fit_result& fit0, int k,
                                       double n, std::uint64_t seed) {
  criterion_report report;
  report.kind = kind;
  report.value = classic_criterion(kind, fit0.loglik, k, n);
  report.seed = seed;
  return report;
}

struct evaluated_criterion {
  criterion_kind kind = criterion_kind::aic;
  bool ok = false;
  criterion_report report;
  std::string message;  // failure detail when !ok
};

/// Evaluate a batch of criteria on one fitted candidate, computing at most one
/// parametric and one nonparametric replicate set and sharing each across all
/// criteria of that mode. Failures (e.g. quorum) are per criterion; results
/// come back in the order requested.
inline std::vector<evaluated_criterion> evaluate_criteria(
    const model_frame& frame, const fit_result& fit0,
    const std::vector<criterion_kind>& kinds, int W, std::uint64_t master_seed,
    std::uint64_t stream_block, int threads = 1,
    std::atomic<std::int64_t>* fit_counter = nullptr) {
  bool need_p = false, need_np = false;
  for (criterion_kind kind : kinds) {
    need_p = need_p || uses_parametric_bootstrap(kind);
    need_np = need_np || uses_nonparametric_bootstrap(kind);
  }
  bootstrap_options opts;
  opts.threads = threads;
  opts.fit_counter = fit_counter;
  std::optional<bootstrap_set> pset, npset;
  if (need_p)
    pset = make_bootstrap(frame, fit0, boot_mode::parametric, W, master_seed,
                          stream_block, opts);
  if (need_np)
    npset = make_bootstrap(frame, fit0, boot_mode::nonparametric, W, master_seed,
                           stream_block, opts);

  const int k = frame.k();
  const double n = static_cast<double>(frame.n());
  std::vector<evaluated_criterion> results;
  results.reserve(kinds.size());
  for (criterion_kind kind : kinds) {
    evaluated_criterion entry;
    entry.kind = kind;
    try {
      switch (kind) {
        case criterion_kind::aic:
        case criterion_kind::aicc:
        case criterion_kind::sic:
        case criterion_kind::sicc:
        case criterion_kind::hq:
        case criterion_kind::hqc:
          entry.report = classic_report(kind, fit0, k, n, master_seed);
          break;
        case criterion_kind::eic1p:
        case criterion_kind::eic2p:
        case criterion_kind::eic3p:
        case criterion_kind::eic4p:
        case criterion_kind::eic5p:
          entry.report = eic_report(*pset, 1 + static_cast<int>(kind) -
                                               static_cast<int>(criterion_kind::eic1p),
                                    fit0);
          break;
        case criterion_kind::eic1np:
        case criterion_kind::eic2np:
        case criterion_kind::eic3np:
        case criterion_kind::eic4np:
        case criterion_kind::eic5np:
          entry.report = eic_report(*npset, 1 + static_cast<int>(kind) -
                                                static_cast<int>(criterion_kind::eic1np),
                                    fit0);
          break;
        case criterion_kind::bcv: entry.report = bcv_report(*npset, fit0); break;
        case criterion_kind::cv632: entry.report = cv632_report(*npset, fit0); break;
        case criterion_kind::bqcv: entry.report = bqcv_report(*pset, fit0); break;
        case criterion_kind::qcv632: entry.report = qcv632_report(*pset, fit0); break;
      }
      entry.ok = std::isfinite(entry.report.value);
      if (!entry.ok) entry.message = "non-finite criterion value";
    } catch (const error& err) {
      entry.ok = false;
      entry.message = err.what();
    }
    results.push_back(std::move(entry));
  }
  return results;
}

}  // namespace betasel
