#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "betasel/criteria.hpp"
#include "oracles.hpp"

using namespace betasel;

TEST_CASE("classic criterion closed forms") {
  CHECK(classic_criterion(criterion_kind::aic, 0.0, 2, 50) == doctest::Approx(4.0));
  // adopted corrected form: AIC + 2k(k+1)/(n-k-1)
  CHECK(classic_criterion(criterion_kind::aicc, 0.0, 2, 10) ==
        doctest::Approx(4.0 + 12.0 / 7.0).epsilon(1e-14));
  // exact logarithm: n = e^2
  CHECK(classic_criterion(criterion_kind::sic, -10.0, 3, std::exp(2.0)) ==
        doctest::Approx(26.0).epsilon(1e-12));
  CHECK(classic_criterion(criterion_kind::hq, -10.0, 3, std::exp(std::exp(1.0))) ==
        doctest::Approx(20.0 + 6.0).epsilon(1e-12));
  // corrected forms scale by n/(n-k-2)
  CHECK(classic_criterion(criterion_kind::sicc, 0.0, 3, 20.0) ==
        doctest::Approx(3.0 * std::log(20.0) * 20.0 / 15.0).epsilon(1e-14));
  CHECK(classic_criterion(criterion_kind::hqc, 0.0, 3, 20.0) ==
        doctest::Approx(6.0 * std::log(std::log(20.0)) * 20.0 / 15.0).epsilon(1e-14));
}

TEST_CASE("classic criterion degenerate samples raise errors") {
  CHECK_THROWS_AS(classic_criterion(criterion_kind::aicc, 0.0, 5, 6.0), error);
  CHECK_THROWS_AS(classic_criterion(criterion_kind::sicc, 0.0, 5, 7.0), error);
  CHECK_THROWS_AS(classic_criterion(criterion_kind::hqc, 0.0, 5, 7.0), error);
  CHECK_THROWS_AS(classic_criterion(criterion_kind::bqcv, 0.0, 5, 50.0), error);
}

TEST_CASE("criterion names round trip, including the CLI aliases") {
  for (criterion_kind kind : all_criteria())
    CHECK(criterion_from_name(criterion_name(kind)) == kind);
  CHECK(criterion_from_name("632cv") == criterion_kind::cv632);
  CHECK(criterion_from_name("632qcv") == criterion_kind::qcv632);
  CHECK(criteria_from_names({"all"}).size() == all_criteria().size());
  CHECK_THROWS_AS(criterion_from_name("aicx"), error);
}

namespace {

struct fixture {
  dataset data;
  model_spec spec;
  model_frame frame;
  fit_result fit0;
};

fixture make_fixture(std::uint64_t seed, int n) {
  auto prob = oracle::make_random_problem(seed, n, 2, 1);
  model_frame frame = model_frame::build(prob.data, prob.spec);
  fit_result fit0 = fit(frame);
  REQUIRE(fit0.converged);
  return {prob.data, prob.spec, std::move(frame), std::move(fit0)};
}

// stub set with every pseudo-sample identical to the original data
bootstrap_set identical_sample_stub(const fixture& fx, int W) {
  bootstrap_set set;
  set.mode = boot_mode::parametric;
  set.w_requested = W;
  set.n = static_cast<int>(fx.data.n());
  for (int i = 0; i < W; ++i) {
    boot_replicate rep;
    rep.index = i + 1;
    rep.ok = true;
    rep.ll_rep_at_refit = fx.fit0.loglik;   // refit of Y reproduces theta_hat
    rep.ll_orig_at_refit = fx.fit0.loglik;
    rep.ll_rep_at_fit0 = fx.fit0.loglik;
    set.replicates.push_back(rep);
  }
  return set;
}

}  // namespace

TEST_CASE("identical-sample collapse: EIC1 reduces to -2 loglik and BQCV matches") {
  auto fx = make_fixture(100, 40);
  const auto stub = identical_sample_stub(fx, 7);
  const auto eic1 = eic_report(stub, 1, fx.fit0);
  CHECK(*eic1.bias_term == doctest::Approx(0.0).scale(1.0));
  CHECK(eic1.value == doctest::Approx(-2.0 * fx.fit0.loglik).epsilon(1e-13));

  const auto bqcv = bqcv_report(stub, fx.fit0);
  CHECK(bqcv.value == doctest::Approx(-2.0 * fx.fit0.loglik).epsilon(1e-13));
  const auto qcv = qcv632_report(stub, fx.fit0);
  CHECK(qcv.value == doctest::Approx(-2.0 * fx.fit0.loglik).epsilon(1e-13));
}

TEST_CASE("parametric replicate generation is calibrated and deterministic") {
  auto fx = make_fixture(101, 60);
  bootstrap_options opts;
  opts.keep_responses = true;
  const int W = 200;
  const auto set =
      make_bootstrap(fx.frame, fx.fit0, boot_mode::parametric, W, 42, stream_id(0, 1, 0), opts);
  CHECK(set.w_requested == W);
  CHECK(set.succeeded() >= set.quorum());

  // average replicate mean ~= average fitted mean
  const auto md = detail::eval_mean_disp(fx.frame, fx.fit0.theta);
  const double mu_bar = md.mu.mean();
  double ybar_sum = 0.0;
  double var_sum = 0.0;
  int used = 0;
  for (const auto& rep : set.replicates) {
    if (!rep.ok) continue;
    ybar_sum += rep.y_rep.mean();
    var_sum += (md.mu * (1.0 - md.mu) * md.sigma.square()).mean() /
               static_cast<double>(fx.data.n());
    ++used;
  }
  const double se = std::sqrt(var_sum / used) / std::sqrt(static_cast<double>(used));
  CHECK(std::fabs(ybar_sum / used - mu_bar) <= 3.0 * se);

  // determinism across runs and thread counts
  bootstrap_options opts8 = opts;
  opts8.threads = 8;
  const auto rerun =
      make_bootstrap(fx.frame, fx.fit0, boot_mode::parametric, W, 42, stream_id(0, 1, 0), opts8);
  for (int i = 0; i < W; ++i) {
    CHECK(rerun.replicates[i].ok == set.replicates[i].ok);
    CHECK(rerun.replicates[i].y_rep == set.replicates[i].y_rep);
    CHECK(rerun.replicates[i].ll_orig_at_refit == set.replicates[i].ll_orig_at_refit);
  }
}

TEST_CASE("nonparametric resampling has classic bootstrap coverage") {
  auto fx = make_fixture(102, 80);
  const int W = 300;
  const auto set = make_bootstrap(fx.frame, fx.fit0, boot_mode::nonparametric, W, 7,
                                  stream_id(0, 1, 0));
  const double n = static_cast<double>(fx.data.n());
  double distinct_sum = 0.0;
  int used = 0;
  for (const auto& rep : set.replicates) {
    if (!rep.ok) continue;
    distinct_sum += n - rep.m_oob;
    ++used;
  }
  REQUIRE(used >= set.quorum());
  const double expected_distinct = n * (1.0 - std::pow(1.0 - 1.0 / n, n));
  CHECK(distinct_sum / used == doctest::Approx(expected_distinct).epsilon(0.02));
  // E[m*/n] -> (1-1/n)^n ~ e^-1
  CHECK((n - distinct_sum / used) / n == doctest::Approx(0.368).epsilon(0.06));
}

TEST_CASE("bcv fixture: out-of-bag rows and scaling by n/m*") {
  // n=4 with bootstrap indices (0,0,1,1): OOB = {2,3}, m*=2, scale n/m* = 2
  Eigen::VectorXd y(4);
  y << 0.2, 0.4, 0.6, 0.8;
  Eigen::MatrixXd cols(4, 0);
  auto data = dataset::make(y, {}, cols);
  model_spec spec;
  auto frame = model_frame::build(data, spec);
  auto fit0 = fit(frame);

  boot_replicate rep;
  rep.index = 1;
  rep.ok = true;
  rep.rows = {0, 0, 1, 1};
  rep.m_oob = 2;
  param_vector theta = fit0.theta;
  rep.ll_oob_at_refit = loglik_nothrow(frame.subset({2, 3}), theta);

  bootstrap_set set;
  set.mode = boot_mode::nonparametric;
  set.w_requested = 1;
  set.n = 4;
  set.replicates.push_back(rep);

  const auto report = bcv_report(set, fit0);
  CHECK(report.value ==
        doctest::Approx(-2.0 * rep.ll_oob_at_refit * 4.0 / 2.0).epsilon(1e-13));

  // transcript replay for 632CV: 0.368(-2l) + 0.632 BCV
  const auto combined = cv632_report(set, fit0);
  CHECK(combined.value == doctest::Approx(0.368 * (-2.0 * fit0.loglik) +
                                          0.632 * report.value)
                              .epsilon(1e-13));
}

TEST_CASE("632 arithmetic fixtures") {
  // weights are exactly 0.368 + 0.632 = 1
  CHECK(0.368 + 0.632 == 1.0);
  // BCV = 100, -2l = 50 -> 81.6 ; BQCV = 120, -2l = 100 -> 112.64
  CHECK(0.368 * 50.0 + 0.632 * 100.0 == doctest::Approx(81.6).epsilon(1e-14));
  CHECK(0.368 * 100.0 + 0.632 * 120.0 == doctest::Approx(112.64).epsilon(1e-14));
}

TEST_CASE("bqcv is bounded below by -2 loglik, per replicate and in aggregate") {
  auto fx = make_fixture(103, 50);
  const auto set = make_bootstrap(fx.frame, fx.fit0, boot_mode::parametric, 100, 11,
                                  stream_id(0, 1, 0));
  REQUIRE(set.succeeded() >= set.quorum());
  const double floor = -2.0 * fx.fit0.loglik;
  for (const auto& rep : set.replicates) {
    if (!rep.ok) continue;
    CHECK(-2.0 * rep.ll_orig_at_refit >= floor - 1e-9);
  }
  const auto bqcv = bqcv_report(set, fx.fit0);
  CHECK(bqcv.value >= floor - 1e-9);
  const auto qcv = qcv632_report(set, fx.fit0);
  CHECK(qcv.value >= floor - 1e-9);
  CHECK(qcv.value <= bqcv.value + 1e-9);
}

TEST_CASE("transcript replay: EIC3 and BQCV recomputed from stored replicate logs") {
  auto fx = make_fixture(104, 45);
  const auto set = make_bootstrap(fx.frame, fx.fit0, boot_mode::parametric, 20, 5,
                                  stream_id(0, 2, 0));
  REQUIRE(set.succeeded() >= set.quorum());

  double b3 = 0.0, bqcv_manual = 0.0;
  int used = 0;
  for (const auto& rep : set.replicates) {
    if (!rep.ok) continue;
    b3 += 2.0 * rep.ll_rep_at_refit - 2.0 * rep.ll_rep_at_fit0;
    bqcv_manual += -2.0 * rep.ll_orig_at_refit;
    ++used;
  }
  b3 = 2.0 * (b3 / used);
  bqcv_manual /= used;

  const auto eic3 = eic_report(set, 3, fx.fit0);
  CHECK(eic3.kind == criterion_kind::eic3p);
  CHECK(*eic3.bias_term == doctest::Approx(b3).epsilon(1e-13));
  CHECK(eic3.value == doctest::Approx(-2.0 * fx.fit0.loglik + b3).epsilon(1e-13));
  CHECK(bqcv_report(set, fx.fit0).value == doctest::Approx(bqcv_manual).epsilon(1e-13));
}

TEST_CASE("quorum failure raises a criterion-unavailable error") {
  auto fx = make_fixture(105, 40);
  bootstrap_set set;
  set.mode = boot_mode::parametric;
  set.w_requested = 10;
  set.n = 40;
  for (int i = 0; i < 10; ++i) {
    boot_replicate rep;
    rep.index = i + 1;
    rep.ok = i < 3;  // 3 of 10 < quorum 5
    rep.ll_rep_at_refit = rep.ll_orig_at_refit = rep.ll_rep_at_fit0 = -1.0;
    set.replicates.push_back(rep);
  }
  CHECK_THROWS_AS(bqcv_report(set, fx.fit0), error);
  try {
    eic_report(set, 2, fx.fit0);
    FAIL("expected quorum error");
  } catch (const error& err) {
    CHECK(err.category() == errc::quorum);
  }
}

TEST_CASE("mode mismatches are rejected") {
  auto fx = make_fixture(106, 40);
  const auto pset = make_bootstrap(fx.frame, fx.fit0, boot_mode::parametric, 8, 3,
                                   stream_id(0, 1, 0));
  CHECK_THROWS_AS(bcv_report(pset, fx.fit0), error);
  CHECK_THROWS_AS(cv632_report(pset, fx.fit0), error);
  const auto npset = make_bootstrap(fx.frame, fx.fit0, boot_mode::nonparametric, 8, 3,
                                    stream_id(0, 1, 0));
  CHECK_THROWS_AS(bqcv_report(npset, fx.fit0), error);
}

TEST_CASE("evaluate_criteria shares replicate sets and isolates failures") {
  auto fx = make_fixture(107, 45);
  const std::vector<criterion_kind> kinds = {criterion_kind::aic, criterion_kind::bqcv,
                                             criterion_kind::qcv632, criterion_kind::eic1p};
  const auto res = evaluate_criteria(fx.frame, fx.fit0, kinds, 30, 9, stream_id(0, 1, 0));
  REQUIRE(res.size() == 4);
  for (const auto& entry : res) CHECK(entry.ok);
  // bqcv and 632qcv share the same replicate set: exact convex relation
  CHECK(res[2].report.value == doctest::Approx(0.368 * (-2.0 * fx.fit0.loglik) +
                                               0.632 * res[1].report.value)
                                   .epsilon(1e-13));
  CHECK(res[1].report.w_succeeded == res[3].report.w_succeeded);
}

TEST_CASE("nested specs on the same data have non-increasing -2 loglik") {
  auto prob = oracle::make_random_problem(108, 60, 3, 2);
  double prev = std::numeric_limits<double>::infinity();
  for (int r_cov = 0; r_cov <= 3; ++r_cov) {
    model_spec spec;
    for (int j = 0; j < r_cov; ++j) spec.mean_cols.push_back(j);
    spec.disp_cols = {0};
    const fit_result res = fit(prob.data, spec);
    REQUIRE(res.converged);
    const double m2ll = -2.0 * res.loglik;
    CHECK(m2ll <= prev + 1e-7);
    prev = m2ll;
  }
}
