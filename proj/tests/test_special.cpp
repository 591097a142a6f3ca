#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "betasel/rng.hpp"
#include "betasel/special.hpp"
#include "oracles.hpp"

using namespace betasel;

TEST_CASE("log_gamma known values") {
  CHECK(std::fabs(log_gamma(1.0)) <= 1e-15);
  // Gamma(1/2) = sqrt(pi)
  CHECK(log_gamma(0.5) == doctest::Approx(0.57236494292470008707).epsilon(1e-14));
  // frozen from a 40-digit evaluation
  CHECK(log_gamma(10.3) == doctest::Approx(13.482036786138356971).epsilon(1e-14));
  CHECK(log_gamma(2.0) == doctest::Approx(0.0).scale(1e-15));
}

TEST_CASE("log_gamma tracks the high-precision oracle over [1e-6, 1e6]") {
  rng_stream rng(101, 0);
  for (int i = 0; i < 200; ++i) {
    const double expo = -6.0 + 12.0 * rng.uniform();
    const double u = std::pow(10.0, expo);
    const double ours = log_gamma(u);
    const double ref = oracle::lgamma_ref(u);
    // absolute 1e-12 where the value is representable at that accuracy,
    // a few ulp otherwise
    const double tol = std::max(1e-12, 4.0 * std::fabs(ref) * 1e-16);
    CHECK(std::fabs(ours - ref) <= tol);
  }
}

TEST_CASE("log_gamma rejects bad arguments") {
  CHECK_THROWS_AS(log_gamma(0.0), error);
  CHECK_THROWS_AS(log_gamma(-3.0), error);
  CHECK_THROWS_AS(log_gamma(std::numeric_limits<double>::quiet_NaN()), error);
  CHECK_THROWS_AS(log_gamma(std::numeric_limits<double>::infinity()), error);
}

TEST_CASE("digamma identities and oracle agreement") {
  // psi(1) = -EulerMascheroni
  CHECK(digamma(1.0) == doctest::Approx(-0.57721566490153286061).epsilon(1e-13));
  CHECK(digamma(123.456) == doctest::Approx(4.8118293238289853873).epsilon(1e-13));

  // finite difference of log_gamma at 7.7
  const double fd = oracle::central_diff([](double x) { return log_gamma(x); }, 7.7, 1e-5);
  CHECK(std::fabs(digamma(7.7) - fd) <= 1e-6);
  CHECK(digamma(7.7) == doctest::Approx(1.974882094913101819).epsilon(1e-13));

  rng_stream rng(7, 0);
  for (int i = 0; i < 200; ++i) {
    const double u = std::pow(10.0, -4.0 + 8.0 * rng.uniform());
    const double ref = oracle::digamma_ref(u);
    CHECK(std::fabs(digamma(u) - ref) <= 1e-10 * std::max(1.0, std::fabs(ref)));
  }
  CHECK_THROWS_AS(digamma(0.0), error);
  CHECK_THROWS_AS(digamma(-1.0), error);
}

TEST_CASE("digamma recurrence psi(u+1)-psi(u) = 1/u") {
  rng_stream rng(8, 0);
  for (int i = 0; i < 100; ++i) {
    const double u = 0.01 + 99.99 * rng.uniform();
    const double lhs = digamma(u + 1.0) - digamma(u);
    CHECK(std::fabs(lhs - 1.0 / u) <= 1e-9 * std::max(1.0, 1.0 / u));
  }
}

TEST_CASE("digamma equals derivative of log_gamma on random points") {
  rng_stream rng(9, 0);
  for (int i = 0; i < 100; ++i) {
    const double u = 0.05 + 50.0 * rng.uniform();
    const double fd = oracle::central_diff([](double x) { return log_gamma(x); }, u, 1e-5);
    CHECK(std::fabs(digamma(u) - fd) <= 1e-6 * std::max(1.0, std::fabs(fd)));
  }
}

TEST_CASE("trigamma identities and oracle agreement") {
  // psi'(1) = pi^2/6
  CHECK(trigamma(1.0) == doctest::Approx(1.6449340668482264365).epsilon(1e-13));
  CHECK(trigamma(55.25) == doctest::Approx(0.018264332472686440347).epsilon(1e-13));

  const double fd = oracle::central_diff([](double x) { return digamma(x); }, 3.2, 1e-4);
  CHECK(std::fabs(trigamma(3.2) - fd) <= 1e-6);
  CHECK(trigamma(3.2) == doctest::Approx(0.36632119073140079456).epsilon(1e-13));

  rng_stream rng(10, 0);
  for (int i = 0; i < 200; ++i) {
    const double u = std::pow(10.0, -4.0 + 8.0 * rng.uniform());
    const double ref = oracle::trigamma_ref(u);
    CHECK(std::fabs(trigamma(u) - ref) <= 1e-10 * std::fabs(ref));
    CHECK(trigamma(u) > 0.0);
  }
  CHECK_THROWS_AS(trigamma(0.0), error);
}

TEST_CASE("trigamma recurrence psi'(u)-psi'(u+1) = 1/u^2") {
  rng_stream rng(11, 0);
  for (int i = 0; i < 100; ++i) {
    const double u = 0.01 + 99.99 * rng.uniform();
    const double lhs = trigamma(u) - trigamma(u + 1.0);
    CHECK(std::fabs(lhs - 1.0 / (u * u)) <= 1e-9 * std::max(1.0, 1.0 / (u * u)));
  }
}

TEST_CASE("normal quantile/cdf round trip and reference points") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1e-15));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  rng_stream rng(12, 0);
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform();
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(oracle::norm_cdf(normal_quantile(p))).epsilon(1e-13));
  }
}
