#include <doctest.h>

#include <cmath>

#include "selliptic/quadrature.hpp"

using namespace selliptic;

TEST_CASE("adaptive quadrature on smooth integrands") {
  CHECK(quad::integrate([](double x) { return x * x; }, 0.0, 3.0) ==
        doctest::Approx(9.0).epsilon(1e-12));
  CHECK(quad::integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // mildly oscillatory
  CHECK(quad::integrate([](double x) { return std::cos(20.0 * x); }, 0.0,
                        1.0) == doctest::Approx(std::sin(20.0) / 20.0));
}

TEST_CASE("improper integral toward zero: convergent power") {
  // integral_0^1 t^{-1/2} dt = 2
  auto res =
      quad::integrate_to_zero([](double t) { return 1.0 / std::sqrt(t); }, 1.0);
  CHECK(res.verdict == quad::ImproperVerdict::Converges);
  CHECK(res.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(res.exponent == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("improper integral toward zero: divergent power") {
  auto res =
      quad::integrate_to_zero([](double t) { return 1.0 / (t * t); }, 1.0);
  CHECK(res.verdict == quad::ImproperVerdict::Diverges);
}

TEST_CASE("improper integral toward zero: clean critical exponent diverges") {
  auto res = quad::integrate_to_zero([](double t) { return 1.0 / t; }, 1.0);
  CHECK(res.verdict == quad::ImproperVerdict::Diverges);
}

TEST_CASE("improper integral toward infinity") {
  // integral_1^inf s^{-2} ds = 1
  auto res =
      quad::integrate_to_infinity([](double s) { return 1.0 / (s * s); }, 1.0);
  CHECK(res.verdict == quad::ImproperVerdict::Converges);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.exponent == doctest::Approx(2.0).epsilon(1e-6));

  auto log_div =
      quad::integrate_to_infinity([](double s) { return 1.0 / s; }, 2.0);
  CHECK(log_div.verdict == quad::ImproperVerdict::Diverges);

  auto exp_decay = quad::integrate_to_infinity(
      [](double s) { return std::exp(-s); }, 1.0);
  CHECK(exp_decay.verdict == quad::ImproperVerdict::Converges);
  CHECK(exp_decay.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("non-finite integrand raises") {
  CHECK_THROWS_AS(
      quad::integrate([](double x) { return 1.0 / (x - 0.5); }, 0.0, 1.0),
      EvaluationError);
}
