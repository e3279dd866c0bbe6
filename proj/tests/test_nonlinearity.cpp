#include <doctest.h>

#include <cmath>
#include <random>

#include "selliptic/errors.hpp"
#include "selliptic/nonlinearity.hpp"

using namespace selliptic;

TEST_CASE("builtin construction and direct values") {
  const auto cube = make_power(3.0);
  CHECK(cube.h(2.0) == doctest::Approx(8.0));
  CHECK(cube.h_prime(2.0) == doctest::Approx(12.0));

  const auto el = make_exp_linear();
  CHECK(el.h(1.0) == doctest::Approx(std::exp(1.0)));

  CHECK_THROWS_AS(make_power(0.5), InvalidParameter);
  CHECK_THROWS_AS(make_power(1.0), InvalidParameter);
}

TEST_CASE("builtin ids resolve") {
  CHECK(make_builtin_from_id("power:q=3").h(2.0) == doctest::Approx(8.0));
  CHECK(make_builtin_from_id("powerlog:q=2").h(1.0) ==
        doctest::Approx(std::log(2.0)));
  CHECK(make_builtin_from_id("explinear").h(1.0) ==
        doctest::Approx(std::exp(1.0)));
  CHECK_THROWS_AS(make_builtin_from_id("cubic"), InvalidParameter);
}

TEST_CASE("oddness holds exactly for random arguments") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> dist(-40.0, 40.0);
  for (const auto& spec :
       {make_power(3.0), make_power_log(2.0), make_exp_linear()}) {
    for (int i = 0; i < 200; ++i) {
      const double t = dist(rng);
      CHECK(spec.h(t) + spec.h(-t) == 0.0);
    }
  }
}

TEST_CASE("h(t)/t is nondecreasing for builtins") {
  for (const auto& spec :
       {make_power(1.5), make_power(3.0), make_power_log(2.0),
        make_exp_linear()}) {
    double prev = 0.0;
    for (double t = 1e-4; t < 1e3; t *= 1.7) {
      const double ratio = spec.h(t) / t;
      CHECK(ratio >= prev * (1.0 - 1e-12));
      prev = ratio;
    }
  }
}

TEST_CASE("structural checks") {
  CHECK(check_structural(make_power(3.0)).verdict == Verdict::Holds);
  CHECK(check_structural(make_power(3.0)).evidence.at(
            "worst_convexity_defect") <= 0.0);
  CHECK(check_structural(make_power_log(2.0)).verdict == Verdict::Holds);
  CHECK(check_structural(make_exp_linear()).verdict == Verdict::Holds);

  const auto sine = make_custom(
      "sine", [](double t) { return std::sin(t); },
      [](double t) { return std::cos(t); });
  const auto sine_rep = check_structural(sine);
  CHECK(sine_rep.verdict == Verdict::Fails);
  CHECK(sine_rep.notes.find("positivity") != std::string::npos);

  const auto root = make_custom(
      "sqrt", [](double t) { return std::sqrt(t); },
      [](double t) { return 0.5 / std::sqrt(t); });
  const auto root_rep = check_structural(root);
  CHECK(root_rep.verdict == Verdict::Fails);
  CHECK(root_rep.notes.find("convexity") != std::string::npos);
}

TEST_CASE("growth condition: cubic closed form and linear log divergence") {
  // h = t^3: F(s) = s^4/4, integrand sqrt(2)/s^2, integral from a is sqrt(2)/a
  auto rep = check_KO(make_power(3.0), 1.0);
  CHECK(rep.verdict == Verdict::Holds);
  CHECK(rep.evidence.at("integral") ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));

  auto rep2 = check_KO(make_power(3.0), 2.0);
  CHECK(rep2.verdict == Verdict::Holds);
  CHECK(rep2.evidence.at("integral") ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-9));

  const auto linear = make_custom(
      "linear", [](double t) { return t; }, [](double) { return 1.0; });
  CHECK(check_KO(linear, 1.0).verdict == Verdict::Fails);

  for (double q : {1.5, 2.0, 3.0, 5.0})
    CHECK(check_KO(make_power(q), 1.0).verdict == Verdict::Holds);
  CHECK(check_KO(make_exp_linear(), 1.0).verdict == Verdict::Holds);
  CHECK_THROWS_AS(check_KO(make_power(3.0), -1.0), InvalidParameter);
}

TEST_CASE("doubling condition verdicts") {
  auto cube = check_delta2(make_power(3.0));
  CHECK(cube.verdict == Verdict::Holds);
  CHECK(cube.evidence.at("c") == doctest::Approx(4.0).epsilon(1e-9));

  auto square = check_delta2(make_power(2.0));
  CHECK(square.verdict == Verdict::Holds);
  CHECK(square.evidence.at("c") == doctest::Approx(2.0).epsilon(1e-9));

  CHECK(check_delta2(make_exp_linear()).verdict == Verdict::Fails);
  CHECK(check_delta2(make_power_log(2.0)).verdict == Verdict::Holds);
}

TEST_CASE("growth exponent near zero") {
  auto cube = estimate_hzero_epsilon(make_power(3.0));
  CHECK(cube.verdict == Verdict::Holds);
  CHECK(cube.evidence.at("epsilon") == doctest::Approx(2.0).epsilon(1e-6));

  auto el = estimate_hzero_epsilon(make_exp_linear());
  CHECK(el.verdict == Verdict::Fails);
  CHECK(el.evidence.at("sigma_fit") == doctest::Approx(1.0).epsilon(1e-2));

  auto plog = estimate_hzero_epsilon(make_power_log(2.0));
  CHECK(plog.verdict == Verdict::Holds);
  CHECK(plog.evidence.at("sigma_fit") > 2.9);
  CHECK(plog.evidence.at("sigma_fit") <= 3.0 + 1e-9);
}

TEST_CASE("boundary-singular integral and classifier") {
  ProblemParams p{2, 2.0, 1.0};
  auto rep = check_subcritical(make_power(3.0), p);
  CHECK(rep.verdict == Verdict::Holds);
  CHECK(rep.evidence.at("integral_value") == doctest::Approx(0.5));
  CHECK(rep.evidence.at("classifier") == 1.0);
  CHECK(rep.evidence.at("consistent") == 1.0);

  ProblemParams sup{2, 0.5, 1.0};
  auto rep2 = check_subcritical(make_power(3.0), sup);
  CHECK(rep2.verdict == Verdict::Fails);
  CHECK(rep2.evidence.at("classifier") == 0.0);
  CHECK(rep2.evidence.at("consistent") == 1.0);

  // boundary case alpha = N-1
  ProblemParams boundary{2, 1.0, 1.0};
  CHECK(check_subcritical_classifier(make_power(3.0), boundary).verdict ==
        Verdict::Fails);
  CHECK(check_subcritical_classifier(make_exp_linear(), boundary).verdict ==
        Verdict::Fails);
}

TEST_CASE("classifier equivalence over an alpha sweep, all builtins") {
  for (int N : {2, 3}) {
    for (const auto& spec :
         {make_power(3.0), make_power_log(2.0), make_exp_linear()}) {
      for (double alpha = 0.25; alpha <= 3.0 * (N - 1) + 1e-12; alpha += 0.25) {
        if (std::abs(alpha - (N - 1)) < 1e-12) continue;
        ProblemParams p{N, alpha, 1.0};
        const auto rep = check_subcritical(spec, p);
        CAPTURE(spec.name());
        CAPTURE(N);
        CAPTURE(alpha);
        CHECK(rep.evidence.at("consistent") == 1.0);
      }
    }
  }
}

TEST_CASE("verdicts invariant under amplitude rescaling") {
  for (double alpha : {0.5, 2.0}) {
    ProblemParams p1{2, alpha, 1.0}, p2{2, alpha, 2.0};
    CHECK(check_subcritical(make_power(3.0), p1).verdict ==
          check_subcritical(make_power(3.0), p2).verdict);
  }
}

TEST_CASE("zero-side weighted integrability") {
  ProblemParams p{2, 2.0, 1.0};
  auto rep = check_local_integrability(make_power(3.0), p, 1.0);
  CHECK(rep.verdict == Verdict::Holds);
  CHECK(rep.evidence.at("integral_value") == doctest::Approx(0.25));

  // any power q > 1 integrates for every alpha > 0
  for (double q : {1.5, 2.0, 4.0}) {
    for (double alpha : {0.3, 1.0, 2.5}) {
      ProblemParams pp{2, alpha, 1.0};
      CHECK(check_local_integrability(make_power(q), pp, 1.0).verdict ==
            Verdict::Holds);
    }
  }

  ProblemParams pe{2, 1.0, 1.0};
  CHECK(check_local_integrability(make_exp_linear(), pe, 1.0).verdict ==
        Verdict::Fails);
}
