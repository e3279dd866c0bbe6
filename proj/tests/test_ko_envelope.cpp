#include <doctest.h>

#include <cmath>
#include <sstream>

#include "selliptic/errors.hpp"
#include "selliptic/ko_envelope.hpp"

using namespace selliptic;

namespace {
// RK4 propagation of v'' = c1 h(c2 v), the independent check that the scaled
// envelope actually solves the blow-up equation.
double propagate_blowup_ode(const KOEnvelope& env, double c1, double c2,
                            double s0, double s1, int steps) {
  const double ds = (s1 - s0) / steps;
  const double eps = 1e-6 * s0;
  double v = env.scaled_phi(c1, c2, s0);
  double vp = (env.scaled_phi(c1, c2, s0 + eps) -
               env.scaled_phi(c1, c2, s0 - eps)) /
              (2.0 * eps);
  auto acc = [&](double val) { return c1 * env.spec().h(c2 * val); };
  double s = s0;
  for (int k = 0; k < steps; ++k) {
    const double k1v = vp, k1a = acc(v);
    const double k2v = vp + 0.5 * ds * k1a, k2a = acc(v + 0.5 * ds * k1v);
    const double k3v = vp + 0.5 * ds * k2a, k3a = acc(v + 0.5 * ds * k2v);
    const double k4v = vp + ds * k3a, k4a = acc(v + ds * k3v);
    v += ds / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    vp += ds / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
    s += ds;
  }
  return v;
}
}  // namespace

TEST_CASE("primitive closed forms") {
  const KOEnvelope cube(make_power(3.0));
  CHECK(cube.primitive(2.0) == doctest::Approx(4.0));
  CHECK(cube.primitive(0.0) == doctest::Approx(0.0));
  const KOEnvelope square(make_power(2.0));
  CHECK(square.primitive(3.0) == doctest::Approx(9.0));
}

TEST_CASE("psi closed form for the cubic") {
  const KOEnvelope env(make_power(3.0));
  CHECK(env.psi(1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(env.psi(2.0) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-9));
  // psi(a) = sqrt(2)/a across three decades
  for (double a = 0.1; a <= 100.0; a *= 3.1623) {
    CHECK(env.psi(a) == doctest::Approx(std::sqrt(2.0) / a).epsilon(1e-8));
  }
}

TEST_CASE("psi power law is self-consistent for general powers") {
  for (double q : {1.5, 2.0, 5.0}) {
    const KOEnvelope env(make_power(q));
    const double kq = env.psi(1.0);  // kappa_q by quadrature at a=1
    const double expo = -(q - 1.0) / 2.0;
    for (double a : {0.2, 1.7, 31.0, 420.0}) {
      CHECK(env.psi(a) == doctest::Approx(kq * std::pow(a, expo)).epsilon(1e-8));
    }
  }
}

TEST_CASE("phi inverts psi") {
  const KOEnvelope env(make_power(3.0));
  CHECK(env.phi(std::sqrt(2.0)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(env.phi(std::sqrt(2.0) / 2.0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK_THROWS_AS(env.phi(-1.0), RangeError);

  for (double a = 1e-3; a < 1e5; a *= 13.7) {
    const double s = env.psi(a);
    CHECK(env.phi(s) == doctest::Approx(a).epsilon(1e-8));
  }
}

TEST_CASE("psi and phi are strictly decreasing on the table") {
  const KOEnvelope env(make_power_log(2.0), 1e-4, 1e6, 64);
  const auto& t = env.table();
  for (Eigen::Index i = 1; i < t.rows(); ++i) {
    CHECK(t(i, 1) < t(i - 1, 1));
  }
}

TEST_CASE("scaled_phi") {
  const KOEnvelope env(make_power(3.0));
  // identity scaling reduces to phi
  CHECK(env.scaled_phi(1.0, 1.0, 0.7) == doctest::Approx(env.phi(0.7)));
  // closed form: phi(s) = sqrt(2)/s, so scaled value is sqrt(2)/(c2 ...)
  const double v = env.scaled_phi(1.0, 4.0, std::sqrt(2.0) / 2.0);
  CHECK(v == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("scaled envelope solves the blow-up equation (RK4 oracle)") {
  const KOEnvelope env(make_power(3.0));
  const double alpha = 3.0, R = 0.5;
  const double c1 = std::pow(3.0 * R, -2.0 - alpha);
  const double c2 = std::pow(R, alpha);
  const double propagated = propagate_blowup_ode(env, c1, c2, 0.05, 1.0, 4000);
  CHECK(propagated ==
        doctest::Approx(env.scaled_phi(c1, c2, 1.0)).epsilon(1e-5));
}

TEST_CASE("interior bound constants") {
  const KOEnvelope env(make_power(3.0));
  const GlobalBound b2 = global_bound_constant(env, 2.0);
  CHECK(b2.C == doctest::Approx(54.0 * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(b2.kind == BoundKind::Interior);
  const GlobalBound b0 = global_bound_constant(env, 0.0);
  CHECK(b0.C == doctest::Approx(4.5 * std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("no envelope for linear growth") {
  const auto linear = make_custom(
      "linear", [](double t) { return t; }, [](double) { return 1.0; });
  CHECK_THROWS_AS(KOEnvelope{linear}, DivergentEnvelope);
}

TEST_CASE("envelope csv export") {
  const KOEnvelope env(make_power(3.0), 1e-2, 1e2, 16);
  std::ostringstream os;
  write_envelope_csv(env, os);
  const std::string text = os.str();
  CHECK(text.rfind("a,psi\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 17);
}
