#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "selliptic/errors.hpp"
#include "selliptic/spherical_profile.hpp"

using namespace selliptic;

namespace {

// Independent oracle: N-dimensional Laplacian of r^{-alpha} by central
// differences, read off as the coefficient of r^{-alpha-2}.
double fd_radial_laplacian_coefficient(int N, double alpha) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(N, 0.31);
  x[0] = 0.47;
  auto f = [&](const Eigen::VectorXd& p) {
    return std::pow(p.norm(), -alpha);
  };
  auto lap_at = [&](double h) {
    double acc = 0.0;
    for (int d = 0; d < N; ++d) {
      Eigen::VectorXd hp = x, hm = x;
      hp[d] += h;
      hm[d] -= h;
      acc += (f(hp) - 2.0 * f(x) + f(hm)) / (h * h);
    }
    return acc;
  };
  const double l1 = lap_at(2e-3), l2 = lap_at(1e-3);
  const double lap = (4.0 * l2 - l1) / 3.0;  // Richardson to O(h^4)
  return lap * std::pow(x.norm(), alpha + 2.0);
}

}  // namespace

TEST_CASE("zero-order coefficient from the radial substitution") {
  CHECK(derive_lambda(2, 2.0) == doctest::Approx(4.0));
  CHECK(derive_lambda(3, 2.0) == doctest::Approx(2.0));
  CHECK(derive_lambda(4, 2.0) == doctest::Approx(0.0));  // N = alpha + 2

  for (int N : {2, 3}) {
    for (double alpha : {0.5, 1.0, 2.0, 2.7}) {
      CHECK(fd_radial_laplacian_coefficient(N, alpha) ==
            doctest::Approx(derive_lambda(N, alpha)).epsilon(1e-6));
    }
  }
  // the alternative convention differs throughout the planar range
  CHECK(paper_lambda(2, 2.0) == doctest::Approx(1.0));
  CHECK(paper_lambda(2, 2.0) != derive_lambda(2, 2.0));
}

TEST_CASE("reduced residual on reference fields") {
  auto pb = make_profile_problem(make_power(3.0), 2, 2.0,
                                 LambdaSource::Derived, 257);

  // zero field has zero residual
  const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(pb.theta_grid.size());
  CHECK(reduced_residual(pb, zero).abs().maxCoeff() == doctest::Approx(0.0));

  // degenerate stub: lambda = 0, h = 0, w = cos(theta) gives residual
  // -cos(theta) (pure second derivative)
  auto stub = make_profile_problem(
      make_custom("zero", [](double) { return 0.0; },
                  [](double) { return 0.0; }),
      2, 2.0, LambdaSource::Derived, 257);
  stub.lambda = 0.0;
  const Eigen::ArrayXd wc = stub.theta_grid.cos();
  const Eigen::ArrayXd r = reduced_residual(stub, wc);
  for (Eigen::Index j = 0; j + 1 < r.size(); j += 16) {
    CHECK(r[j] == doctest::Approx(-std::cos(stub.theta_grid[j])).epsilon(5e-4));
  }
}

TEST_CASE("profile: both methods agree for the reference configuration") {
  auto pb = make_profile_problem(make_power(3.0), 2, 2.0);
  const ProfileSolution col =
      solve_profile(pb, ProfileMethod::MonotoneCollocation);
  const ProfileSolution sht = solve_profile(pb, ProfileMethod::Shooting);

  CHECK(col.residual_sup < 1e-6);
  CHECK(col.w[0] > 0.0);
  CHECK(col.w[col.w.size() - 1] == 0.0);
  CHECK(std::abs(col.w_prime0) < 1e-3 * col.w[0]);
  CHECK(col.kappa > 0.0);

  // positivity away from the rim
  for (Eigen::Index j = 0; j + 1 < col.w.size(); ++j) CHECK(col.w[j] > 0.0);

  const double sup_diff = (col.w - sht.w).abs().maxCoeff();
  CHECK(sup_diff < 1e-4);
  CHECK(sht.kappa == doctest::Approx(col.kappa).epsilon(1e-3));
}

TEST_CASE("profile grid refinement is second order at the axis") {
  auto coarse = make_profile_problem(make_power(3.0), 2, 2.0,
                                     LambdaSource::Derived, 512);
  auto fine = make_profile_problem(make_power(3.0), 2, 2.0,
                                   LambdaSource::Derived, 1024);
  auto finest = make_profile_problem(make_power(3.0), 2, 2.0,
                                     LambdaSource::Derived, 2048);
  const double w0c =
      solve_profile(coarse, ProfileMethod::MonotoneCollocation).w[0];
  const double w0f =
      solve_profile(fine, ProfileMethod::MonotoneCollocation).w[0];
  const double w0ff =
      solve_profile(finest, ProfileMethod::MonotoneCollocation).w[0];
  const double ratio = (w0c - w0f) / (w0f - w0ff);
  CHECK(ratio > 2.0);  // second order gives ~4
  CHECK(ratio < 8.0);
}

TEST_CASE("no positive profile in the degenerate regime") {
  auto pb = make_profile_problem(make_power(3.0), 2, 0.5);
  CHECK_THROWS_AS(solve_profile(pb, ProfileMethod::Shooting), NoProfileFound);
  CHECK_THROWS_AS(solve_profile(pb, ProfileMethod::MonotoneCollocation),
                  NoProfileFound);
}

TEST_CASE("three-dimensional profile solves cleanly") {
  auto pb = make_profile_problem(make_power(3.0), 3, 2.5,
                                 LambdaSource::Derived, 1024);
  const ProfileSolution col =
      solve_profile(pb, ProfileMethod::MonotoneCollocation);
  const ProfileSolution sht = solve_profile(pb, ProfileMethod::Shooting);
  CHECK(col.w[0] > 0.0);
  CHECK((col.w - sht.w).abs().maxCoeff() < 1e-3);
}

TEST_CASE("monotone iterates stay ordered between sub and supersolution") {
  auto pb = make_profile_problem(make_power(3.0), 2, 2.0,
                                 LambdaSource::Derived, 513);
  const Eigen::ArrayXd W = profile_supersolution(pb);

  // delta cos(theta) is a discrete subsolution for small delta
  double delta = 1e-2;
  Eigen::ArrayXd wsub;
  for (; delta > 1e-12; delta *= 0.5) {
    wsub = delta * pb.theta_grid.cos();
    wsub[wsub.size() - 1] = 0.0;
    const Eigen::ArrayXd r = reduced_residual(pb, wsub);
    bool ok = true;
    for (Eigen::Index j = 0; j + 1 < r.size(); ++j)
      if (r[j] < -1e-12) ok = false;
    if (ok) break;
  }
  REQUIRE(delta > 1e-12);

  const auto iterates = profile_monotone_iterates(pb, 8);
  for (std::size_t m = 1; m < iterates.size(); ++m) {
    // descending from the supersolution ...
    CHECK((iterates[m] <= iterates[m - 1] + 1e-9).all());
    // ... but never below the subsolution
    CHECK((iterates[m] >= wsub - 1e-9).all());
  }
  CHECK((iterates.front() == W).all());
}

TEST_CASE("half-space evaluation and self-similar scaling") {
  auto pb = make_profile_problem(make_power(3.0), 2, 2.0);
  const ProfileSolution sol =
      solve_profile(pb, ProfileMethod::MonotoneCollocation);

  const Eigen::Vector2d y(0.0, 0.0), up(0.0, 1.0);
  const double on_axis = evaluate_halfspace_vss(sol, {0.0, 1.0}, y, up);
  CHECK(on_axis == doctest::Approx(sol.w[0]));
  CHECK(evaluate_halfspace_vss(sol, {0.0, 2.0}, y, up) ==
        doctest::Approx(sol.w[0] / 4.0));

  // self-similarity u(a x) = a^{-alpha} u(x)
  const Eigen::Vector2d x(0.3, 0.55);
  const double v1 = evaluate_halfspace_vss(sol, x, y, up);
  const double v3 = evaluate_halfspace_vss(sol, 3.0 * x, y, up);
  CHECK(v3 == doctest::Approx(std::pow(3.0, -2.0) * v1).epsilon(1e-10));

  // boundary ray evaluates to zero
  CHECK(evaluate_halfspace_vss(sol, {1.0, 0.0}, y, up) == 0.0);
}
