#include "selliptic/spherical_profile.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "selliptic/errors.hpp"

namespace selliptic {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 0.5 * kPi;
}  // namespace

double derive_lambda(int N, double alpha) {
  if (N < 2 || !(alpha > 0.0))
    throw InvalidParameter("derive_lambda requires N >= 2, alpha > 0");
  return alpha * (alpha + 2.0 - N);
}

double paper_lambda(int N, double alpha) { return alpha - (N - 1); }

void cosine_clustered_grid(int nodes, Eigen::ArrayXd& theta,
                           Eigen::ArrayXd& s) {
  if (nodes < 16) throw InvalidParameter("profile grid needs >= 16 nodes");
  theta.resize(nodes);
  s.resize(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double xi = j / double(nodes - 1);
    theta[j] = kHalfPi * std::sin(kHalfPi * xi);
    // pi/2 (1 - sin(pi xi / 2)) = pi sin^2(pi (1-xi) / 4), cancellation-free
    const double u = std::sin(0.25 * kPi * (1.0 - xi));
    s[j] = kPi * u * u;
  }
  theta[0] = 0.0;
  theta[nodes - 1] = kHalfPi;
  s[nodes - 1] = 0.0;
}

double ProfileProblem::forcing(double s, double w) const {
  if (w == 0.0 || amp0 == 0.0) return 0.0;
  const double c = std::sin(s);
  if (c <= 0.0) return 0.0;
  const double aw = std::abs(w);
  const double lc = std::log(c);
  const double lt = alpha * lc + std::log(aw);
  const double sign = w > 0.0 ? 1.0 : -1.0;
  if (lt < std::log(1e-30)) {
    // forcing argument deep below representability of h: local power model
    const double le = std::log(amp0) + sigma0 * lt - (2.0 + alpha) * lc;
    return le < -700.0 ? 0.0 : sign * std::exp(le);
  }
  const double t = std::exp(lt);
  return sign * spec.h(t) * std::pow(c, -(2.0 + alpha));
}

double ProfileProblem::forcing_dw(double s, double w) const {
  if (amp0 == 0.0) return 0.0;
  const double c = std::sin(s);
  if (c <= 0.0) return 0.0;
  const double aw = std::abs(w);
  const double lc = std::log(c);
  if (aw == 0.0) {
    if (sigma0 > 1.0) return 0.0;
    return spec.h_prime(0.0) / (c * c);
  }
  const double lt = alpha * lc + std::log(aw);
  if (lt < std::log(1e-30)) {
    const double le =
        std::log(amp0 * sigma0) + (sigma0 - 1.0) * lt - 2.0 * lc;
    return le < -700.0 ? 0.0 : std::exp(le);
  }
  return spec.h_prime(std::exp(lt)) / (c * c);
}

ProfileProblem make_profile_problem(NonlinearitySpec spec, int N, double alpha,
                                    LambdaSource source, int nodes) {
  ProfileProblem p;
  p.N = N;
  p.alpha = alpha;
  p.lambda_source = source;
  p.lambda = source == LambdaSource::Derived ? derive_lambda(N, alpha)
                                             : paper_lambda(N, alpha);
  cosine_clustered_grid(nodes, p.theta_grid, p.s_grid);

  if (spec.is_builtin()) {
    p.sigma0 = builtin_growth_exponent_at_zero(spec);
    p.amp0 = 1.0;
  } else {
    const double t0 = 1e-6, t1 = 1e-5;
    const double h0 = spec.h(t0), h1 = spec.h(t1);
    if (h0 > 0.0 && h1 > 0.0) {
      p.sigma0 = std::log(h1 / h0) / std::log(t1 / t0);
      p.amp0 = h0 / std::pow(t0, p.sigma0);
    } else {
      p.sigma0 = 1.0;
      p.amp0 = 0.0;  // degenerate stub: forcing vanishes below threshold
    }
  }
  p.spec = std::move(spec);
  return p;
}

namespace {
// Node spacing theta_b - theta_a for adjacent nodes, taken from whichever of
// the two grid representations is cancellation-free at that end.
inline double node_gap(const ProfileProblem& pb, Eigen::Index a,
                       Eigen::Index b) {
  return pb.theta_grid[a] < 0.785 ? pb.theta_grid[b] - pb.theta_grid[a]
                                  : pb.s_grid[a] - pb.s_grid[b];
}
}  // namespace

Eigen::ArrayXd reduced_residual(const ProfileProblem& pb,
                                const Eigen::ArrayXd& w) {
  const Eigen::ArrayXd& th = pb.theta_grid;
  const Eigen::ArrayXd& s = pb.s_grid;
  const Eigen::Index M = th.size();
  if (w.size() != M)
    throw InvalidParameter("candidate values do not match the problem grid");
  Eigen::ArrayXd r = Eigen::ArrayXd::Zero(M);

  // axis node: symmetric limit (N-1) w''(0)
  {
    const double h1 = th[1] - th[0];
    const double d2 = 2.0 * (w[1] - w[0]) / (h1 * h1);
    r[0] = (pb.N - 1) * d2 + pb.lambda * w[0] - pb.forcing(s[0], w[0]);
  }
  for (Eigen::Index j = 1; j + 1 < M; ++j) {
    const double hm = node_gap(pb, j - 1, j);
    const double hp = node_gap(pb, j, j + 1);
    const double d2 = 2.0 * (w[j - 1] / (hm * (hm + hp)) - w[j] / (hm * hp) +
                             w[j + 1] / (hp * (hm + hp)));
    const double d1 = -hp / (hm * (hm + hp)) * w[j - 1] +
                      (hp - hm) / (hm * hp) * w[j] +
                      hm / (hp * (hm + hp)) * w[j + 1];
    const double cot = std::cos(th[j]) / std::sin(th[j]);
    r[j] = d2 + (pb.N - 2) * cot * d1 + pb.lambda * w[j] -
           pb.forcing(s[j], w[j]);
    if (!std::isfinite(r[j]))
      throw EvaluationError("non-finite residual at theta=" +
                            std::to_string(th[j]));
  }
  return r;
}

namespace {

// Tridiagonal rows of the linearized operator: D2 + (N-2) cot D1 + diag.
struct TriDiag {
  Eigen::ArrayXd lower, diag, upper;  // sized M-1 unknowns (Dirichlet at M-1)
};

TriDiag assemble(const ProfileProblem& pb, const Eigen::ArrayXd& diag_term) {
  const Eigen::ArrayXd& th = pb.theta_grid;
  const Eigen::Index n = th.size() - 1;  // unknowns 0..M-2
  TriDiag t;
  t.lower = Eigen::ArrayXd::Zero(n);
  t.diag = Eigen::ArrayXd::Zero(n);
  t.upper = Eigen::ArrayXd::Zero(n);

  const double h1 = th[1] - th[0];
  t.diag[0] = -2.0 * (pb.N - 1) / (h1 * h1) + diag_term[0];
  t.upper[0] = 2.0 * (pb.N - 1) / (h1 * h1);
  for (Eigen::Index j = 1; j < n; ++j) {
    const double hm = node_gap(pb, j - 1, j);
    const double hp = node_gap(pb, j, j + 1);
    const double cot = std::cos(th[j]) / std::sin(th[j]);
    const double cN = (pb.N - 2) * cot;
    t.lower[j] = 2.0 / (hm * (hm + hp)) - cN * hp / (hm * (hm + hp));
    t.diag[j] = -2.0 / (hm * hp) + cN * (hp - hm) / (hm * hp) + diag_term[j];
    t.upper[j] = 2.0 / (hp * (hm + hp)) + cN * hm / (hp * (hm + hp));
  }
  return t;
}

Eigen::ArrayXd solve_tridiag(const TriDiag& t, const Eigen::ArrayXd& rhs) {
  const Eigen::Index n = rhs.size();
  Eigen::SparseMatrix<double> A(n, n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(3 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    trip.emplace_back(j, j, t.diag[j]);
    if (j > 0) trip.emplace_back(j, j - 1, t.lower[j]);
    if (j + 1 < n) trip.emplace_back(j, j + 1, t.upper[j]);
  }
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success)
    throw SolverError("profile linearization is singular");
  Eigen::VectorXd x = lu.solve(rhs.matrix());
  return x.array();
}

double sup_norm(const Eigen::ArrayXd& v) { return v.abs().maxCoeff(); }

}  // namespace

Eigen::ArrayXd profile_supersolution(const ProfileProblem& pb) {
  const Eigen::Index M = pb.theta_grid.size();
  double B = 1.0;
  for (int attempt = 0; attempt < 100; ++attempt, B *= 2.0) {
    Eigen::ArrayXd W(M);
    for (Eigen::Index j = 0; j + 1 < M; ++j) {
      const double c = std::sin(pb.s_grid[j]);
      W[j] = B * std::pow(c, -pb.alpha);
    }
    W[M - 1] = 0.0;
    const Eigen::ArrayXd r = reduced_residual(pb, W);
    bool ok = true;
    for (Eigen::Index j = 0; j + 1 < M && ok; ++j) {
      if (r[j] > 1e-9 * (1.0 + std::abs(pb.lambda) * W[j])) ok = false;
    }
    if (ok) return W;
  }
  throw SolverError("no envelope supersolution found by doubling");
}

namespace {

enum class ShotOutcome { Crossed, Survived };

struct ShotResult {
  ShotOutcome outcome;
  std::vector<double> theta, w, v;  // recorded trajectory (when requested)
};

ShotResult shoot(const ProfileProblem& pb, double w0, int steps,
                 bool record) {
  const double theta0 = 1e-7;
  const double w2 = (pb.forcing(kHalfPi, w0) - pb.lambda * w0) / (pb.N - 1);
  double th = theta0;
  double w = w0 + 0.5 * w2 * theta0 * theta0;
  double v = w2 * theta0;

  auto rhs = [&](double t, double wc, double vc, double& dw, double& dv) {
    const double cot = std::cos(t) / std::sin(t);
    dw = vc;
    dv = -(pb.N - 2) * cot * vc - pb.lambda * wc + pb.forcing(kHalfPi - t, wc);
  };

  ShotResult res;
  res.outcome = ShotOutcome::Survived;
  if (record) {
    res.theta.push_back(th);
    res.w.push_back(w);
    res.v.push_back(v);
  }
  const double dt = (kHalfPi - theta0) / steps;
  for (int k = 0; k < steps; ++k) {
    double k1w, k1v, k2w, k2v, k3w, k3v, k4w, k4v;
    rhs(th, w, v, k1w, k1v);
    rhs(th + 0.5 * dt, w + 0.5 * dt * k1w, v + 0.5 * dt * k1v, k2w, k2v);
    rhs(th + 0.5 * dt, w + 0.5 * dt * k2w, v + 0.5 * dt * k2v, k3w, k3v);
    rhs(th + dt, w + dt * k3w, v + dt * k3v, k4w, k4v);
    w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    th += dt;
    if (!std::isfinite(w) || !std::isfinite(v) || std::abs(w) > 1e12 ||
        std::abs(v) > 1e12) {
      res.outcome = ShotOutcome::Survived;  // blow-up counts as staying positive
      return res;
    }
    if (w <= 0.0 && th < kHalfPi - 1e-12) {
      res.outcome = ShotOutcome::Crossed;
      return res;
    }
    if (record) {
      res.theta.push_back(th);
      res.w.push_back(w);
      res.v.push_back(v);
    }
  }
  return res;
}

// cubic Hermite interpolation of a recorded trajectory onto grid nodes
Eigen::ArrayXd trajectory_to_grid(const ShotResult& traj,
                                  const Eigen::ArrayXd& theta_grid) {
  const Eigen::Index M = theta_grid.size();
  Eigen::ArrayXd w(M);
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < M; ++j) {
    const double t = theta_grid[j];
    if (t <= traj.theta.front()) {
      w[j] = traj.w.front();
      continue;
    }
    if (t >= traj.theta.back()) {
      w[j] = traj.w.back();
      continue;
    }
    while (k + 1 < traj.theta.size() && traj.theta[k + 1] < t) ++k;
    const double t0 = traj.theta[k], t1 = traj.theta[k + 1];
    const double hgap = t1 - t0;
    const double u = (t - t0) / hgap;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    w[j] = h00 * traj.w[k] + h10 * hgap * traj.v[k] + h01 * traj.w[k + 1] +
           h11 * hgap * traj.v[k + 1];
  }
  return w;
}

void finalize_solution(const ProfileProblem& pb, ProfileSolution& sol) {
  const Eigen::Index M = pb.theta_grid.size();
  sol.theta_grid = pb.theta_grid;
  sol.alpha = pb.alpha;
  sol.w[M - 1] = 0.0;
  sol.w_prime0 = (sol.w[1] - sol.w[0]) / (pb.theta_grid[1] - pb.theta_grid[0]);
  // boundary slope by Richardson from the last two interior nodes
  const double sa = pb.s_grid[M - 2], sb = pb.s_grid[M - 3];
  const double ka = sol.w[M - 2] / sa, kb = sol.w[M - 3] / sb;
  sol.kappa = (ka * sb * sb - kb * sa * sa) / (sb * sb - sa * sa);
  const Eigen::ArrayXd r = reduced_residual(pb, sol.w);
  sol.residual_sup = sup_norm(r);
}

}  // namespace

std::vector<Eigen::ArrayXd> profile_monotone_iterates(
    const ProfileProblem& pb, int steps) {
  const Eigen::Index M = pb.theta_grid.size();
  const Eigen::Index n = M - 1;
  Eigen::ArrayXd w = profile_supersolution(pb);

  Eigen::ArrayXd K(n);
  for (Eigen::Index j = 0; j < n; ++j)
    K[j] = pb.forcing_dw(pb.s_grid[j], w[j]) + std::abs(pb.lambda) + 1.0;
  const TriDiag op = assemble(pb, Eigen::ArrayXd(pb.lambda - K));

  std::vector<Eigen::ArrayXd> iterates;
  iterates.push_back(w);
  for (int m = 0; m < steps; ++m) {
    Eigen::ArrayXd rhs(n);
    for (Eigen::Index j = 0; j < n; ++j)
      rhs[j] = -K[j] * w[j] + pb.forcing(pb.s_grid[j], w[j]);
    const Eigen::ArrayXd next = solve_tridiag(op, rhs);
    w.head(n) = next;
    iterates.push_back(w);
  }
  return iterates;
}

ProfileSolution solve_profile(const ProfileProblem& pb, ProfileMethod method,
                              const ProfileSolverConfig& cfg) {
  const Eigen::Index M = pb.theta_grid.size();
  ProfileSolution sol;
  sol.method = method;

  if (method == ProfileMethod::Shooting) {
    // bracket scan over the axis value, then bisection on the outcome
    std::vector<double> svals;
    for (double s0 = cfg.shoot_s_lo; s0 <= cfg.shoot_s_hi; s0 *= 2.0)
      svals.push_back(s0);
    int pre_steps = std::max(2048, cfg.shoot_steps / 16);
    double lo = -1.0, hi = -1.0;
    ShotOutcome prev =
        shoot(pb, svals[0], pre_steps, false).outcome;
    for (std::size_t i = 1; i < svals.size(); ++i) {
      const ShotOutcome cur = shoot(pb, svals[i], pre_steps, false).outcome;
      if (prev == ShotOutcome::Crossed && cur == ShotOutcome::Survived) {
        lo = svals[i - 1];
        hi = svals[i];
        break;
      }
      prev = cur;
    }
    if (lo < 0.0)
      throw NoProfileFound(
          "no sign change of the terminal value over the axis-value scan");

    for (int it = 0; it < 200 && (hi - lo) > cfg.bisect_rel_tol * hi; ++it) {
      const double mid = std::sqrt(lo * hi);
      const ShotOutcome out = shoot(pb, mid, cfg.shoot_steps, false).outcome;
      (out == ShotOutcome::Crossed ? lo : hi) = mid;
    }
    ShotResult final_run = shoot(pb, hi, cfg.shoot_steps, true);
    if (final_run.outcome != ShotOutcome::Survived)
      throw SolverError("bisection endpoint failed to survive to the rim");
    sol.w = trajectory_to_grid(final_run, pb.theta_grid);
    finalize_solution(pb, sol);
    return sol;
  }

  // Monotone collocation: damped Newton descending from the envelope
  // supersolution, with a fixed-slope monotone fallback.
  Eigen::ArrayXd w = profile_supersolution(pb);
  const Eigen::Index n = M - 1;

  auto residual_interior = [&](const Eigen::ArrayXd& full) {
    return Eigen::ArrayXd(reduced_residual(pb, full).head(n));
  };

  Eigen::ArrayXd r = residual_interior(w);
  double rnorm = sup_norm(r);
  int newton_count = 0;
  while (rnorm > cfg.newton_tol) {
    if (cfg.verbose) {
      Eigen::Index am;
      r.abs().maxCoeff(&am);
      std::printf("  newton %3d rnorm=%.3e argmax=%td w=%.3e\n", newton_count,
                  rnorm, static_cast<ptrdiff_t>(am), w[am]);
    }
    if (++newton_count > cfg.max_newton)
      throw SolverError("profile Newton stagnated, residual=" +
                        std::to_string(rnorm));
    Eigen::ArrayXd fw(n);
    for (Eigen::Index j = 0; j < n; ++j)
      fw[j] = pb.forcing_dw(pb.s_grid[j], w[j]);
    const TriDiag J = assemble(pb, Eigen::ArrayXd(pb.lambda - fw));
    const Eigen::ArrayXd delta = solve_tridiag(J, Eigen::ArrayXd(-r));

    double damp = 1.0;
    bool improved = false;
    for (int half = 0; half < 15; ++half, damp *= 0.5) {
      Eigen::ArrayXd trial = w;
      trial.head(n) += damp * delta;
      Eigen::ArrayXd rt;
      try {
        rt = residual_interior(trial);
      } catch (const EvaluationError&) {
        continue;
      }
      const double tn = sup_norm(rt);
      if (tn < rnorm) {
        w = trial;
        r = rt;
        rnorm = tn;
        improved = true;
        break;
      }
    }
    if (!improved) {
      // monotone fallback steps with a dominating fixed slope
      Eigen::ArrayXd K(n);
      for (Eigen::Index j = 0; j < n; ++j)
        K[j] = pb.forcing_dw(pb.s_grid[j], w[j]) + std::abs(pb.lambda) + 1.0;
      const TriDiag op = assemble(pb, Eigen::ArrayXd(pb.lambda - K));
      for (int m = 0; m < 5; ++m) {
        Eigen::ArrayXd rhs(n);
        for (Eigen::Index j = 0; j < n; ++j)
          rhs[j] = -K[j] * w[j] + pb.forcing(pb.s_grid[j], w[j]);
        w.head(n) = solve_tridiag(op, rhs);
      }
      const double prev = rnorm;
      r = residual_interior(w);
      rnorm = sup_norm(r);
      if (rnorm > prev * (1.0 - 1e-3)) {
        // rounding floor of the discretization; accept when near tolerance
        if (rnorm <= 10.0 * cfg.newton_tol) break;
        throw SolverError("profile Newton stagnated, residual=" +
                          std::to_string(rnorm));
      }
    }
  }

  if (w.head(n).maxCoeff() < 1e-7)
    throw NoProfileFound("collocation iterates collapsed to zero");
  sol.w = w;
  finalize_solution(pb, sol);
  return sol;
}

double ProfileSolution::interpolate(double theta) const {
  const Eigen::Index M = theta_grid.size();
  if (theta <= 0.0) return w[0];
  if (theta >= kHalfPi) return 0.0;
  Eigen::Index k = 0;
  // binary search for the containing interval
  Eigen::Index lo = 0, hi = M - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    (theta_grid[mid] <= theta ? lo : hi) = mid;
  }
  k = lo;
  const double t0 = theta_grid[k], t1 = theta_grid[k + 1];
  const double hgap = t1 - t0;
  // slopes by centered differences (one-sided at the ends)
  auto slope_at = [&](Eigen::Index j) {
    if (j == 0) return (w[1] - w[0]) / (theta_grid[1] - theta_grid[0]);
    if (j == M - 1)
      return (w[M - 1] - w[M - 2]) / (theta_grid[M - 1] - theta_grid[M - 2]);
    const double hm = theta_grid[j] - theta_grid[j - 1];
    const double hp = theta_grid[j + 1] - theta_grid[j];
    return (w[j + 1] * hm * hm - w[j - 1] * hp * hp +
            w[j] * (hp * hp - hm * hm)) /
           (hm * hp * (hm + hp));
  };
  const double m0 = slope_at(k), m1 = slope_at(k + 1);
  const double u = (theta - t0) / hgap;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  return h00 * w[k] + h10 * hgap * m0 + h01 * w[k + 1] + h11 * hgap * m1;
}

double evaluate_halfspace_vss(const ProfileSolution& sol,
                              const Eigen::Vector2d& x,
                              const Eigen::Vector2d& y,
                              const Eigen::Vector2d& inward) {
  const Eigen::Vector2d d = x - y;
  const double r = d.norm();
  if (r == 0.0) throw InvalidParameter("evaluation point coincides with the singularity");
  const double ct = std::clamp(d.dot(inward) / r, -1.0, 1.0);
  if (ct <= 0.0) return 0.0;  // boundary ray and beyond
  const double theta = std::acos(ct);
  return std::pow(r, -sol.alpha) * sol.interpolate(theta);
}

}  // namespace selliptic
