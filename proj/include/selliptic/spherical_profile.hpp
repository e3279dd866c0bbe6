#pragma once

#include <vector>

#include <Eigen/Core>

#include "selliptic/nonlinearity.hpp"

namespace selliptic {

enum class LambdaSource { Derived, Paper };
enum class ProfileMethod { Shooting, MonotoneCollocation };

/// Coefficient of the zero-order term in the reduced half-sphere equation,
/// obtained by applying the radial Laplacian to r^{-alpha}:
///   Lap(r^{-alpha}) = alpha (alpha + 2 - N) r^{-alpha-2}.
double derive_lambda(int N, double alpha);
/// Alternative coefficient alpha - (N-1), selectable for discrepancy
/// experiments; see ProfileProblem::lambda_source.
double paper_lambda(int N, double alpha);

/// Nodes on [0, pi/2], clustered toward pi/2 where the forcing weight
/// degenerates. Returns theta; the matching boundary distances s = pi/2 -
/// theta are computed without cancellation.
void cosine_clustered_grid(int nodes, Eigen::ArrayXd& theta, Eigen::ArrayXd& s);

/// The reduced boundary value problem on the half great circle:
///   w'' + (N-2) cot(theta) w' + lambda w
///       - cos(theta)^{-(2+alpha)} h(cos(theta)^alpha w) = 0,
///   w'(0) = 0,  w(pi/2) = 0.
struct ProfileProblem {
  NonlinearitySpec spec;
  int N = 2;
  double alpha = 2.0;
  double lambda = 4.0;
  LambdaSource lambda_source = LambdaSource::Derived;
  Eigen::ArrayXd theta_grid;
  Eigen::ArrayXd s_grid;  // pi/2 - theta, kept separately for accuracy
  // local model h(t) ~ amp0 t^sigma0 near 0, used when the forcing argument
  // underflows
  double sigma0 = 1.0;
  double amp0 = 1.0;

  /// Forcing term cos(theta)^{-(2+alpha)} h(cos(theta)^alpha w) evaluated
  /// through the boundary-distance variable s.
  double forcing(double s, double w) const;
  double forcing_dw(double s, double w) const;
};

ProfileProblem make_profile_problem(NonlinearitySpec spec, int N, double alpha,
                                    LambdaSource source = LambdaSource::Derived,
                                    int nodes = 2048);

/// Collocation residual of candidate values on the problem grid. The axis
/// node uses the symmetric limit (N-1) w''(0); the boundary node entry is 0
/// by convention (Dirichlet).
Eigen::ArrayXd reduced_residual(const ProfileProblem& problem,
                                const Eigen::ArrayXd& w_values);

struct ProfileSolution {
  Eigen::ArrayXd theta_grid;
  Eigen::ArrayXd w;
  double alpha = 0.0;
  double w_prime0 = 0.0;   // must vanish (axial regularity)
  double kappa = 0.0;      // boundary slope -w'(pi/2)
  double residual_sup = 0.0;
  ProfileMethod method = ProfileMethod::MonotoneCollocation;

  /// cubic interpolation of w at an angle in [0, pi/2]
  double interpolate(double theta) const;
};

struct ProfileSolverConfig {
  double newton_tol = 1e-8;
  int max_newton = 400;
  double shoot_s_lo = 1e-6;
  double shoot_s_hi = 1e6;
  int shoot_steps = 1 << 16;
  double bisect_rel_tol = 1e-13;
  bool verbose = false;
};

/// Solve the reduced problem. Throws NoProfileFound in the degenerate regime
/// (no positive profile; e.g. alpha <= N-1), SolverError on stagnation.
ProfileSolution solve_profile(const ProfileProblem& problem,
                              ProfileMethod method,
                              const ProfileSolverConfig& config = {});

/// Monotone fixed-slope iterates descending from the envelope supersolution;
/// exposed for ordering diagnostics.
std::vector<Eigen::ArrayXd> profile_monotone_iterates(
    const ProfileProblem& problem, int steps);

/// Discrete supersolution B cos(theta)^{-alpha} used to start the monotone
/// schemes (B doubled until the residual sign is verified nodewise).
Eigen::ArrayXd profile_supersolution(const ProfileProblem& problem);

/// Half-space very singular solution r^{-alpha} w(theta) at point x, where
/// the singularity sits at boundary point y with inward normal direction
/// `inward` (unit). Points on or beyond the boundary ray evaluate to 0.
double evaluate_halfspace_vss(const ProfileSolution& sol,
                              const Eigen::Vector2d& x,
                              const Eigen::Vector2d& y,
                              const Eigen::Vector2d& inward);

}  // namespace selliptic
