#include "selliptic/fd/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "selliptic/errors.hpp"

namespace selliptic::fd {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

LaplaceOperator::LaplaceOperator(std::shared_ptr<const Grid> grid)
    : grid_(std::move(grid)) {
  const Grid& g = *grid_;
  const int n = g.n();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * n);
  for (int p = 0; p < n; ++p) {
    const auto& a = g.arms(p);
    double diag = 0.0;
    for (int pair = 0; pair < 2; ++pair) {
      const Arm& plus = a[2 * pair];
      const Arm& minus = a[2 * pair + 1];
      const double dp = plus.len, dm = minus.len;
      diag += 2.0 / (dp * dm);
      auto attach = [&](const Arm& arm, double other) {
        const double coeff = 2.0 / (arm.len * (arm.len + other));
        if (arm.nbr >= 0) {
          trip.emplace_back(p, arm.nbr, -coeff);
        } else {
          contacts_.push_back({p, coeff, arm});
        }
      };
      attach(plus, dm);
      attach(minus, dp);
    }
    trip.emplace_back(p, p, diag);
  }
  A_.resize(n, n);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();
}

Eigen::VectorXd LaplaceOperator::boundary_rhs(const BoundaryData& data) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(grid_->n());
  for (const auto& c : contacts_) b[c.row] += c.coeff * data.at(c.arm);
  return b;
}

double disc_poisson_kernel(const Eigen::Vector2d& x, double angle) {
  const Eigen::Vector2d y(std::cos(angle), std::sin(angle));
  const double d2 = (x - y).squaredNorm();
  return (1.0 - x.squaredNorm()) / (2.0 * kPi * d2);
}

double halfplane_poisson_kernel(const Eigen::Vector2d& x, double t) {
  const double dx = x[0] - t;
  return x[1] / (kPi * (dx * dx + x[1] * x[1]));
}

namespace {

// Direct factorization behind a common interface: Cholesky when the stencil
// is the uniform symmetric 5-point one, LU for cut-arm grids.
class DirectSolver {
 public:
  explicit DirectSolver(bool spd) : spd_(spd) {}
  void factorize(const Eigen::SparseMatrix<double>& A) {
    if (spd_) {
      if (!analyzed_) {
        ldlt_.analyzePattern(A);
        analyzed_ = true;
      }
      ldlt_.factorize(A);
      if (ldlt_.info() != Eigen::Success)
        throw SolverError("Cholesky factorization failed");
    } else {
      if (!analyzed_) {
        lu_.analyzePattern(A);
        analyzed_ = true;
      }
      lu_.factorize(A);
      if (lu_.info() != Eigen::Success)
        throw SolverError("LU factorization failed");
    }
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    return spd_ ? ldlt_.solve(b).eval() : lu_.solve(b).eval();
  }

 private:
  bool spd_;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

// largest argument with h(t) representable comfortably below overflow
double forcing_cap(const NonlinearitySpec& spec) {
  const double big = 1e250;
  if (std::isfinite(spec.h(big))) return big;
  double lo = 1.0, hi = big;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
    const double mid = std::sqrt(lo * hi);
    (std::isfinite(spec.h(mid)) && spec.h(mid) <= 1e250 ? lo : hi) = mid;
  }
  return lo;
}

struct ForcingEval {
  const NonlinearitySpec* spec = nullptr;
  double alpha = 0.0;
  Eigen::ArrayXd w1;  // rho^alpha
  Eigen::ArrayXd w2;  // rho^{-2-alpha}
  double cap = 0.0;
  mutable bool clamped = false;

  void init(const Grid& g, const NonlinearitySpec& s, double a) {
    spec = &s;
    alpha = a;
    cap = forcing_cap(s);
    const int n = g.n();
    w1.resize(n);
    w2.resize(n);
    for (int p = 0; p < n; ++p) {
      w1[p] = std::pow(g.rho(p), a);
      w2[p] = std::pow(g.rho(p), -2.0 - a);
    }
  }
  double value(int p, double u) const {
    const double t = w1[p] * u;
    if (std::abs(t) > cap) {
      clamped = true;
      const double s = t > 0.0 ? 1.0 : -1.0;
      return w2[p] * s *
             (spec->h(cap) + spec->h_prime(cap) * (std::abs(t) - cap));
    }
    return w2[p] * spec->h(t);
  }
  double slope(int p, double u) const {
    const double t = w1[p] * u;
    const double tc = std::min(std::abs(t), cap);
    return spec->h_prime(tc) / (g_rho2(p));
  }
  double g_rho2(int p) const { return 1.0 / (w1[p] * w2[p]); }  // rho^2
};

struct NewtonOutcome {
  Eigen::VectorXd u;
  int newton = 0;
  int fallback = 0;
  double residual = 0.0;
  bool clamped = false;
  std::string path;
};

NewtonOutcome newton_core(const LaplaceOperator& op, const Eigen::VectorXd& b,
                          const NonlinearitySpec* spec, double alpha,
                          const SolverConfig& cfg,
                          const Eigen::VectorXd& start) {
  const Grid& g = op.grid();
  const int n = g.n();
  DirectSolver lin(g.uniform());

  NewtonOutcome out;
  if (!spec) {
    lin.factorize(op.matrix());
    out.u = lin.solve(b);
    out.path = "linear";
    out.residual = (op.matrix() * out.u - b).cwiseAbs().maxCoeff();
    return out;
  }

  ForcingEval F;
  F.init(g, *spec, alpha);

  Eigen::VectorXd u = start;
  auto H_of = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd H(n);
    for (int p = 0; p < n; ++p) H[p] = F.value(p, v[p]);
    return H;
  };
  auto residual_of = [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(op.matrix() * v - b + H_of(v));
  };

  Eigen::VectorXd r = residual_of(u);
  double rn = r.cwiseAbs().maxCoeff();
  // rounding floor of the stencil rows
  auto floor_of = [&](const Eigen::VectorXd& v) {
    const double row_scale =
        (op.matrix().diagonal().array() * v.array().abs()).maxCoeff() +
        b.cwiseAbs().maxCoeff();
    return 100.0 * 1e-16 * row_scale;
  };

  Eigen::SparseMatrix<double> J = op.matrix();
  int total = 0;
  bool used_fallback = false;
  while (rn > cfg.tol && rn > floor_of(u)) {
    if (++total > cfg.max_newton) {
      throw SolverError("semilinear Newton stagnated at residual " +
                        std::to_string(rn));
    }
    // Jacobian: refresh the diagonal only
    J = op.matrix();
    for (int p = 0; p < n; ++p) J.coeffRef(p, p) += F.slope(p, u[p]);
    lin.factorize(J);
    const Eigen::VectorXd delta = lin.solve(-r);

    double lambda = 1.0;
    bool improved = false;
    for (int half = 0; half < 5; ++half, lambda *= cfg.damping) {
      const Eigen::VectorXd trial = u + lambda * delta;
      const Eigen::VectorXd rt = residual_of(trial);
      const double tn = rt.cwiseAbs().maxCoeff();
      if (tn < rn) {
        u = trial;
        r = rt;
        rn = tn;
        improved = true;
        break;
      }
    }
    if (!improved) {
      if (!cfg.fallback)
        throw SolverError("Newton damping failed and fallback is disabled");
      used_fallback = true;
      double L = 1e-12;
      for (int p = 0; p < n; ++p) L = std::max(L, F.slope(p, u[p]));
      Eigen::SparseMatrix<double> M = op.matrix();
      for (int p = 0; p < n; ++p) M.coeffRef(p, p) += L;
      DirectSolver mlin(g.uniform());
      mlin.factorize(M);
      for (int m = 0; m < 50; ++m) {
        Eigen::VectorXd rhs = b + L * u - H_of(u);
        Eigen::VectorXd next = mlin.solve(rhs);
        const double change = (next - u).cwiseAbs().maxCoeff();
        u = next;
        ++out.fallback;
        if (change < 0.01 * cfg.tol) break;
      }
      r = residual_of(u);
      rn = r.cwiseAbs().maxCoeff();
    }
  }
  out.u = u;
  out.newton = total;
  out.residual = rn;
  out.clamped = F.clamped;
  out.path = used_fallback ? "newton+fallback" : "newton";
  return out;
}

BoundaryData data_from_measure(const Grid& g, const BoundaryMeasure& measure,
                               const SolverConfig& cfg, double alpha) {
  BoundaryData data;
  const DomainSpec dom = g.domain();
  BoundaryMeasure m = measure;
  data.physical = [m, dom](double param) { return m.value(param, dom); };
  switch (cfg.artificial) {
    case ArtificialSideData::Zero:
      data.artificial = [](double, double) { return 0.0; };
      break;
    case ArtificialSideData::KOBound: {
      const double C = cfg.ko_constant;
      data.artificial = [C, alpha, dom](double x, double y) {
        const double rho = std::max(dom.rho(x, y), 1e-12);
        return C * std::pow(rho, -alpha);
      };
      break;
    }
    case ArtificialSideData::Profile: {
      if (!cfg.profile)
        throw ConfigError("profile side data requested without a profile");
      const ProfileSolution* sol = cfg.profile;
      const Eigen::Vector2d y0 = cfg.profile_origin;
      data.artificial = [sol, y0](double x, double y) {
        return evaluate_halfspace_vss(*sol, {x, y}, y0, {0.0, 1.0});
      };
      break;
    }
  }
  return data;
}

}  // namespace

Field harmonic_lift(std::shared_ptr<const Grid> grid,
                    const BoundaryMeasure& measure) {
  measure.validate(grid->domain());
  if (measure.has_infinite_arcs())
    throw Unsupported("harmonic lift of an infinite part is undefined");
  const DomainSpec dom = grid->domain();

  BoundaryData data;
  BoundaryMeasure m = measure;
  data.physical = [m, dom](double param) { return m.value(param, dom); };
  if (dom.kind == DomainKind::HalfPlaneBox) {
    // kernel values of the measure on the truncation sides
    data.artificial = [m, dom](double x, double y) {
      Eigen::Vector2d p(x, y);
      double v = 0.0;
      for (const auto& atom : m.atoms)
        v += atom.mass * halfplane_poisson_kernel(p, atom.position);
      if (m.density) {
        v += quad::integrate(
            [&](double t) {
              return m.density(t) * halfplane_poisson_kernel(p, t);
            },
            -dom.L, dom.L, 1e-9);
      }
      return v;
    };
  }

  LaplaceOperator op(grid);
  const Eigen::VectorXd b = op.boundary_rhs(data);
  SolverConfig cfg;
  NewtonOutcome res = newton_core(op, b, nullptr, 0.0, cfg, Eigen::VectorXd());

  Field f;
  f.grid = grid;
  f.values = std::move(res.u);
  f.data = data;
  f.meta.residual = res.residual;
  f.meta.path = res.path;
  return f;
}

Field solve_semilinear(std::shared_ptr<const Grid> grid,
                       const BoundaryMeasure& measure,
                       const NonlinearitySpec& spec, double alpha,
                       const SolverConfig& config) {
  measure.validate(grid->domain());
  BoundaryData data = data_from_measure(*grid, measure, config, alpha);

  LaplaceOperator op(grid);
  const Eigen::VectorXd b = op.boundary_rhs(data);

  // harmonic lift of the same data as the supersolution start
  DirectSolver lin(grid->uniform());
  lin.factorize(op.matrix());
  const Eigen::VectorXd lift = lin.solve(b);

  NewtonOutcome res = newton_core(op, b, &spec, alpha, config, lift);

  Field f;
  f.grid = grid;
  f.values = std::move(res.u);
  f.data = data;
  f.meta.newton_iterations = res.newton;
  f.meta.fallback_iterations = res.fallback;
  f.meta.residual = res.residual;
  f.meta.alpha = alpha;
  f.meta.overflow_clamped = res.clamped;
  f.meta.path = res.path;
  return f;
}

double equation_residual(const Field& field, const NonlinearitySpec* spec,
                         double alpha) {
  LaplaceOperator op(field.grid);
  const Eigen::VectorXd b = op.boundary_rhs(field.data);
  Eigen::VectorXd r = op.matrix() * field.values - b;
  if (spec) {
    ForcingEval F;
    F.init(*field.grid, *spec, alpha);
    for (int p = 0; p < field.grid->n(); ++p)
      r[p] += F.value(p, field.values[p]);
  }
  return r.cwiseAbs().maxCoeff();
}

double sample(const Field& field, double x, double y) {
  const Grid& g = *field.grid;
  const double fx = (x - g.x0()) / g.h();
  const double fy = (y - g.y0()) / g.h();
  const int i = static_cast<int>(std::floor(fx));
  const int j = static_cast<int>(std::floor(fy));
  const double tx = fx - i, ty = fy - j;

  // on the box the lattice frame is the boundary itself, so data values
  // complete the stencil there
  const bool box = g.domain().kind == DomainKind::HalfPlaneBox;
  auto value = [&](int ii, int jj, bool& ok) -> double {
    const int p = g.at(ii, jj);
    if (p >= 0) return field.values[p];
    if (box && ii >= 0 && jj >= 0 && ii < g.nx() && jj < g.ny()) {
      const double px = g.x0() + ii * g.h();
      const double py = g.y0() + jj * g.h();
      if (jj == 0)
        return field.data.physical ? field.data.physical(px) : 0.0;
      if (ii == 0 || ii == g.nx() - 1 || jj == g.ny() - 1)
        return field.data.artificial ? field.data.artificial(px, py) : 0.0;
    }
    ok = false;
    return 0.0;
  };

  // try the full 4x4 Catmull-Rom neighborhood
  bool have16 = true;
  double vals[4][4];
  for (int a = 0; a < 4 && have16; ++a)
    for (int c = 0; c < 4 && have16; ++c)
      vals[a][c] = value(i - 1 + a, j - 1 + c, have16);
  auto cr_weights = [](double t, double w[4]) {
    w[0] = 0.5 * (-t * t * t + 2 * t * t - t);
    w[1] = 0.5 * (3 * t * t * t - 5 * t * t + 2);
    w[2] = 0.5 * (-3 * t * t * t + 4 * t * t + t);
    w[3] = 0.5 * (t * t * t - t * t);
  };
  if (have16) {
    double wx[4], wy[4];
    cr_weights(tx, wx);
    cr_weights(ty, wy);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 4; ++c) acc += wx[a] * wy[c] * vals[a][c];
    return acc;
  }

  bool have4 = true;
  const double v00 = value(i, j, have4), v10 = value(i + 1, j, have4);
  const double v01 = value(i, j + 1, have4), v11 = value(i + 1, j + 1, have4);
  if (!have4)
    throw ResolutionError("sample point too close to the boundary");
  return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 +
         (1 - tx) * ty * v01 + tx * ty * v11;
}

MollificationStudy solve_ukdelta(std::shared_ptr<const Grid> grid,
                                 double y_param, double k,
                                 const NonlinearitySpec& spec, double alpha,
                                 const SolverConfig& config, double eps0,
                                 int refinements) {
  MollificationStudy study;
  if (k == 0.0) {
    study.extrapolated = solve_semilinear(
        grid, atom_measure(y_param, 0.0, eps0), spec, alpha, config);
    study.cauchy = true;
    return study;
  }
  for (int i = 0; i <= refinements; ++i) {
    const double eps = eps0 / std::pow(2.0, i);
    if (eps < 2.0 * grid->h())
      throw ResolutionError("mollification width below two cells");
    study.widths.push_back(eps);
    study.fields.push_back(solve_semilinear(
        grid, atom_measure(y_param, k, eps), spec, alpha, config));
    if (i > 0) {
      const double gap = (study.fields[i].values - study.fields[i - 1].values)
                             .cwiseAbs()
                             .maxCoeff();
      study.gaps.push_back(gap);
    }
  }
  study.cauchy = true;
  for (std::size_t i = 1; i < study.gaps.size(); ++i)
    if (study.gaps[i] > 0.75 * study.gaps[i - 1]) study.cauchy = false;

  // Richardson extrapolation from the two finest widths using the observed
  // contraction order
  const auto& u1 = study.fields[study.fields.size() - 2].values;
  const auto& u2 = study.fields[study.fields.size() - 1].values;
  double theta = 0.5;
  if (study.gaps.size() >= 2 && study.gaps.back() > 0.0)
    theta = study.gaps.back() / study.gaps[study.gaps.size() - 2];
  theta = std::clamp(theta, 0.05, 0.9);
  study.extrapolated = study.fields.back();
  study.extrapolated.values = u2 + (u2 - u1) * (theta / (1.0 - theta));
  return study;
}

namespace {

SaturationSweep sweep_measures(std::shared_ptr<const Grid> grid,
                               const std::vector<double>& levels,
                               const std::function<BoundaryMeasure(double)>& mk,
                               const NonlinearitySpec& spec, double alpha,
                               const SolverConfig& config,
                               double saturation_tol) {
  if (levels.empty()) throw ConfigError("empty level schedule");
  SaturationSweep sweep;
  Eigen::VectorXd prev;
  for (double level : levels) {
    Field f = solve_semilinear(grid, mk(level), spec, alpha, config);
    sweep.levels.push_back(level);
    sweep.fields.push_back(f);
    if (prev.size() > 0) {
      const double change = (f.values - prev).cwiseAbs().maxCoeff() /
                            std::max(f.values.cwiseAbs().maxCoeff(), 1e-300);
      sweep.changes.push_back(change);
      if (change < saturation_tol) {
        sweep.saturated = true;
        sweep.saturation_level = level;
        sweep.field = std::move(f);
        return sweep;
      }
    }
    prev = f.values;
    sweep.field = std::move(f);
  }
  return sweep;
}

}  // namespace

SaturationSweep compute_uinfty(std::shared_ptr<const Grid> grid, double y_param,
                               const NonlinearitySpec& spec, double alpha,
                               const std::vector<double>& k_schedule,
                               const SolverConfig& config, double atom_eps,
                               double saturation_tol) {
  return sweep_measures(
      grid, k_schedule,
      [&](double k) { return atom_measure(y_param, k, atom_eps); }, spec,
      alpha, config, saturation_tol);
}

SaturationSweep solve_UF(std::shared_ptr<const Grid> grid,
                         const std::vector<BoundaryArc>& arcs,
                         const NonlinearitySpec& spec, double alpha,
                         const std::vector<double>& n_schedule,
                         const SolverConfig& config, double saturation_tol) {
  return sweep_measures(
      grid, n_schedule,
      [&](double n) {
        BoundaryMeasure m;
        m.infinite_arcs = arcs;
        m.arc_level = n;
        return m;
      },
      spec, alpha, config, saturation_tol);
}

SaturationSweep solve_UF_dense_atoms(std::shared_ptr<const Grid> grid,
                                     const std::vector<BoundaryArc>& arcs,
                                     const NonlinearitySpec& spec, double alpha,
                                     const std::vector<int>& k_schedule,
                                     const SolverConfig& config,
                                     double atom_eps, double saturation_tol) {
  // low-discrepancy placement inside the arcs (bit-reversed van der Corput)
  auto corput = [](int idx) {
    double v = 0.0, base = 0.5;
    for (int m = idx; m > 0; m >>= 1, base *= 0.5)
      if (m & 1) v += base;
    return v;
  };
  double total = 0.0;
  for (const auto& arc : arcs) total += arc.b - arc.a;

  std::vector<double> levels(k_schedule.begin(), k_schedule.end());
  return sweep_measures(
      grid, levels,
      [&](double kd) {
        const int k = static_cast<int>(kd);
        BoundaryMeasure m;
        m.mollification_eps = atom_eps;
        for (int i = 1; i <= k; ++i) {
          double t = corput(i) * total;
          for (const auto& arc : arcs) {
            const double len = arc.b - arc.a;
            if (t <= len) {
              m.atoms.push_back({arc.a + t, kd});
              break;
            }
            t -= len;
          }
        }
        return m;
      },
      spec, alpha, config, saturation_tol);
}

SaturationSweep solve_barrier(const DomainSpec& domain, int resolution,
                              double z_param, double r,
                              const std::vector<double>& M_schedule,
                              const NonlinearitySpec& spec, double alpha,
                              const SolverConfig& config,
                              double saturation_tol) {
  if (M_schedule.empty()) throw ConfigError("empty barrier cap schedule");
  auto grid = Grid::build_ball(domain, resolution, z_param, r);
  const Eigen::Vector2d z = domain.boundary_point(z_param);

  // half-radius shell monitor
  std::vector<int> shell;
  for (int p = 0; p < grid->n(); ++p) {
    const double d = (Eigen::Vector2d(grid->x(p), grid->y(p)) - z).norm();
    if (std::abs(d - 0.5 * r) <= 0.1 * r) shell.push_back(p);
  }
  if (shell.size() < 4)
    throw ResolutionError("half-radius shell is under-resolved");

  LaplaceOperator op(grid);
  SaturationSweep sweep;
  double prev_probe = -1.0;
  for (double M : M_schedule) {
    BoundaryData data;
    data.physical = [](double) { return 0.0; };
    data.artificial = [](double, double) { return 0.0; };
    data.sphere_value = M;
    const Eigen::VectorXd b = op.boundary_rhs(data);
    DirectSolver lin(grid->uniform());
    lin.factorize(op.matrix());
    const Eigen::VectorXd lift = lin.solve(b);
    NewtonOutcome res = newton_core(op, b, &spec, alpha, config, lift);

    double probe = 0.0;
    for (int p : shell) probe += res.u[p];
    probe /= static_cast<double>(shell.size());

    sweep.levels.push_back(M);
    sweep.probe_values.push_back(probe);
    Field f;
    f.grid = grid;
    f.values = std::move(res.u);
    f.data = data;
    f.meta.residual = res.residual;
    f.meta.alpha = alpha;
    f.meta.path = res.path;
    sweep.fields.push_back(f);
    if (prev_probe >= 0.0) {
      const double change =
          std::abs(probe - prev_probe) / std::max(probe, 1e-300);
      sweep.changes.push_back(change);
      if (change < saturation_tol) {
        sweep.saturated = true;
        sweep.saturation_level = M;
        sweep.field = std::move(f);
        return sweep;
      }
    }
    prev_probe = probe;
    sweep.field = std::move(f);
  }
  return sweep;
}

}  // namespace selliptic::fd
