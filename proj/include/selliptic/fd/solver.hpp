#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "selliptic/fd/domain.hpp"
#include "selliptic/fd/measure.hpp"
#include "selliptic/ko_envelope.hpp"
#include "selliptic/nonlinearity.hpp"
#include "selliptic/spherical_profile.hpp"

namespace selliptic::fd {

/// Dirichlet values for the three contact classes.
struct BoundaryData {
  std::function<double(double)> physical;            // parameter -> value
  std::function<double(double, double)> artificial;  // point -> value
  double sphere_value = 0.0;

  double at(const Arm& arm) const {
    switch (arm.contact) {
      case ContactKind::Physical: return physical ? physical(arm.param) : 0.0;
      case ContactKind::Artificial:
        return artificial ? artificial(arm.cx, arm.cy) : 0.0;
      case ContactKind::Sphere: return sphere_value;
      default: return 0.0;
    }
  }
};

/// Discrete solution together with the data it was solved against.
struct Field {
  std::shared_ptr<const Grid> grid;
  Eigen::VectorXd values;
  BoundaryData data;
  struct Meta {
    int newton_iterations = 0;
    int fallback_iterations = 0;
    double residual = 0.0;         // scaled sup-norm
    double alpha = 0.0;
    bool overflow_clamped = false;
    std::string path;              // "newton", "newton+fallback", "linear"
  } meta;

  double interior_sup() const { return values.cwiseAbs().maxCoeff(); }
};

/// Assembled -Laplace_h with Shortley-Weller arms; Dirichlet contacts are
/// kept aside so the same matrix serves any boundary data.
class LaplaceOperator {
 public:
  explicit LaplaceOperator(std::shared_ptr<const Grid> grid);
  const Eigen::SparseMatrix<double>& matrix() const { return A_; }
  Eigen::VectorXd boundary_rhs(const BoundaryData& data) const;
  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }

 private:
  struct Contact {
    int row;
    double coeff;
    Arm arm;
  };
  std::shared_ptr<const Grid> grid_;
  Eigen::SparseMatrix<double> A_;
  std::vector<Contact> contacts_;
};

enum class ArtificialSideData { Zero, KOBound, Profile };

struct SolverConfig {
  double tol = 1e-8;
  int max_newton = 50;
  double damping = 0.5;
  bool fallback = true;
  ArtificialSideData artificial = ArtificialSideData::Zero;
  double ko_constant = 0.0;                  // KOBound: C rho^{-alpha}
  const ProfileSolution* profile = nullptr;  // Profile: r^{-alpha} w(theta)
  Eigen::Vector2d profile_origin{0.0, 0.0};
};

/// 2D disc kernel (1-|x|^2) / (2 pi |x-y|^2) with y on the unit circle.
double disc_poisson_kernel(const Eigen::Vector2d& x, double angle);
/// half-plane kernel y2 / (pi |x - (t,0)|^2)
double halfplane_poisson_kernel(const Eigen::Vector2d& x, double t);

/// Harmonic extension of a finite measure (no infinite arcs). On the box the
/// artificial sides carry the half-plane kernel values of the measure.
Field harmonic_lift(std::shared_ptr<const Grid> grid,
                    const BoundaryMeasure& measure);

/// Damped-Newton solve of -Lap u + rho^{-2-alpha} h(rho^alpha u) = 0 with
/// the measure as physical Dirichlet data, starting from the harmonic lift
/// (a supersolution); monotone fixed-slope fallback on damping failure.
Field solve_semilinear(std::shared_ptr<const Grid> grid,
                       const BoundaryMeasure& measure,
                       const NonlinearitySpec& spec, double alpha,
                       const SolverConfig& config = {});

/// Residual (scaled sup-norm) of a candidate field against given data.
double equation_residual(const Field& field, const NonlinearitySpec* spec,
                         double alpha);

/// Bicubic (Catmull-Rom) sampling of a field at an arbitrary interior point;
/// falls back to bilinear where the 4x4 lattice neighborhood is incomplete.
/// Throws ResolutionError when not even the 2x2 cell is available.
double sample(const Field& field, double x, double y);

struct MollificationStudy {
  std::vector<double> widths;
  std::vector<Field> fields;
  std::vector<double> gaps;  // interior sup-norm of successive differences
  Field extrapolated;
  bool cauchy = false;
};

/// Solve with an atom k delta_y mollified at widths eps0 / 2^i,
/// i = 0..refinements; Richardson-extrapolate and test the Cauchy property.
MollificationStudy solve_ukdelta(std::shared_ptr<const Grid> grid,
                                 double y_param, double k,
                                 const NonlinearitySpec& spec, double alpha,
                                 const SolverConfig& config = {},
                                 double eps0 = 0.1, int refinements = 3);

struct SaturationSweep {
  std::vector<double> levels;
  std::vector<double> changes;  // relative interior change per step
  std::vector<Field> fields;    // one per level actually solved
  Field field;                  // last solve
  bool saturated = false;
  double saturation_level = 0.0;
  std::vector<double> probe_values;  // solver-specific monitor sequence
};

/// Increasing-mass sweep u_{k,y}; saturates when the interior relative
/// change drops below saturation_tol.
SaturationSweep compute_uinfty(std::shared_ptr<const Grid> grid, double y_param,
                               const NonlinearitySpec& spec, double alpha,
                               const std::vector<double>& k_schedule,
                               const SolverConfig& config = {},
                               double atom_eps = 0.05,
                               double saturation_tol = 0.005);

/// Maximal-solution sweep with data n characteristic(F).
SaturationSweep solve_UF(std::shared_ptr<const Grid> grid,
                         const std::vector<BoundaryArc>& arcs,
                         const NonlinearitySpec& spec, double alpha,
                         const std::vector<double>& n_schedule,
                         const SolverConfig& config = {},
                         double saturation_tol = 0.005);

/// Alternative route to the maximal solution: k atoms of mass k placed on a
/// low-discrepancy sequence inside F.
SaturationSweep solve_UF_dense_atoms(std::shared_ptr<const Grid> grid,
                                     const std::vector<BoundaryArc>& arcs,
                                     const NonlinearitySpec& spec, double alpha,
                                     const std::vector<int>& k_schedule,
                                     const SolverConfig& config = {},
                                     double atom_eps = 0.05,
                                     double saturation_tol = 0.005);

/// Barrier construction on the ball subdomain: data 0 on the physical piece,
/// M on the spherical cap, M doubled per schedule. The probe sequence holds
/// the mean value on the half-radius shell.
SaturationSweep solve_barrier(const DomainSpec& domain, int resolution,
                              double z_param, double r,
                              const std::vector<double>& M_schedule,
                              const NonlinearitySpec& spec, double alpha,
                              const SolverConfig& config = {},
                              double saturation_tol = 0.01);

}  // namespace selliptic::fd
