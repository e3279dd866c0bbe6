#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace selliptic::fd {

enum class DomainKind { UnitDisc, HalfPlaneBox };

/// Built-in 2D domains. For the half-plane box the physical boundary is the
/// bottom segment {y = 0, |x| <= L}; the other three sides are artificial
/// truncations of the half-plane. The distance function refers to the
/// physical boundary only.
struct DomainSpec {
  DomainKind kind = DomainKind::UnitDisc;
  double L = 1.0;

  double scale() const { return kind == DomainKind::UnitDisc ? 1.0 : L; }
  double rho(double x, double y) const {
    return kind == DomainKind::UnitDisc ? 1.0 - std::hypot(x, y) : y;
  }
  /// boundary point from the parameter (angle on the disc, abscissa on the box)
  Eigen::Vector2d boundary_point(double param) const {
    if (kind == DomainKind::UnitDisc)
      return {std::cos(param), std::sin(param)};
    return {param, 0.0};
  }
  /// inward unit normal at a boundary parameter
  Eigen::Vector2d inward_normal(double param) const {
    if (kind == DomainKind::UnitDisc)
      return {-std::cos(param), -std::sin(param)};
    return {0.0, 1.0};
  }
  /// total parameter length of the physical boundary
  double boundary_length() const {
    return kind == DomainKind::UnitDisc ? 2.0 * M_PI : 2.0 * L;
  }

  nlohmann::json to_json() const {
    return {{"kind", kind == DomainKind::UnitDisc ? "unit_disc" : "half_plane_box"},
            {"L", L}};
  }
};

enum class ContactKind : std::uint8_t {
  None = 0,
  Physical,    // the physical boundary (Dirichlet from the measure)
  Artificial,  // box sides/top
  Sphere,      // barrier cap |x - z| = r
};

/// One stencil arm: either a link to another interior unknown or a Dirichlet
/// contact at distance len.
struct Arm {
  double len = 0.0;
  std::int32_t nbr = -1;
  ContactKind contact = ContactKind::None;
  double param = 0.0;  // boundary parameter for Physical contacts
  double cx = 0.0, cy = 0.0;
};

/// Five-point grid with Shortley-Weller cut arms on curved boundaries.
/// Interior unknowns keep rho >= h/4 (closer nodes are folded onto the
/// boundary), so every arm has length at least h/4.
class Grid {
 public:
  static std::shared_ptr<const Grid> build(const DomainSpec& domain,
                                           int resolution);
  /// Subdomain within distance r of the boundary point at z_param, for
  /// barrier construction: contacts are Physical (near boundary piece) or
  /// Sphere (the interior cap).
  static std::shared_ptr<const Grid> build_ball(const DomainSpec& domain,
                                                int resolution, double z_param,
                                                double r);

  const DomainSpec& domain() const { return domain_; }
  double h() const { return h_; }
  int n() const { return static_cast<int>(coords_.size()); }
  double x(int p) const { return coords_[p][0]; }
  double y(int p) const { return coords_[p][1]; }
  double rho(int p) const { return rho_[p]; }
  const std::array<Arm, 4>& arms(int p) const { return arms_[p]; }
  bool uniform() const { return uniform_; }

  // lattice access (for interpolation)
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  int at(int i, int j) const {
    return (i < 0 || j < 0 || i >= nx_ || j >= ny_) ? -1
                                                    : index_[j * nx_ + i];
  }

 private:
  Grid() = default;
  void connect(const DomainSpec& domain, bool ball, Eigen::Vector2d z,
               double r);

  DomainSpec domain_;
  double h_ = 0.0;
  int nx_ = 0, ny_ = 0;
  double x0_ = 0.0, y0_ = 0.0;
  std::vector<std::int32_t> index_;  // lattice -> unknown index or -1
  std::vector<Eigen::Vector2d> coords_;
  std::vector<double> rho_;
  std::vector<std::array<Arm, 4>> arms_;
  bool uniform_ = true;
};

}  // namespace selliptic::fd
