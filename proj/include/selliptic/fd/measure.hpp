#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "selliptic/errors.hpp"
#include "selliptic/fd/domain.hpp"
#include "selliptic/quadrature.hpp"

namespace selliptic::fd {

struct BoundaryAtom {
  double position = 0.0;  // boundary parameter (angle | abscissa)
  double mass = 0.0;
};

/// Closed parameter interval on the physical boundary carrying the level-n
/// truncation of an infinite part.
struct BoundaryArc {
  double a = 0.0, b = 0.0;
};

/// Boundary data model: finite atoms, an optional bounded density, and
/// "infinite" arcs realized at a finite truncation level. Atoms are smoothed
/// to C^2 bumps of width mollification_eps in boundary arc length.
struct BoundaryMeasure {
  std::vector<BoundaryAtom> atoms;
  std::function<double(double)> density;  // optional
  std::vector<BoundaryArc> infinite_arcs;
  double arc_level = 0.0;
  double mollification_eps = 0.05;

  bool has_infinite_arcs() const { return !infinite_arcs.empty(); }

  void validate(const DomainSpec& domain) const {
    if (!(mollification_eps > 0.0))
      throw InvalidParameter("mollification width must be positive");
    for (const auto& atom : atoms) {
      if (atom.mass < 0.0) throw InvalidParameter("atom masses must be >= 0");
      for (const auto& arc : infinite_arcs) {
        const double d = std::min(std::abs(atom.position - arc.a),
                                  std::abs(atom.position - arc.b));
        const bool inside = atom.position >= arc.a && atom.position <= arc.b;
        if (inside || d < mollification_eps)
          throw InvalidParameter("arcs must stay clear of atom supports");
      }
    }
    if (has_infinite_arcs() && !(arc_level >= 0.0))
      throw InvalidParameter("arc truncation level must be >= 0");
    (void)domain;
  }

  double finite_mass(const DomainSpec& domain) const {
    double m = 0.0;
    for (const auto& atom : atoms) m += atom.mass;
    if (density) {
      const double half = 0.5 * domain.boundary_length();
      m += quad::integrate([&](double t) { return density(t); }, -half, half,
                           1e-10);
    }
    return m;
  }

  /// Mollified Dirichlet value at a boundary parameter.
  double value(double param, const DomainSpec& domain) const {
    double v = 0.0;
    const bool periodic = domain.kind == DomainKind::UnitDisc;
    const double period = domain.boundary_length();
    for (const auto& atom : atoms) {
      double d = param - atom.position;
      if (periodic) {
        d = std::remainder(d, period);
      }
      const double u = std::abs(d) / mollification_eps;
      if (u < 1.0) {
        const double b = 1.0 - u * u;
        v += (35.0 / 32.0) * (atom.mass / mollification_eps) * b * b * b;
      }
    }
    if (density) v += density(param);
    for (const auto& arc : infinite_arcs) {
      double t = param;
      if (periodic) t = std::remainder(t, period);
      if (t >= arc.a && t <= arc.b) v += arc_level;
    }
    return v;
  }
};

inline BoundaryMeasure atom_measure(double position, double mass,
                                    double eps = 0.05) {
  BoundaryMeasure m;
  m.atoms.push_back({position, mass});
  m.mollification_eps = eps;
  return m;
}

inline BoundaryMeasure arc_measure(double a, double b, double level) {
  BoundaryMeasure m;
  m.infinite_arcs.push_back({a, b});
  m.arc_level = level;
  return m;
}

}  // namespace selliptic::fd
