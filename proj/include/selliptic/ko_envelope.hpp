#pragma once

#include <ostream>

#include <Eigen/Core>
#include <json.hpp>

#include "selliptic/nonlinearity.hpp"

namespace selliptic {

enum class BoundKind { Interior, BoundaryDecay };

/// Explicit constant for a pointwise solution bound: |u| <= C rho^{-alpha}
/// (Interior) or |u| <= C rho dist(x,F)^{-alpha-1} (BoundaryDecay).
struct GlobalBound {
  double C = 0.0;
  double alpha = 0.0;
  BoundKind kind = BoundKind::Interior;

  nlohmann::json to_json() const {
    return {{"C", C},
            {"alpha", alpha},
            {"kind", kind == BoundKind::Interior ? "interior" : "boundary_decay"}};
  }
};

/// Blow-up envelope of a nonlinearity satisfying the growth condition
///   psi(a) = integral_a^inf ds / sqrt(2 H1(s)),   H1(t) = integral_0^t h,
/// together with its inverse phi. psi is evaluated by octave quadrature with
/// power-law tail extrapolation; phi by table bracketing plus bisection, so
/// custom nonlinearities follow the same code path as builtins.
class KOEnvelope {
 public:
  explicit KOEnvelope(NonlinearitySpec spec, double a_min = 1e-6,
                      double a_max = 1e9, int table_size = 256);

  double psi(double a) const;
  double phi(double s) const;
  /// (1/c2) phi(sqrt(c1 c2) s)
  double scaled_phi(double c1, double c2, double s) const;

  double primitive(double t) const;  // H1(t)

  const NonlinearitySpec& spec() const { return spec_; }
  double a_min() const { return a_min_; }
  double a_max() const { return a_max_; }
  /// column 0: a, column 1: psi(a); strictly decreasing in psi
  const Eigen::ArrayX2d& table() const { return table_; }
  /// extrapolated tail mass fraction at the widest evaluation
  double tail_fraction() const { return tail_fraction_; }

 private:
  NonlinearitySpec spec_;
  double a_min_, a_max_;
  Eigen::ArrayX2d table_;
  double tail_fraction_ = 0.0;
};

/// Interior bound constant C = 2^alpha phi((2/9) 3^{-alpha/2}). Extends the
/// envelope domain and retries once if the argument falls off the table.
GlobalBound global_bound_constant(const KOEnvelope& env, double alpha);

void write_envelope_csv(const KOEnvelope& env, std::ostream& os);

}  // namespace selliptic
