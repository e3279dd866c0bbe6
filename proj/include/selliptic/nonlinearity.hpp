#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

#include "selliptic/report.hpp"

namespace selliptic {

enum class NonlinearityKind { PowerQ, PowerLogQ, ExpLinear, Custom };

/// An odd, convex absorption nonlinearity. Evaluators are supplied for
/// t >= 0 only and reflected, so oddness holds by construction.
class NonlinearitySpec {
 public:
  using Evaluator = std::function<double(double)>;

  NonlinearitySpec() = default;
  NonlinearitySpec(std::string name, NonlinearityKind kind, double q,
                   Evaluator h_pos, Evaluator h_prime_pos,
                   bool strict_convexity)
      : name_(std::move(name)),
        kind_(kind),
        q_(q),
        h_pos_(std::move(h_pos)),
        h_prime_pos_(std::move(h_prime_pos)),
        strict_convexity_(strict_convexity) {}

  double h(double t) const {
    if (t == 0.0) return 0.0;
    return t > 0.0 ? h_pos_(t) : -h_pos_(-t);
  }
  double h_prime(double t) const { return h_prime_pos_(std::abs(t)); }

  const std::string& name() const { return name_; }
  NonlinearityKind kind() const { return kind_; }
  double q() const { return q_; }
  bool strict_convexity() const { return strict_convexity_; }
  bool is_builtin() const { return kind_ != NonlinearityKind::Custom; }

 private:
  std::string name_ = "unset";
  NonlinearityKind kind_ = NonlinearityKind::Custom;
  double q_ = 0.0;
  Evaluator h_pos_;
  Evaluator h_prime_pos_;
  bool strict_convexity_ = false;
};

struct ProblemParams {
  int N = 2;          // spatial dimension
  double alpha = 2.0; // similarity exponent
  double c = 1.0;     // test amplitude for integral conditions

  void validate() const;
};

NonlinearitySpec make_power(double q);
NonlinearitySpec make_power_log(double q);
NonlinearitySpec make_exp_linear();
NonlinearitySpec make_custom(std::string name, NonlinearitySpec::Evaluator h_pos,
                             NonlinearitySpec::Evaluator h_prime_pos,
                             bool strict_convexity = true);

/// Resolve a string id of the form "power:q=3", "powerlog:q=2", "explinear".
NonlinearitySpec make_builtin_from_id(const std::string& id);

/// Closed-form growth facts for builtins.
/// Antiderivative of h on [0, t]; falls back to quadrature for PowerLogQ.
double primitive_closed_form(const NonlinearitySpec& spec, double t);
/// Whether integral_0 h(u)/u^2 du converges (the zero-side integrability that
/// every admissible absorption term must satisfy).
bool builtin_zero_side_integrable(const NonlinearitySpec& spec);
/// Local growth exponent of h at 0 (h ~ t^sigma0).
double builtin_growth_exponent_at_zero(const NonlinearitySpec& spec);

Eigen::ArrayXd default_structural_grid();

struct Delta2Config {
  double T0 = 8.0;        // initial search box (0, T]^2
  int doublings = 4;      // T-doublings examined
  int grid = 96;          // log grid points per axis
  double stabil_tol = 1e-4;
};

ConditionReport check_structural(
    const NonlinearitySpec& spec,
    const Eigen::ArrayXd& sample_grid = default_structural_grid());
ConditionReport check_KO(const NonlinearitySpec& spec, double a);
ConditionReport check_delta2(const NonlinearitySpec& spec,
                             const Delta2Config& cfg = {});
ConditionReport estimate_hzero_epsilon(const NonlinearitySpec& spec);
/// Verdict on the boundary-singular integral
///   integral_0^1 t^{N-alpha-2} h(c t^{alpha-N+1}) dt,
/// resolved in closed form for builtins, by quadrature otherwise. Evidence
/// carries the geometric classifier, the zero-side condition, and a
/// consistency flag.
ConditionReport check_subcritical(const NonlinearitySpec& spec,
                                  const ProblemParams& params);
/// The classifier alone: alpha > N-1 combined with the zero-side
/// integrability of h (the admissibility assumption); Fails exactly on the
/// boundary alpha = N-1.
ConditionReport check_subcritical_classifier(const NonlinearitySpec& spec,
                                             const ProblemParams& params);
ConditionReport check_local_integrability(const NonlinearitySpec& spec,
                                          const ProblemParams& params,
                                          double R);

}  // namespace selliptic
