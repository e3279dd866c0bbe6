#include "selliptic/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "selliptic/errors.hpp"
#include "selliptic/quadrature.hpp"

namespace selliptic {

void ProblemParams::validate() const {
  if (N < 2) throw InvalidParameter("dimension N must be >= 2");
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be positive");
  if (!(c > 0.0)) throw InvalidParameter("amplitude c must be positive");
}

NonlinearitySpec make_power(double q) {
  if (!(q > 1.0)) throw InvalidParameter("power nonlinearity requires q > 1");
  std::ostringstream name;
  name << "power:q=" << q;
  return NonlinearitySpec(
      name.str(), NonlinearityKind::PowerQ, q,
      [q](double t) { return std::pow(t, q); },
      [q](double t) { return q * std::pow(t, q - 1.0); },
      /*strict_convexity=*/true);
}

NonlinearitySpec make_power_log(double q) {
  if (!(q > 1.0))
    throw InvalidParameter("power-log nonlinearity requires q > 1");
  std::ostringstream name;
  name << "powerlog:q=" << q;
  return NonlinearitySpec(
      name.str(), NonlinearityKind::PowerLogQ, q,
      [q](double t) { return std::pow(t, q) * std::log1p(t); },
      [q](double t) {
        return q * std::pow(t, q - 1.0) * std::log1p(t) +
               std::pow(t, q) / (1.0 + t);
      },
      /*strict_convexity=*/true);
}

NonlinearitySpec make_exp_linear() {
  return NonlinearitySpec(
      "explinear", NonlinearityKind::ExpLinear, 1.0,
      [](double t) { return t * std::exp(t); },
      [](double t) { return (1.0 + t) * std::exp(t); },
      /*strict_convexity=*/true);
}

NonlinearitySpec make_custom(std::string name,
                             NonlinearitySpec::Evaluator h_pos,
                             NonlinearitySpec::Evaluator h_prime_pos,
                             bool strict_convexity) {
  return NonlinearitySpec(std::move(name), NonlinearityKind::Custom, 0.0,
                          std::move(h_pos), std::move(h_prime_pos),
                          strict_convexity);
}

NonlinearitySpec make_builtin_from_id(const std::string& id) {
  if (id == "explinear") return make_exp_linear();
  auto parse_q = [&](const std::string& prefix) {
    const std::string tag = prefix + ":q=";
    if (id.rfind(tag, 0) != 0) return std::numeric_limits<double>::quiet_NaN();
    try {
      return std::stod(id.substr(tag.size()));
    } catch (const std::exception&) {
      throw InvalidParameter("malformed nonlinearity id: " + id);
    }
  };
  if (double q = parse_q("power"); std::isfinite(q)) return make_power(q);
  if (double q = parse_q("powerlog"); std::isfinite(q)) return make_power_log(q);
  throw InvalidParameter("unknown nonlinearity id: " + id);
}

double primitive_closed_form(const NonlinearitySpec& spec, double t) {
  switch (spec.kind()) {
    case NonlinearityKind::PowerQ:
      return std::pow(t, spec.q() + 1.0) / (spec.q() + 1.0);
    case NonlinearityKind::ExpLinear:
      // integral of s e^s = (t-1)e^t + 1
      return (t - 1.0) * std::exp(t) + 1.0;
    case NonlinearityKind::PowerLogQ:
    case NonlinearityKind::Custom:
      return quad::integrate([&](double s) { return spec.h(s); }, 0.0, t);
  }
  return 0.0;
}

bool builtin_zero_side_integrable(const NonlinearitySpec& spec) {
  switch (spec.kind()) {
    case NonlinearityKind::PowerQ:
    case NonlinearityKind::PowerLogQ:
      return true;  // h ~ t^q (q > 1) near zero
    case NonlinearityKind::ExpLinear:
      return false;  // h ~ t near zero, h(u)/u^2 ~ 1/u
    case NonlinearityKind::Custom:
      break;
  }
  throw InvalidParameter("no closed-form metadata for custom nonlinearity");
}

double builtin_growth_exponent_at_zero(const NonlinearitySpec& spec) {
  switch (spec.kind()) {
    case NonlinearityKind::PowerQ:
      return spec.q();
    case NonlinearityKind::PowerLogQ:
      return spec.q() + 1.0;
    case NonlinearityKind::ExpLinear:
      return 1.0;
    case NonlinearityKind::Custom:
      break;
  }
  throw InvalidParameter("no closed-form metadata for custom nonlinearity");
}

Eigen::ArrayXd default_structural_grid() {
  // 128 points, logarithmic over (1e-6, 1e3]
  const int n = 128;
  Eigen::ArrayXd grid(n);
  const double lo = std::log(1e-6), hi = std::log(1e3);
  for (int i = 0; i < n; ++i)
    grid[i] = std::exp(lo + (hi - lo) * i / double(n - 1));
  return grid;
}

namespace {

// Classification of integral_0^1 h(u)/u^2 du for a custom evaluator.
// Saturates h to keep blow-up cases classifiable instead of throwing.
quad::ImproperResult zero_side_numeric(const NonlinearitySpec& spec) {
  auto g = [&](double u) {
    const double v = spec.h(u);
    return std::min(v, 1e300) / (u * u);
  };
  return quad::integrate_to_zero(g, 1.0);
}

double clamp01(bool b) { return b ? 1.0 : 0.0; }

}  // namespace

ConditionReport check_structural(const NonlinearitySpec& spec,
                                 const Eigen::ArrayXd& grid) {
  if (grid.size() < 100)
    throw InvalidParameter("structural sample grid needs >= 100 points");
  ConditionReport rep;
  rep.condition = Condition::Structural;

  if (spec.h(0.0) != 0.0) {
    rep.verdict = Verdict::Fails;
    rep.notes = "h(0) != 0";
    return rep;
  }

  // Overflow of a positive increasing evaluator saturates to +inf; only NaN
  // marks a broken evaluator.
  Eigen::ArrayXd hv(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double v = spec.h(t);
    if (std::isnan(v))
      throw EvaluationError("h returned non-finite value at t=" +
                            std::to_string(t));
    hv[i] = v;
    if (v <= 0.0) {
      rep.verdict = Verdict::Fails;
      rep.notes = "positivity fails at t=" + std::to_string(t);
      rep.evidence["offending_t"] = t;
      return rep;
    }
    const double sum = spec.h(-t) + v;
    if (sum != 0.0 && !(std::isinf(v) && std::isinf(spec.h(-t)))) {
      rep.verdict = Verdict::Fails;
      rep.notes = "oddness violated at t=" + std::to_string(t);
      return rep;
    }
  }

  // Midpoint convexity over all sample pairs.
  double worst_defect = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    for (Eigen::Index j = i + 1; j < grid.size(); ++j) {
      const double a = grid[i], b = grid[j];
      if (std::isinf(hv[i]) || std::isinf(hv[j])) continue;
      const double mid = spec.h(0.5 * (a + b));
      const double chord = 0.5 * (hv[i] + hv[j]);
      const double tol = 1e-10 * (1.0 + std::abs(hv[i]) + std::abs(hv[j]));
      const double defect = mid - chord;
      worst_defect = std::max(worst_defect, defect);
      if (defect > tol) {
        rep.verdict = Verdict::Fails;
        rep.notes = "midpoint convexity fails between t=" + std::to_string(a) +
                    " and t=" + std::to_string(b);
        rep.evidence["worst_convexity_defect"] = worst_defect;
        return rep;
      }
    }
  }
  rep.evidence["worst_convexity_defect"] = worst_defect;

  // Derivative consistency away from zero.
  double worst_mismatch = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t < 1e-3 || std::isinf(hv[i])) continue;
    // Taylor scale of the evaluator can be O(1) (exponential growth), so the
    // step must not grow with t.
    const double step = 6e-6 * std::min(t, 1.0);
    const double fd = (spec.h(t + step) - spec.h(t - step)) / (2.0 * step);
    const double hp = spec.h_prime(t);
    const double mismatch = std::abs(fd - hp) / (std::abs(fd) + 1e-300);
    worst_mismatch = std::max(worst_mismatch, mismatch);
    if (mismatch > 1e-6) {
      rep.verdict = Verdict::Fails;
      rep.notes = "h_prime disagrees with finite difference at t=" +
                  std::to_string(t);
      rep.evidence["worst_derivative_mismatch"] = worst_mismatch;
      return rep;
    }
  }
  rep.evidence["worst_derivative_mismatch"] = worst_mismatch;
  rep.verdict = Verdict::Holds;
  return rep;
}

ConditionReport check_KO(const NonlinearitySpec& spec, double a) {
  if (!(a > 0.0)) throw InvalidParameter("check_KO requires a > 0");
  ConditionReport rep;
  rep.condition = Condition::KO;

  auto integrand = [&](double s) {
    const double f = 2.0 * primitive_closed_form(spec, s);
    return f > 0.0 ? 1.0 / std::sqrt(f) : 0.0;
  };
  quad::ImproperResult num = quad::integrate_to_infinity(integrand, a);

  rep.evidence["decay_exponent"] = num.exponent;
  rep.evidence["fit_residual"] = num.fit_residual;
  for (std::size_t k = 0; k < num.partials.size() && k < 8; ++k)
    rep.evidence["partial_" + std::to_string(k)] = num.partials[k];

  if (spec.is_builtin()) {
    // closed-form decay exponent: h ~ t^q gives p = (q+1)/2; the
    // exponential case decays faster than any power
    switch (spec.kind()) {
      case NonlinearityKind::PowerQ:
      case NonlinearityKind::PowerLogQ:
        rep.evidence["closed_form_exponent"] = 0.5 * (spec.q() + 1.0);
        rep.verdict = spec.q() > 1.0 ? Verdict::Holds : Verdict::Fails;
        break;
      case NonlinearityKind::ExpLinear:
        rep.verdict = Verdict::Holds;
        break;
      default:
        break;
    }
  } else {
    switch (num.verdict) {
      case quad::ImproperVerdict::Converges: rep.verdict = Verdict::Holds; break;
      case quad::ImproperVerdict::Diverges: rep.verdict = Verdict::Fails; break;
      case quad::ImproperVerdict::Inconclusive:
        rep.verdict = Verdict::Inconclusive;
        rep.notes = "decay exponent within the margin band";
        break;
    }
  }
  if (rep.verdict == Verdict::Holds &&
      num.verdict == quad::ImproperVerdict::Converges) {
    rep.evidence["integral"] = num.value;
  }
  return rep;
}

ConditionReport check_delta2(const NonlinearitySpec& spec,
                             const Delta2Config& cfg) {
  ConditionReport rep;
  rep.condition = Condition::Delta2;

  auto ratio = [&](double x, double y) {
    return spec.h(x + y) / (spec.h(x) + spec.h(y));
  };
  auto sup_on_box = [&](double T, int n) {
    const double lo = std::log(T * 1e-8), hi = std::log(T);
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = std::exp(lo + (hi - lo) * i / double(n - 1));
      sup = std::max(sup, ratio(x, x));  // diagonal always included
      for (int j = i + 1; j < n; ++j) {
        const double y = std::exp(lo + (hi - lo) * j / double(n - 1));
        sup = std::max(sup, ratio(x, y));
      }
    }
    return sup;
  };

  std::vector<double> sups, diag_sups;
  for (int l = 0; l < cfg.doublings; ++l) {
    const double T = cfg.T0 * std::pow(2.0, l);
    sups.push_back(sup_on_box(T, cfg.grid));
    diag_sups.push_back(ratio(T, T));
    rep.evidence["sup_level_" + std::to_string(l)] = sups.back();
  }

  // Unbounded growth shows up on the diagonal across domain doublings.
  bool grows = diag_sups.size() >= 4;
  for (std::size_t m = 1; m < diag_sups.size() && grows; ++m)
    if (diag_sups[m] < 2.0 * diag_sups[m - 1]) grows = false;
  if (grows) {
    rep.verdict = Verdict::Fails;
    rep.evidence["diagonal_growth_factor"] =
        diag_sups.back() / diag_sups.front();
    rep.notes = "ratio grows without bound along the diagonal";
    return rep;
  }

  // Stability under T-doubling and grid refinement
  const double c_coarse = sups.back();
  const double c_fine = sup_on_box(cfg.T0 * std::pow(2.0, cfg.doublings - 1),
                                   2 * cfg.grid);
  const double c = std::max(c_coarse, c_fine);
  const double level_drift =
      std::abs(sups.back() - sups[sups.size() - 2]) / (c + 1e-300);
  const double grid_drift = std::abs(c_fine - c_coarse) / (c + 1e-300);
  rep.evidence["c"] = c;
  rep.evidence["level_drift"] = level_drift;
  rep.evidence["grid_drift"] = grid_drift;
  if (level_drift < cfg.stabil_tol && grid_drift < cfg.stabil_tol) {
    rep.verdict = Verdict::Holds;
  } else {
    rep.verdict = Verdict::Inconclusive;
    rep.notes = "supremum did not stabilize under refinement";
  }
  return rep;
}

ConditionReport estimate_hzero_epsilon(const NonlinearitySpec& spec) {
  ConditionReport rep;
  rep.condition = Condition::HZero;

  double window_lo = 1e-8, window_hi = 1e-2;
  double slope = 0.0, residual = 0.0;
  bool fitted = false;
  for (int attempt = 0; attempt < 4 && !fitted; ++attempt) {
    const int n = 48;
    std::vector<double> ts(n), hs(n);
    bool degenerate = false;
    for (int i = 0; i < n; ++i) {
      const double t = window_lo * std::pow(window_hi / window_lo,
                                            i / double(n - 1));
      const double v = spec.h(t);
      if (!(v > 1e-300) || !std::isfinite(v)) {
        degenerate = true;
        break;
      }
      ts[i] = t;
      hs[i] = v;
    }
    if (!degenerate &&
        quad::detail::fit_log_slope(ts, hs, slope, residual)) {
      fitted = true;
      break;
    }
    window_lo *= 100.0;  // underflow near zero: move the window up
    window_hi *= 10.0;
  }
  if (!fitted) {
    rep.verdict = Verdict::Inconclusive;
    rep.notes = "h underflows on every fit window";
    return rep;
  }

  rep.evidence["sigma_fit"] = slope;
  rep.evidence["fit_residual"] = residual;
  rep.evidence["epsilon"] = slope - 1.0;

  if (spec.is_builtin()) {
    const double sigma = builtin_growth_exponent_at_zero(spec);
    rep.evidence["sigma_closed_form"] = sigma;
    rep.verdict = sigma > 1.0 ? Verdict::Holds : Verdict::Fails;
  } else {
    rep.verdict = slope > 1.0 + 1e-3 ? Verdict::Holds : Verdict::Fails;
  }
  return rep;
}

ConditionReport check_subcritical_classifier(const NonlinearitySpec& spec,
                                             const ProblemParams& params) {
  params.validate();
  ConditionReport rep;
  rep.condition = Condition::SubcriticalClassifier;
  const double kappa = params.alpha - (params.N - 1);
  const bool alpha_rule = kappa > 0.0;
  rep.evidence["kappa"] = kappa;
  rep.evidence["alpha_rule"] = clamp01(alpha_rule);

  // Admissibility side condition: integral_0 h(u)/u^2 du < infinity.
  Verdict side = Verdict::Inconclusive;
  if (spec.is_builtin()) {
    side = builtin_zero_side_integrable(spec) ? Verdict::Holds : Verdict::Fails;
  } else {
    switch (zero_side_numeric(spec).verdict) {
      case quad::ImproperVerdict::Converges: side = Verdict::Holds; break;
      case quad::ImproperVerdict::Diverges: side = Verdict::Fails; break;
      default: side = Verdict::Inconclusive; break;
    }
  }
  rep.evidence["zero_side_integrable"] =
      side == Verdict::Holds ? 1.0 : (side == Verdict::Fails ? 0.0 : 0.5);

  if (kappa == 0.0) {
    rep.verdict = Verdict::Fails;
    rep.notes = "boundary case alpha = N-1";
    return rep;
  }
  if (!alpha_rule) {
    rep.verdict = Verdict::Fails;
    return rep;
  }
  rep.verdict = side;
  if (side == Verdict::Fails)
    rep.notes = "alpha rule holds but h fails zero-side integrability";
  return rep;
}

ConditionReport check_subcritical(const NonlinearitySpec& spec,
                                  const ProblemParams& params) {
  params.validate();
  ConditionReport rep;
  rep.condition = Condition::SubcriticalIntegral;
  const double kappa = params.alpha - (params.N - 1);
  rep.evidence["kappa"] = kappa;
  rep.evidence["alpha"] = params.alpha;
  rep.evidence["N"] = params.N;

  Verdict integral = Verdict::Inconclusive;
  double value = std::numeric_limits<double>::quiet_NaN();

  if (spec.is_builtin()) {
    if (kappa == 0.0) {
      integral = Verdict::Fails;  // integrand ~ h(c)/t
    } else if (!builtin_zero_side_integrable(spec)) {
      integral = Verdict::Fails;
    } else {
      integral = kappa > 0.0 ? Verdict::Holds : Verdict::Fails;
    }
    if (integral == Verdict::Holds) {
      if (spec.kind() == NonlinearityKind::PowerQ) {
        // pure power: exponent kappa(q-1) - 1, value c^q / (kappa(q-1))
        value = std::pow(params.c, spec.q()) / (kappa * (spec.q() - 1.0));
        rep.evidence["integral_exponent"] = kappa * (spec.q() - 1.0) - 1.0;
      } else {
        auto g = [&](double t) {
          return std::pow(t, params.N - params.alpha - 2.0) *
                 spec.h(params.c * std::pow(t, kappa));
        };
        value = quad::integrate_to_zero(g, 1.0).value;
      }
    }
  } else {
    auto g = [&](double t) {
      const double arg = params.c * std::pow(t, kappa);
      const double v = spec.h(arg);
      return std::pow(t, params.N - params.alpha - 2.0) * std::min(v, 1e300);
    };
    quad::ImproperResult num = quad::integrate_to_zero(g, 1.0);
    rep.evidence["integral_exponent"] = num.exponent;
    switch (num.verdict) {
      case quad::ImproperVerdict::Converges:
        integral = Verdict::Holds;
        value = num.value;
        break;
      case quad::ImproperVerdict::Diverges: integral = Verdict::Fails; break;
      default: integral = Verdict::Inconclusive; break;
    }
  }

  if (std::isfinite(value)) rep.evidence["integral_value"] = value;
  rep.evidence["integral_converges"] = clamp01(integral == Verdict::Holds);

  const ConditionReport cls = check_subcritical_classifier(spec, params);
  rep.evidence["classifier"] = clamp01(cls.verdict == Verdict::Holds);
  rep.evidence["alpha_rule"] = cls.evidence.at("alpha_rule");
  rep.evidence["zero_side_integrable"] =
      cls.evidence.at("zero_side_integrable");
  rep.evidence["consistent"] =
      clamp01((integral == Verdict::Holds) == (cls.verdict == Verdict::Holds));

  rep.verdict = integral;
  return rep;
}

ConditionReport check_local_integrability(const NonlinearitySpec& spec,
                                          const ProblemParams& params,
                                          double R) {
  params.validate();
  if (!(R > 0.0)) throw InvalidParameter("R must be positive");
  ConditionReport rep;
  rep.condition = Condition::LocalIntegrability;

  auto g = [&](double rho) {
    const double v = spec.h(params.c * std::pow(rho, params.alpha));
    return std::min(v, 1e300) * std::pow(rho, -(1.0 + params.alpha));
  };

  if (spec.is_builtin() && !builtin_zero_side_integrable(spec)) {
    rep.verdict = Verdict::Fails;
    rep.notes = "h(u)/u^2 diverges at zero";
    return rep;
  }
  quad::ImproperResult num = quad::integrate_to_zero(g, R);
  rep.evidence["integral_exponent"] = num.exponent;
  if (spec.is_builtin()) {
    rep.verdict = Verdict::Holds;  // zero-side integrable builtins always pass
    if (num.verdict == quad::ImproperVerdict::Converges)
      rep.evidence["integral_value"] = num.value;
    return rep;
  }
  switch (num.verdict) {
    case quad::ImproperVerdict::Converges:
      rep.verdict = Verdict::Holds;
      rep.evidence["integral_value"] = num.value;
      break;
    case quad::ImproperVerdict::Diverges: rep.verdict = Verdict::Fails; break;
    default:
      rep.verdict = Verdict::Inconclusive;
      rep.notes = "local exponent within the margin band";
      break;
  }
  return rep;
}

}  // namespace selliptic
