#include "selliptic/ko_envelope.hpp"

#include <cmath>

#include "selliptic/errors.hpp"
#include "selliptic/quadrature.hpp"

namespace selliptic {

KOEnvelope::KOEnvelope(NonlinearitySpec spec, double a_min, double a_max,
                       int table_size)
    : spec_(std::move(spec)), a_min_(a_min), a_max_(a_max) {
  if (!(a_min > 0.0) || !(a_max > a_min))
    throw InvalidParameter("envelope domain must satisfy 0 < a_min < a_max");

  const ConditionReport ko = check_KO(spec_, 1.0);
  if (ko.verdict != Verdict::Holds)
    throw DivergentEnvelope("envelope requested for nonlinearity '" +
                            spec_.name() + "' whose growth integral diverges");

  table_.resize(table_size, 2);
  for (int i = 0; i < table_size; ++i) {
    const double a =
        a_min_ * std::pow(a_max_ / a_min_, i / double(table_size - 1));
    table_(i, 0) = a;
    table_(i, 1) = psi(a);
  }
  // tail fraction at the widest point of the table
  auto integrand = [&](double s) {
    const double f = 2.0 * primitive(s);
    return f > 0.0 ? 1.0 / std::sqrt(f) : 0.0;
  };
  tail_fraction_ = quad::integrate_to_infinity(integrand, a_max_).tail_fraction;

  for (int i = 1; i < table_size; ++i) {
    if (!(table_(i, 1) < table_(i - 1, 1)))
      throw SolverError("envelope table is not strictly decreasing");
  }
}

double KOEnvelope::primitive(double t) const {
  return primitive_closed_form(spec_, t);
}

double KOEnvelope::psi(double a) const {
  if (!(a > 0.0)) throw InvalidParameter("psi requires a > 0");
  auto integrand = [&](double s) {
    const double f = 2.0 * primitive(s);
    return f > 0.0 ? 1.0 / std::sqrt(f) : 0.0;
  };
  quad::ImproperResult res = quad::integrate_to_infinity(integrand, a);
  if (res.verdict != quad::ImproperVerdict::Converges)
    throw DivergentEnvelope("psi integral did not converge at a=" +
                            std::to_string(a));
  return res.value;
}

double KOEnvelope::phi(double s) const {
  const double psi_hi = table_(0, 1);                 // psi(a_min), largest
  const double psi_lo = table_(table_.rows() - 1, 1); // psi(a_max), smallest
  if (!(s > 0.0) || s > psi_hi || s < psi_lo)
    throw RangeError("phi argument " + std::to_string(s) +
                     " outside the envelope range [" + std::to_string(psi_lo) +
                     ", " + std::to_string(psi_hi) + "]");

  // bracket on the monotone table, then bisect in log a on live psi
  Eigen::Index i = 0;
  while (i + 1 < table_.rows() && table_(i + 1, 1) > s) ++i;
  if (table_(i, 1) <= s) return table_(i, 0);  // root at a table node
  if (i + 1 >= table_.rows()) return table_(table_.rows() - 1, 0);

  // invariant: psi(exp(lo)) > s >= psi(exp(hi))
  double lo = std::log(table_(i, 0));
  double hi = std::log(table_(i + 1, 0));
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = psi(std::exp(mid)) - s;
    if (fm == 0.0) return std::exp(mid);
    (fm > 0.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double KOEnvelope::scaled_phi(double c1, double c2, double s) const {
  if (!(c1 > 0.0) || !(c2 > 0.0) || !(s > 0.0))
    throw InvalidParameter("scaled_phi requires positive c1, c2, s");
  return phi(std::sqrt(c1 * c2) * s) / c2;
}

GlobalBound global_bound_constant(const KOEnvelope& env, double alpha) {
  if (alpha < 0.0) throw InvalidParameter("alpha must be nonnegative");
  const double arg = (2.0 / 9.0) * std::pow(3.0, -0.5 * alpha);
  try {
    return {std::pow(2.0, alpha) * env.phi(arg), alpha, BoundKind::Interior};
  } catch (const RangeError&) {
    // table too short for this alpha: extend the domain and retry once
    KOEnvelope wider(env.spec(), env.a_min() * 1e-4, env.a_max() * 1e4);
    return {std::pow(2.0, alpha) * wider.phi(arg), alpha, BoundKind::Interior};
  }
}

void write_envelope_csv(const KOEnvelope& env, std::ostream& os) {
  os << "a,psi\n";
  const auto& t = env.table();
  char buf[80];
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", t(i, 0), t(i, 1));
    os << buf;
  }
}

}  // namespace selliptic
