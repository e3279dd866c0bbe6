#include "selliptic/fd/domain.hpp"

#include <cmath>

#include "selliptic/errors.hpp"

namespace selliptic::fd {

namespace {

// First crossing of the unit circle from p along direction d (unit axis
// vector), within distance max_step; negative if none.
double circle_crossing(const Eigen::Vector2d& p, const Eigen::Vector2d& d,
                       double max_step) {
  const double b = p.dot(d);
  const double c = p.squaredNorm() - 1.0;
  const double disc = b * b - c;
  if (disc < 0.0) return -1.0;
  const double t = -b + std::sqrt(disc);  // outward root
  return (t > 0.0 && t <= max_step * (1.0 + 1e-12)) ? t : -1.0;
}

double sphere_crossing(const Eigen::Vector2d& p, const Eigen::Vector2d& d,
                       const Eigen::Vector2d& z, double r, double max_step) {
  const Eigen::Vector2d q = p - z;
  const double b = q.dot(d);
  const double c = q.squaredNorm() - r * r;
  const double disc = b * b - c;
  if (disc < 0.0) return -1.0;
  const double t = -b + std::sqrt(disc);
  return (t > 0.0 && t <= max_step * (1.0 + 1e-12)) ? t : -1.0;
}

}  // namespace

std::shared_ptr<const Grid> Grid::build(const DomainSpec& domain,
                                        int resolution) {
  if (resolution < 32)
    throw ConfigError("grid resolution must be at least 32 cells");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->domain_ = domain;
  if (domain.kind == DomainKind::UnitDisc) {
    g->h_ = 2.0 / resolution;
    g->nx_ = g->ny_ = resolution + 1;
    g->x0_ = g->y0_ = -1.0;
  } else {
    if (!(domain.L > 0.0)) throw ConfigError("box side length must be positive");
    g->h_ = domain.L / resolution;
    g->nx_ = 2 * resolution + 1;
    g->ny_ = resolution + 1;
    g->x0_ = -domain.L;
    g->y0_ = 0.0;
  }
  g->connect(domain, false, {0.0, 0.0}, 0.0);
  return g;
}

std::shared_ptr<const Grid> Grid::build_ball(const DomainSpec& domain,
                                             int resolution, double z_param,
                                             double r) {
  if (resolution < 32)
    throw ConfigError("grid resolution must be at least 32 cells");
  if (!(r > 0.0) || r > 0.5 * domain.scale())
    throw ConfigError("barrier radius must lie in (0, scale/2]");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->domain_ = domain;
  if (domain.kind == DomainKind::UnitDisc) {
    g->h_ = 2.0 / resolution;
    g->nx_ = g->ny_ = resolution + 1;
    g->x0_ = g->y0_ = -1.0;
  } else {
    g->h_ = domain.L / resolution;
    g->nx_ = 2 * resolution + 1;
    g->ny_ = resolution + 1;
    g->x0_ = -domain.L;
    g->y0_ = 0.0;
  }
  g->connect(domain, true, domain.boundary_point(z_param), r);
  if (g->n() < 16) throw ConfigError("barrier subdomain is under-resolved");
  return g;
}

void Grid::connect(const DomainSpec& domain, bool ball, Eigen::Vector2d z,
                   double r) {
  const double h = h_;
  index_.assign(static_cast<std::size_t>(nx_) * ny_, -1);

  auto point = [&](int i, int j) {
    return Eigen::Vector2d(x0_ + i * h, y0_ + j * h);
  };
  auto effective_clearance = [&](const Eigen::Vector2d& p) {
    double d = domain.rho(p[0], p[1]);
    if (domain.kind == DomainKind::HalfPlaneBox) {
      // artificial sides are lattice-aligned; only the physical distance
      // matters for the clamp
    }
    if (ball) d = std::min(d, r - (p - z).norm());
    return d;
  };
  auto is_unknown = [&](int i, int j) {
    if (i <= 0 || j <= 0 || i >= nx_ - 1 || j >= ny_ - 1) {
      // lattice frame: for the disc the frame nodes are all outside anyway;
      // for the box the frame is the boundary itself
      if (domain.kind == DomainKind::HalfPlaneBox) return false;
      if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return false;
    }
    const Eigen::Vector2d p = point(i, j);
    if (domain.kind == DomainKind::UnitDisc && p.norm() >= 1.0) return false;
    return effective_clearance(p) >= 0.25 * h;
  };

  coords_.clear();
  rho_.clear();
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i)
      if (is_unknown(i, j)) {
        index_[j * nx_ + i] = static_cast<std::int32_t>(coords_.size());
        coords_.push_back(point(i, j));
        rho_.push_back(domain.rho(point(i, j)[0], point(i, j)[1]));
      }

  static const std::array<std::array<int, 2>, 4> dirs = {
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

  arms_.assign(coords_.size(), {});
  uniform_ = true;
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const int p = at(i, j);
      if (p < 0) continue;
      const Eigen::Vector2d xp = coords_[p];
      for (int d = 0; d < 4; ++d) {
        Arm& arm = arms_[p][d];
        const int qi = i + dirs[d][0], qj = j + dirs[d][1];
        const int q = at(qi, qj);
        if (q >= 0) {
          arm.len = h;
          arm.nbr = q;
          continue;
        }
        // Dirichlet contact along this arm
        const Eigen::Vector2d dir(dirs[d][0], dirs[d][1]);
        double best = h;
        ContactKind kind = ContactKind::None;
        if (domain.kind == DomainKind::UnitDisc) {
          const double t = circle_crossing(xp, dir, h);
          if (t > 0.0) {
            best = t;
            kind = ContactKind::Physical;
          }
        } else {
          const Eigen::Vector2d q2 = xp + h * dir;
          if (qj == 0) {
            best = h;
            kind = ContactKind::Physical;
          } else if (qi == 0 || qi == nx_ - 1 || qj == ny_ - 1) {
            best = h;
            kind = ContactKind::Artificial;
          }
          (void)q2;
        }
        if (ball) {
          const double t = sphere_crossing(xp, dir, z, r, best);
          if (t > 0.0 && (kind == ContactKind::None || t < best)) {
            best = t;
            kind = ContactKind::Sphere;
          }
        }
        if (kind == ContactKind::None) {
          // neighbor folded onto the boundary by the clamp: contact at its
          // projection, full arm
          const Eigen::Vector2d q2 = xp + h * dir;
          if (ball && r - (q2 - z).norm() < domain.rho(q2[0], q2[1])) {
            kind = ContactKind::Sphere;
            const Eigen::Vector2d u = (q2 - z).normalized();
            const Eigen::Vector2d c = z + r * u;
            arm.len = h;
            arm.cx = c[0];
            arm.cy = c[1];
            arm.contact = kind;
            uniform_ = false;
            continue;
          }
          kind = ContactKind::Physical;
          if (domain.kind == DomainKind::UnitDisc) {
            const Eigen::Vector2d c = q2.normalized();
            arm.len = h;
            arm.param = std::atan2(c[1], c[0]);
            arm.cx = c[0];
            arm.cy = c[1];
          } else {
            arm.len = h;
            arm.param = q2[0];
            arm.cx = q2[0];
            arm.cy = 0.0;
          }
          arm.contact = kind;
          continue;
        }
        arm.len = best;
        arm.contact = kind;
        const Eigen::Vector2d c = xp + best * dir;
        arm.cx = c[0];
        arm.cy = c[1];
        if (kind == ContactKind::Physical) {
          arm.param = domain.kind == DomainKind::UnitDisc
                          ? std::atan2(c[1], c[0])
                          : c[0];
        }
        if (std::abs(best - h) > 1e-12 * h) uniform_ = false;
      }
    }
  }
}

}  // namespace selliptic::fd
