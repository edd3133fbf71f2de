#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "field.hpp"

namespace elastoray {

namespace shape {
struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // unit; points to side+
};
struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;  // side+ is the exterior
};
struct LevelSet {
  AnalyticField field;
  double iso = 0.0;  // side+ is {field > iso}
};
}  // namespace shape

/// Smooth closed (or planar) hypersurface. The implicit function is positive
/// on side+ and the normal points from side- to side+.
struct Interface {
  std::variant<shape::Plane, shape::Sphere, shape::LevelSet> shape;
  std::string name;

  double implicit(const Vec3& x) const {
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, shape::Plane>) return (x - s.point).dot(s.normal);
          else if constexpr (std::is_same_v<T, shape::Sphere>) return (x - s.center).norm() - s.radius;
          else return s.field.value(x) - s.iso;
        },
        shape);
  }

  Vec3 implicit_gradient(const Vec3& x) const {
    return std::visit(
        [&](const auto& s) -> Vec3 {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, shape::Plane>) return s.normal;
          else if constexpr (std::is_same_v<T, shape::Sphere>) {
            const Vec3 d = x - s.center;
            const double r = d.norm();
            return r > 0.0 ? Vec3(d / r) : Vec3(Vec3::UnitZ());
          } else return s.field.gradient(x);
        },
        shape);
  }

  /// Unit normal nu (side- to side+). Throws if the implicit gradient vanishes.
  Vec3 normal(const Vec3& x) const {
    const Vec3 g = implicit_gradient(x);
    const double n = g.norm();
    if (!(n > 1e-12)) throw Error(ErrorKind::NonPhysical, "degenerate interface gradient at " + fmt_vec(x));
    return g / n;
  }

  double scale() const {
    if (auto* s = std::get_if<shape::Sphere>(&shape)) return s->radius;
    return 1.0;
  }

  /// Approximate signed distance (implicit value over gradient norm).
  double signed_distance(const Vec3& x) const {
    const double g = implicit_gradient(x).norm();
    return g > 0.0 ? implicit(x) / g : implicit(x);
  }

  bool on_interface(const Vec3& x, double tol = 1e-9) const {
    return std::abs(signed_distance(x)) < tol * scale();
  }
};

/// Selects the side of one interface for points lying on it.
struct SideHint {
  int interface = -1;
  int side = +1;
};

struct Region {
  std::string name;
  /// Required side per interface: +1, -1, or 0 (unconstrained).
  std::vector<int> signs;
  AnalyticField lambda, mu, rho;
};

struct Params {
  double lambda = 0.0, mu = 0.0, rho = 0.0;
  double cp() const { return std::sqrt((lambda + 2.0 * mu) / rho); }
  double cs() const { return std::sqrt(mu / rho); }
  double speed(Mode m) const { return m == Mode::P ? cp() : cs(); }
};

struct Speeds {
  double cp = 0.0, cs = 0.0;
  double of(Mode m) const { return m == Mode::P ? cp : cs; }
};

struct Crossing {
  int interface = -1;
  Vec3 point = Vec3::Zero();
  double fraction = 0.0;
};

struct Box {
  Vec3 lo = Vec3::Constant(-1.0);
  Vec3 hi = Vec3::Constant(1.0);
};

struct ValidationIssue {
  std::string what;
  Vec3 at = Vec3::Zero();
};

/// Piecewise-smooth isotropic elastic medium.
class ElasticMedium {
 public:
  std::vector<Region> regions;
  std::vector<Interface> interfaces;
  std::optional<AnalyticField> foliation;
  /// Rays leaving this ball are terminated as domain exits.
  std::optional<std::pair<Vec3, double>> domain;
  Box sample_box;

  static ElasticMedium homogeneous(double lambda, double mu, double rho) {
    ElasticMedium m;
    m.regions.push_back(Region{"bulk", {}, AnalyticField::constant(lambda), AnalyticField::constant(mu),
                               AnalyticField::constant(rho)});
    return m;
  }

  int region_index(const Vec3& x, std::optional<SideHint> hint = std::nullopt) const {
    std::vector<int> side(interfaces.size(), 0);
    for (std::size_t i = 0; i < interfaces.size(); ++i) {
      if (hint && hint->interface == static_cast<int>(i)) {
        side[i] = hint->side >= 0 ? 1 : -1;
        continue;
      }
      if (interfaces[i].on_interface(x))
        throw Error(ErrorKind::OnInterfaceWithoutHint,
                    "point " + fmt_vec(x) + " lies on interface " + std::to_string(i));
      side[i] = interfaces[i].implicit(x) > 0.0 ? 1 : -1;
    }
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const auto& sg = regions[r].signs;
      bool ok = true;
      for (std::size_t i = 0; i < sg.size() && i < side.size(); ++i)
        if (sg[i] != 0 && sg[i] != side[i]) ok = false;
      if (ok) return static_cast<int>(r);
    }
    throw Error(ErrorKind::OutsideAllRegions, "no region contains " + fmt_vec(x));
  }

  Params region_params(int region, const Vec3& x) const {
    const auto& r = regions.at(static_cast<std::size_t>(region));
    return Params{r.lambda.value(x), r.mu.value(x), r.rho.value(x)};
  }

  Params eval_params(const Vec3& x, std::optional<SideHint> hint = std::nullopt) const {
    return region_params(region_index(x, hint), x);
  }

  static void check_physical(const Params& p, const Vec3& x) {
    if (!(p.mu > 0.0) || !(3.0 * p.lambda + 2.0 * p.mu > 0.0) || !(p.rho > 0.0))
      throw Error(ErrorKind::NonPhysical,
                  "strong convexity (mu>0 and 3lambda+2mu>0, rho>0) violated at " + fmt_vec(x));
  }

  Speeds region_speeds(int region, const Vec3& x) const {
    const Params p = region_params(region, x);
    check_physical(p, x);
    return Speeds{p.cp(), p.cs()};
  }

  Speeds wave_speeds(const Vec3& x, std::optional<SideHint> hint = std::nullopt) const {
    return region_speeds(region_index(x, hint), x);
  }

  double region_speed(int region, const Vec3& x, Mode m) const { return region_speeds(region, x).of(m); }

  /// Gradient of log c_mode in a fixed region, by the chain rule on the
  /// Lame-parameter and density gradients.
  Vec3 region_grad_log_speed(int region, const Vec3& x, Mode m) const {
    const auto& r = regions.at(static_cast<std::size_t>(region));
    const Jet lam = r.lambda.jet(x), mu = r.mu.jet(x), rho = r.rho.jet(x);
    const double M = m == Mode::P ? lam.value + 2.0 * mu.value : mu.value;
    const Vec3 gM = m == Mode::P ? Vec3(lam.grad + 2.0 * mu.grad) : mu.grad;
    return 0.5 * (gM / M - rho.grad / rho.value);
  }

  Vec3 grad_log_speed(const Vec3& x, Mode m, std::optional<SideHint> hint = std::nullopt) const {
    return region_grad_log_speed(region_index(x, hint), x, m);
  }

  /// Earliest crossing of any interface along the straight segment a -> b.
  std::optional<Crossing> interface_crossing(const Vec3& a, const Vec3& b, int subdivisions = 64) const {
    std::optional<Crossing> best;
    for (std::size_t i = 0; i < interfaces.size(); ++i) {
      const auto& itf = interfaces[i];
      auto f = [&](double u) { return itf.implicit(a + u * (b - a)); };
      double u0 = 0.0, f0 = f(0.0);
      for (int k = 1; k <= subdivisions; ++k) {
        const double u1 = static_cast<double>(k) / subdivisions;
        const double f1 = f(u1);
        if (f0 == 0.0 && k == 1 && f1 != 0.0) {
          // start on the surface: not a crossing
        } else if ((f0 < 0.0 && f1 >= 0.0) || (f0 > 0.0 && f1 <= 0.0)) {
          double lo = u0, hi = u1, flo = f0;
          while (hi - lo > 1e-13) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if ((fm < 0.0) == (flo < 0.0) && fm != 0.0) {
              lo = mid;
              flo = fm;
            } else {
              hi = mid;
            }
          }
          const double u = 0.5 * (lo + hi);
          if (!best || u < best->fraction) best = Crossing{static_cast<int>(i), a + u * (b - a), u};
          break;
        }
        u0 = u1;
        f0 = f1;
      }
    }
    return best;
  }

  double foliation_value(const Vec3& x) const {
    if (!foliation) throw Error(ErrorKind::NoFoliation, "medium has no foliation function");
    return foliation->value(x);
  }

  bool exits_domain(const Vec3& x) const {
    return domain && (x - domain->first).norm() > domain->second;
  }

  /// Randomized admissibility check: strong convexity, speed ordering and
  /// pairwise interface separation at sampled points.
  std::vector<ValidationIssue> validate(int samples_per_region = 10000, std::uint64_t seed = 1) const {
    std::vector<ValidationIssue> issues;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto draw = [&] {
      return Vec3(sample_box.lo.x() + U(rng) * (sample_box.hi.x() - sample_box.lo.x()),
                  sample_box.lo.y() + U(rng) * (sample_box.hi.y() - sample_box.lo.y()),
                  sample_box.lo.z() + U(rng) * (sample_box.hi.z() - sample_box.lo.z()));
    };
    for (std::size_t r = 0; r < regions.size(); ++r) {
      int found = 0;
      for (int tries = 0; tries < samples_per_region * 4 && found < samples_per_region; ++tries) {
        const Vec3 x = draw();
        int idx = -1;
        try {
          idx = region_index(x);
        } catch (const Error&) {
          continue;
        }
        if (idx != static_cast<int>(r)) continue;
        ++found;
        const Params p = region_params(idx, x);
        if (!(p.mu > 0.0) || !(3.0 * p.lambda + 2.0 * p.mu > 0.0)) {
          issues.push_back({"region " + regions[r].name + ": mu>0 and 3lambda+2mu>0 violated", x});
          break;
        }
        if (!(p.rho > 0.0)) {
          issues.push_back({"region " + regions[r].name + ": rho>0 violated", x});
          break;
        }
        if (!(p.cp() > p.cs()) || !(p.cs() > 0.0)) {
          issues.push_back({"region " + regions[r].name + ": c_P > c_S > 0 violated", x});
          break;
        }
      }
    }
    for (std::size_t i = 0; i < interfaces.size(); ++i) {
      for (int k = 0; k < 400; ++k) {
        Vec3 x = draw();
        for (int it = 0; it < 50; ++it) {
          const Vec3 g = interfaces[i].implicit_gradient(x);
          const double gn2 = g.squaredNorm();
          if (gn2 < 1e-24) break;
          x -= interfaces[i].implicit(x) * g / gn2;
        }
        if (!interfaces[i].on_interface(x, 1e-8)) continue;
        for (std::size_t j = 0; j < interfaces.size(); ++j) {
          if (j == i) continue;
          if (std::abs(interfaces[j].signed_distance(x)) < 1e-6 * interfaces[j].scale()) {
            issues.push_back({"interfaces " + std::to_string(i) + " and " + std::to_string(j) + " intersect", x});
            k = 400;
            break;
          }
        }
      }
    }
    return issues;
  }
};

}  // namespace elastoray
