#pragma once

#include <cmath>
#include <memory>
#include <variant>
#include <vector>

#include "core.hpp"

namespace elastoray {

/// Value, gradient and Hessian of a scalar field at a point.
struct Jet {
  double value = 0.0;
  Vec3 grad = Vec3::Zero();
  Mat3 hess = Mat3::Zero();
};

class AnalyticField;

namespace field_family {

struct Constant {
  double c = 0.0;
};

/// c0 + gradient . x
struct Affine {
  double c0 = 0.0;
  Vec3 gradient = Vec3::Zero();
};

/// amplitude * exp(-|x - center|^2 / (2 width^2))
struct GaussianBump {
  Vec3 center = Vec3::Zero();
  double amplitude = 0.0;
  double width = 1.0;
};

/// sum_k coeffs[k] * r^k with r = |x - center|. Odd coefficients make the
/// field non-smooth at the center; the derivatives there are reported as
/// those of the even part.
struct Radial {
  Vec3 center = Vec3::Zero();
  std::vector<double> coeffs;
};

/// sum_k coeffs[k] * z^k with z = direction . (x - origin); direction is unit.
struct Axial {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  std::vector<double> coeffs;
};

/// Compactly supported C-infinity bump: amplitude * exp(1 - 1/(1 - r^2/R^2))
/// for r < R, zero outside. Peak value equals amplitude.
struct CompactBump {
  Vec3 center = Vec3::Zero();
  double amplitude = 0.0;
  double radius = 1.0;
};

struct Sum {
  std::vector<std::shared_ptr<const AnalyticField>> terms;
};

struct Product {
  std::shared_ptr<const AnalyticField> lhs, rhs;
};

struct Exp {
  std::shared_ptr<const AnalyticField> arg;
};

}  // namespace field_family

/// Closed-form scalar field on R^3 with exact first and second derivatives.
class AnalyticField {
 public:
  using Family = std::variant<field_family::Constant, field_family::Affine, field_family::GaussianBump,
                              field_family::Radial, field_family::Axial, field_family::CompactBump,
                              field_family::Sum, field_family::Product, field_family::Exp>;

  AnalyticField() : family_(field_family::Constant{0.0}) {}
  AnalyticField(Family f) : family_(std::move(f)) {}  // NOLINT(google-explicit-constructor)

  static AnalyticField constant(double c) { return AnalyticField(field_family::Constant{c}); }
  static AnalyticField affine(double c0, const Vec3& g) { return AnalyticField(field_family::Affine{c0, g}); }
  static AnalyticField gaussian(const Vec3& center, double amplitude, double width) {
    return AnalyticField(field_family::GaussianBump{center, amplitude, width});
  }
  static AnalyticField radial(const Vec3& center, std::vector<double> coeffs) {
    return AnalyticField(field_family::Radial{center, std::move(coeffs)});
  }
  static AnalyticField axial(const Vec3& origin, const Vec3& direction, std::vector<double> coeffs) {
    return AnalyticField(field_family::Axial{origin, direction.normalized(), std::move(coeffs)});
  }
  static AnalyticField compact_bump(const Vec3& center, double amplitude, double radius) {
    return AnalyticField(field_family::CompactBump{center, amplitude, radius});
  }
  static AnalyticField sum(std::vector<AnalyticField> terms) {
    field_family::Sum s;
    for (auto& t : terms) s.terms.push_back(std::make_shared<const AnalyticField>(std::move(t)));
    return AnalyticField(std::move(s));
  }
  static AnalyticField product(AnalyticField a, AnalyticField b) {
    return AnalyticField(field_family::Product{std::make_shared<const AnalyticField>(std::move(a)),
                                               std::make_shared<const AnalyticField>(std::move(b))});
  }
  static AnalyticField exp(AnalyticField a) {
    return AnalyticField(field_family::Exp{std::make_shared<const AnalyticField>(std::move(a))});
  }

  const Family& family() const { return family_; }

  double value(const Vec3& x) const { return jet(x).value; }
  Vec3 gradient(const Vec3& x) const { return jet(x).grad; }
  Mat3 hessian(const Vec3& x) const { return jet(x).hess; }

  Jet jet(const Vec3& x) const {
    return std::visit([&](const auto& f) { return eval(f, x); }, family_);
  }

  bool is_constant() const { return std::holds_alternative<field_family::Constant>(family_); }

  friend bool operator==(const AnalyticField& a, const AnalyticField& b);

 private:
  static double poly(const std::vector<double>& c, double z, int deriv) {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > static_cast<std::size_t>(deriv);) {
      double fac = 1.0;
      for (int d = 0; d < deriv; ++d) fac *= static_cast<double>(k - d);
      acc = acc * z + c[k] * fac;
    }
    return acc;
  }

  static Jet eval(const field_family::Constant& f, const Vec3&) { return Jet{f.c, Vec3::Zero(), Mat3::Zero()}; }

  static Jet eval(const field_family::Affine& f, const Vec3& x) {
    return Jet{f.c0 + f.gradient.dot(x), f.gradient, Mat3::Zero()};
  }

  static Jet eval(const field_family::GaussianBump& f, const Vec3& x) {
    const Vec3 d = x - f.center;
    const double w2 = f.width * f.width;
    const double v = f.amplitude * std::exp(-d.squaredNorm() / (2.0 * w2));
    return Jet{v, -v * d / w2, v * (d * d.transpose() / (w2 * w2) - Mat3::Identity() / w2)};
  }

  static Jet eval(const field_family::Radial& f, const Vec3& x) {
    const Vec3 d = x - f.center;
    const double r = d.norm();
    Jet j;
    j.value = poly(f.coeffs, r, 0);
    if (r < 1e-300) {
      const double c2 = f.coeffs.size() > 2 ? f.coeffs[2] : 0.0;
      j.hess = 2.0 * c2 * Mat3::Identity();
      return j;
    }
    const Vec3 rh = d / r;
    const double p1 = poly(f.coeffs, r, 1);
    const double p2 = poly(f.coeffs, r, 2);
    const Mat3 rr = rh * rh.transpose();
    j.grad = p1 * rh;
    j.hess = p2 * rr + (p1 / r) * (Mat3::Identity() - rr);
    return j;
  }

  static Jet eval(const field_family::Axial& f, const Vec3& x) {
    const double z = f.direction.dot(x - f.origin);
    return Jet{poly(f.coeffs, z, 0), poly(f.coeffs, z, 1) * f.direction,
               poly(f.coeffs, z, 2) * f.direction * f.direction.transpose()};
  }

  static Jet eval(const field_family::CompactBump& f, const Vec3& x) {
    const Vec3 d = x - f.center;
    const double R2 = f.radius * f.radius;
    const double q = d.squaredNorm() / R2;
    if (q >= 1.0) return Jet{};
    const double s = 1.0 / (1.0 - q);
    const double v = f.amplitude * std::exp(1.0 - s);
    const Vec3 dq = 2.0 * d / R2;
    Jet j;
    j.value = v;
    j.grad = -v * s * s * dq;
    j.hess = v * ((s * s * s * s - 2.0 * s * s * s) * dq * dq.transpose() - (2.0 * s * s / R2) * Mat3::Identity());
    return j;
  }

  static Jet eval(const field_family::Sum& f, const Vec3& x) {
    Jet acc;
    for (const auto& t : f.terms) {
      const Jet j = t->jet(x);
      acc.value += j.value;
      acc.grad += j.grad;
      acc.hess += j.hess;
    }
    return acc;
  }

  static Jet eval(const field_family::Product& f, const Vec3& x) {
    const Jet a = f.lhs->jet(x);
    const Jet b = f.rhs->jet(x);
    return Jet{a.value * b.value, a.grad * b.value + a.value * b.grad,
               a.value * b.hess + b.value * a.hess + a.grad * b.grad.transpose() + b.grad * a.grad.transpose()};
  }

  static Jet eval(const field_family::Exp& f, const Vec3& x) {
    const Jet a = f.arg->jet(x);
    const double e = std::exp(a.value);
    return Jet{e, e * a.grad, e * (a.hess + a.grad * a.grad.transpose())};
  }

  Family family_;
};

namespace detail {
inline bool same_ptr_field(const std::shared_ptr<const AnalyticField>& a,
                           const std::shared_ptr<const AnalyticField>& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}
}  // namespace detail

inline bool operator==(const AnalyticField& a, const AnalyticField& b) {
  using namespace field_family;
  if (a.family_.index() != b.family_.index()) return false;
  return std::visit(
      [&](const auto& fa) -> bool {
        using T = std::decay_t<decltype(fa)>;
        const auto& fb = std::get<T>(b.family_);
        if constexpr (std::is_same_v<T, Constant>) return fa.c == fb.c;
        else if constexpr (std::is_same_v<T, Affine>) return fa.c0 == fb.c0 && fa.gradient == fb.gradient;
        else if constexpr (std::is_same_v<T, GaussianBump>)
          return fa.center == fb.center && fa.amplitude == fb.amplitude && fa.width == fb.width;
        else if constexpr (std::is_same_v<T, Radial>) return fa.center == fb.center && fa.coeffs == fb.coeffs;
        else if constexpr (std::is_same_v<T, Axial>)
          return fa.origin == fb.origin && fa.direction == fb.direction && fa.coeffs == fb.coeffs;
        else if constexpr (std::is_same_v<T, CompactBump>)
          return fa.center == fb.center && fa.amplitude == fb.amplitude && fa.radius == fb.radius;
        else if constexpr (std::is_same_v<T, Sum>) {
          if (fa.terms.size() != fb.terms.size()) return false;
          for (std::size_t i = 0; i < fa.terms.size(); ++i)
            if (!detail::same_ptr_field(fa.terms[i], fb.terms[i])) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Product>)
          return detail::same_ptr_field(fa.lhs, fb.lhs) && detail::same_ptr_field(fa.rhs, fb.rhs);
        else
          return detail::same_ptr_field(fa.arg, fb.arg);
      },
      a.family_);
}

inline bool operator!=(const AnalyticField& a, const AnalyticField& b) { return !(a == b); }

inline AnalyticField operator+(AnalyticField a, AnalyticField b) {
  return AnalyticField::sum({std::move(a), std::move(b)});
}
inline AnalyticField operator*(AnalyticField a, AnalyticField b) {
  return AnalyticField::product(std::move(a), std::move(b));
}

/// Vector field given by three scalar components.
struct VectorField {
  AnalyticField x, y, z;

  Vec3 value(const Vec3& p) const { return Vec3(x.value(p), y.value(p), z.value(p)); }
  /// Row i holds the gradient of component i: (J)_{ij} = d v_i / d x_j.
  Mat3 jacobian(const Vec3& p) const {
    Mat3 J;
    J.row(0) = x.gradient(p).transpose();
    J.row(1) = y.gradient(p).transpose();
    J.row(2) = z.gradient(p).transpose();
    return J;
  }
};

}  // namespace elastoray
