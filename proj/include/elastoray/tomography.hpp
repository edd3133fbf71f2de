#pragma once

#include <array>
#include <functional>
#include <random>
#include <vector>

#include "quadrature.hpp"
#include "raytrace.hpp"

namespace elastoray {

/// Symmetric 2-tensor field. The evaluator may use the region index
/// (-1 when unknown) to resolve points lying on interfaces.
class TensorField2 {
 public:
  using Eval = std::function<Mat3(const Vec3&, int)>;

  TensorField2() : eval_([](const Vec3&, int) { return Mat3(Mat3::Zero()); }) {}

  /// Entries in the order xx, xy, xz, yy, yz, zz.
  static TensorField2 from_entries(std::array<AnalyticField, 6> e) {
    return TensorField2([e](const Vec3& x, int) {
      Mat3 A;
      A(0, 0) = e[0].value(x);
      A(0, 1) = A(1, 0) = e[1].value(x);
      A(0, 2) = A(2, 0) = e[2].value(x);
      A(1, 1) = e[3].value(x);
      A(1, 2) = A(2, 1) = e[4].value(x);
      A(2, 2) = e[5].value(x);
      return A;
    });
  }

  /// Wraps an arbitrary evaluator; the result is symmetrized.
  static TensorField2 from_function(Eval f) {
    return TensorField2([f = std::move(f)](const Vec3& x, int r) {
      const Mat3 M = f(x, r);
      return Mat3(0.5 * (M + M.transpose()));
    });
  }

  static TensorField2 scalar_identity(AnalyticField a) {
    return TensorField2([a](const Vec3& x, int) { return Mat3(a.value(x) * Mat3::Identity()); });
  }

  Mat3 value(const Vec3& x, int region = -1) const { return eval_(x, region); }

  friend TensorField2 operator+(const TensorField2& a, const TensorField2& b) {
    return TensorField2([a, b](const Vec3& x, int r) { return Mat3(a.value(x, r) + b.value(x, r)); });
  }
  friend TensorField2 operator*(double s, const TensorField2& a) {
    return TensorField2([s, a](const Vec3& x, int r) { return Mat3(s * a.value(x, r)); });
  }

 private:
  explicit TensorField2(Eval f) : eval_(std::move(f)) {}
  Eval eval_;
};

/// (d_i v_j + d_j v_i) / 2.
inline TensorField2 symmetrized_gradient_tensor(const VectorField& v) {
  return TensorField2::from_function([v](const Vec3& x, int) { return v.jacobian(x); });
}

/// d^s v - (v . grad log c_P) I: the symmetric covariant derivative of the
/// covector v for the metric c_P^{-2} dx^2, so that its transform along a P
/// segment is the difference of v . xi between the endpoints.
inline TensorField2 potential_tensor(const ElasticMedium& medium, const VectorField& v) {
  const ElasticMedium* m = &medium;
  return TensorField2::from_function([m, v](const Vec3& x, int region) {
    const int r = region >= 0 ? region : m->region_index(x);
    const Vec3 g = local_speed(*m, r, x, Mode::P).grad_log;
    const Mat3 J = v.jacobian(x);
    return Mat3(0.5 * (J + J.transpose()) - v.value(x).dot(g) * Mat3::Identity());
  });
}

/// int_gamma N . (A / c_P) N ds over a purely transmitted P ray.
inline double ray_transform_2tensor(const ElasticMedium& medium, const BrokenRay& ray, const TensorField2& A,
                                    double tol = 1e-9) {
  for (const auto& seg : ray.segments)
    if (seg.mode != Mode::P) throw Error(ErrorKind::InvalidArgument, "ray transform needs a P ray");
  for (const auto& ev : ray.events)
    if (ev.kind != BranchKind::Transmit) throw Error(ErrorKind::InvalidArgument, "ray transform needs a transmitted ray");
  const double piece_tol = tol / std::max<std::size_t>(1, ray.segments.size());
  double total = 0.0;
  for (const auto& seg : ray.segments) {
    auto integrand = [&](double s) {
      const PhasePoint p = seg.at(s);
      const Vec3 N = p.xi.normalized();
      const double c = local_speed(medium, seg.region, p.x, Mode::P).c;
      return N.dot(A.value(p.x, seg.region) * N) / c;
    };
    total += quad::adaptive_simpson(integrand, seg.s0, seg.s1, piece_tol);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Density PDE

struct Grid3 {
  Vec3 lo = Vec3::Constant(-1.0), hi = Vec3::Constant(1.0);
  std::array<int, 3> n{9, 9, 9};

  double spacing(int axis) const {
    const int m = n[static_cast<std::size_t>(axis)];
    return m > 1 ? (hi(axis) - lo(axis)) / (m - 1) : 0.0;
  }
  Vec3 point(int i, int j, int k) const {
    return Vec3(lo(0) + i * spacing(0), lo(1) + j * spacing(1), lo(2) + k * spacing(2));
  }
  std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n[1] + static_cast<std::size_t>(j)) * n[2] + static_cast<std::size_t>(k);
  }
};

/// lambda^2 - lambda mu + 2 mu^2 = mu^2 (r^2 - 5 r + 8) with r = cp^2 / cs^2.
inline double ellipticity_denominator(const Params& p) { return p.lambda * p.lambda - p.lambda * p.mu + 2.0 * p.mu * p.mu; }

/// Leading coefficient of the density PDE,
/// (cp^2 - cs^2)(cp^2 - 4 cs^2) / (cp^4 - 5 cp^2 cs^2 + 8 cs^4),
/// written in Lame parameters so that it vanishes exactly when lambda = 2 mu.
inline double ellipticity_factor(const Params& p) {
  const double den = ellipticity_denominator(p);
  if (!(den > 0.0)) throw Error(ErrorKind::NonPhysical, "ellipticity denominator is not positive");
  return (p.lambda + p.mu) * (p.lambda - 2.0 * p.mu) / den;
}

/// |c_P - 2 c_S| / c_S.
inline double distance_to_D(const Params& p) { return std::abs(p.cp() - 2.0 * p.cs()) / p.cs(); }

struct EllipticitySample {
  Vec3 x = Vec3::Zero();
  double factor = 0.0;
  double distance = 0.0;
  bool in_D = false;
};

inline std::vector<EllipticitySample> ellipticity_map(const ElasticMedium& medium, const Grid3& grid,
                                                      double tol = 1e-6) {
  std::vector<EllipticitySample> out;
  out.reserve(grid.size());
  for (int i = 0; i < grid.n[0]; ++i)
    for (int j = 0; j < grid.n[1]; ++j)
      for (int k = 0; k < grid.n[2]; ++k) {
        EllipticitySample e;
        e.x = grid.point(i, j, k);
        const Params p = medium.eval_params(e.x);
        e.factor = ellipticity_factor(p);
        e.distance = distance_to_D(p);
        e.in_D = e.distance < tol;
        out.push_back(e);
      }
  return out;
}

struct PDEResidualReport {
  Grid3 grid;
  std::vector<Vec3> points;  // interior points (two boundary layers dropped)
  std::vector<double> residual;
  std::vector<double> factor;
  std::vector<double> distance_to_D;
  double sup_norm = 0.0;
  bool exact_zero = false;  // rho and rho~ are the same field
  bool near_D = false;
};

struct PDEOptions {
  double near_D_tol = 1e-6;
  bool throw_near_D = true;
};

namespace detail {

/// Laplacian of log f from the field's jet.
inline double laplacian_log(const Jet& f) {
  return f.hess.trace() / f.value - f.grad.squaredNorm() / (f.value * f.value);
}

/// 4th-order centred Laplacian at an interior node (needs two layers).
inline double fd_laplacian(const Grid3& g, const std::vector<double>& f, int i, int j, int k) {
  const std::array<int, 3> c{i, j, k};
  double acc = 0.0;
  for (int a = 0; a < 3; ++a) {
    auto at = [&](int off) {
      std::array<int, 3> q = c;
      q[static_cast<std::size_t>(a)] += off;
      return f[g.index(q[0], q[1], q[2])];
    };
    const double h = g.spacing(a);
    acc += (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * h * h);
  }
  return acc;
}

}  // namespace detail

/// Residual of  F Delta^2 log(rho/rho~) - Delta(grad log(rho rho~) . grad log(rho/rho~)).
/// Delta log and the gradient product are analytic; the outer Laplacians use
/// the 4th-order stencil above, so the two outer node layers are dropped.
inline PDEResidualReport pde_residual(const ElasticMedium& medium, const AnalyticField& rho_tilde, const Grid3& grid,
                                      const PDEOptions& opt = {}) {
  for (int a = 0; a < 3; ++a)
    if (grid.n[static_cast<std::size_t>(a)] < 5) throw Error(ErrorKind::InvalidArgument, "grid needs >= 5 nodes per axis");
  PDEResidualReport rep;
  rep.grid = grid;
  const int region = medium.region_index(grid.point(0, 0, 0));
  std::vector<double> q(grid.size()), pr(grid.size());
  for (int i = 0; i < grid.n[0]; ++i)
    for (int j = 0; j < grid.n[1]; ++j)
      for (int k = 0; k < grid.n[2]; ++k) {
        const Vec3 x = grid.point(i, j, k);
        if (medium.region_index(x) != region)
          throw Error(ErrorKind::InvalidArgument, "grid must lie inside one smooth region");
      }
  const AnalyticField& rho = medium.regions[static_cast<std::size_t>(region)].rho;
  rep.exact_zero = rho == rho_tilde;
  if (!rep.exact_zero) {
    for (int i = 0; i < grid.n[0]; ++i)
      for (int j = 0; j < grid.n[1]; ++j)
        for (int k = 0; k < grid.n[2]; ++k) {
          const Vec3 x = grid.point(i, j, k);
          const Jet a = rho.jet(x), b = rho_tilde.jet(x);
          if (!(a.value > 0.0) || !(b.value > 0.0)) throw Error(ErrorKind::NonPhysical, "densities must be positive");
          const Vec3 ga = a.grad / a.value, gb = b.grad / b.value;
          q[grid.index(i, j, k)] = detail::laplacian_log(a) - detail::laplacian_log(b);
          pr[grid.index(i, j, k)] = (ga + gb).dot(ga - gb);
        }
  }
  for (int i = 2; i < grid.n[0] - 2; ++i)
    for (int j = 2; j < grid.n[1] - 2; ++j)
      for (int k = 2; k < grid.n[2] - 2; ++k) {
        const Vec3 x = grid.point(i, j, k);
        const Params p = medium.region_params(region, x);
        const double F = ellipticity_factor(p);
        const double d = distance_to_D(p);
        if (d < opt.near_D_tol) {
          rep.near_D = true;
          if (opt.throw_near_D)
            throw Error(ErrorKind::NearD, "grid point " + fmt_vec(x) + " lies on c_P = 2 c_S");
        }
        const double r =
            rep.exact_zero ? 0.0 : F * detail::fd_laplacian(grid, q, i, j, k) - detail::fd_laplacian(grid, pr, i, j, k);
        rep.points.push_back(x);
        rep.residual.push_back(r);
        rep.factor.push_back(F);
        rep.distance_to_D.push_back(d);
        rep.sup_norm = std::max(rep.sup_norm, std::abs(r));
      }
  return rep;
}

// ---------------------------------------------------------------------------
// Lens data comparison

struct Covector {
  Vec3 x = Vec3::Zero();
  Vec3 xi = Vec3::UnitX();
};

/// Random inward covectors on Sigma_q = {kappa = q}: box samples projected
/// onto the level set by Newton steps along grad kappa, directions drawn with
/// <dir, grad kappa> >= min_cos |grad kappa|.
inline std::vector<Covector> sample_level_set_covectors(const ElasticMedium& medium, double q, int count,
                                                        std::uint64_t seed, double min_cos = 0.3) {
  if (!medium.foliation) throw Error(ErrorKind::NoFoliation, "covector sweep needs a foliation function");
  const AnalyticField& kappa = *medium.foliation;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> G(0.0, 1.0);
  std::vector<Covector> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 1000 * count) throw Error(ErrorKind::InvalidArgument, "could not sample the level set");
    Vec3 x;
    for (int a = 0; a < 3; ++a) x(a) = medium.sample_box.lo(a) + U(rng) * (medium.sample_box.hi(a) - medium.sample_box.lo(a));
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      const Vec3 g = kappa.gradient(x);
      if (g.squaredNorm() < 1e-20) break;
      const double f = kappa.value(x) - q;
      x -= f * g / g.squaredNorm();
      if (std::abs(kappa.value(x) - q) < 1e-12) {
        ok = true;
        break;
      }
    }
    if (!ok || medium.exits_domain(x)) continue;
    const Vec3 n = kappa.gradient(x).normalized();
    Vec3 d(G(rng), G(rng), G(rng));
    d.normalize();
    if (d.dot(n) < 0.0) d = -d;
    if (d.dot(n) < min_cos) continue;
    out.push_back(Covector{x, d});
  }
  return out;
}

struct LensMatchRow {
  Covector entry;
  bool ok = false;
  std::string status = "ok";  // or the error kind of the failing medium
  double travel_A = 0.0, travel_B = 0.0;
  double time_difference = 0.0;
  double exit_position_mismatch = 0.0, exit_covector_mismatch = 0.0;
  double reversal_A = 0.0, reversal_B = 0.0;  // lens-reversal invariant residuals
};

struct LensMatchReport {
  std::vector<LensMatchRow> rows;
  double max_time_difference = 0.0, max_exit_mismatch = 0.0, max_reversal = 0.0;
  int no_return = 0;
};

/// Re-launching from the exit with the reversed covector must return to the
/// entry with the reversed entry covector after the same travel time.
inline double lens_reversal_residual(const ElasticMedium& m, const LensResult& r, Mode mode, double q) {
  const LensResult back = travel_time_and_lens(m, r.exit.x, -r.exit.xi, mode, q);
  return std::max({std::abs(back.travel_time - r.travel_time), (back.exit.x - r.entry.x).norm(),
                   (back.exit.xi + r.entry.xi).norm() / r.entry.xi.norm()});
}

inline LensMatchReport lens_match_check(const ElasticMedium& A, const ElasticMedium& B,
                                        const std::vector<Covector>& sweep, double q, Mode mode = Mode::P,
                                        bool check_reversal = true) {
  LensMatchReport rep;
  for (const auto& c : sweep) {
    LensMatchRow row;
    row.entry = c;
    try {
      const LensResult ra = travel_time_and_lens(A, c.x, c.xi, mode, q);
      const LensResult rb = travel_time_and_lens(B, c.x, c.xi, mode, q);
      row.travel_A = ra.travel_time;
      row.travel_B = rb.travel_time;
      row.time_difference = ra.travel_time - rb.travel_time;
      row.exit_position_mismatch = (ra.exit.x - rb.exit.x).norm();
      row.exit_covector_mismatch = (ra.exit.xi - rb.exit.xi).norm();
      if (check_reversal) {
        row.reversal_A = lens_reversal_residual(A, ra, mode, q);
        row.reversal_B = lens_reversal_residual(B, rb, mode, q);
      }
      row.ok = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoReturn) throw;
      row.status = to_string(e.kind());
      ++rep.no_return;
    }
    if (row.ok) {
      rep.max_time_difference = std::max(rep.max_time_difference, std::abs(row.time_difference));
      rep.max_exit_mismatch =
          std::max({rep.max_exit_mismatch, row.exit_position_mismatch, row.exit_covector_mismatch});
      rep.max_reversal = std::max({rep.max_reversal, row.reversal_A, row.reversal_B});
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace elastoray
