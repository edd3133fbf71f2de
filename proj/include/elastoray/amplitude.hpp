#pragma once

#include <array>
#include <vector>

#include "interface_ops.hpp"
#include "quadrature.hpp"
#include "raytrace.hpp"

namespace elastoray {

// ---------------------------------------------------------------------------
// Symbol derivatives

/// d p / d xi_j.
inline Mat3 dp_dxi(double rho, double cp, double cs, const Vec3& xi, int j) {
  const Vec3 e = Vec3::Unit(j);
  return rho * (2.0 * cs * cs * xi(j) * Mat3::Identity() + (cp * cp - cs * cs) * (e * xi.transpose() + xi * e.transpose()));
}

/// d^2 p / d xi_j d xi_k (constant in xi).
inline Mat3 d2p_dxi2(double rho, double cp, double cs, int j, int k) {
  const Vec3 ej = Vec3::Unit(j), ek = Vec3::Unit(k);
  return rho * (2.0 * cs * cs * (j == k ? 1.0 : 0.0) * Mat3::Identity() +
                (cp * cp - cs * cs) * (ej * ek.transpose() + ek * ej.transpose()));
}

inline Mat3 dp_dtau(double rho, double tau) { return -2.0 * rho * tau * Mat3::Identity(); }

/// d p_1 / d xi_j.
inline CMat3 dp1_dxi(const Vec3& grad_lambda, const Vec3& grad_mu, int j) {
  const Vec3 e = Vec3::Unit(j);
  const Mat3 m = grad_lambda * e.transpose() + grad_mu(j) * Mat3::Identity() + e * grad_mu.transpose();
  return -I_unit * m.cast<cplx>();
}

/// Pointwise data entering B and C.
struct BCContext {
  double rho = 1.0, cp = 1.0, cs = 0.5;
  Vec3 xi = Vec3::UnitX();
  Vec3 grad_lambda = Vec3::Zero(), grad_mu = Vec3::Zero();
  Mat3 phase_hessian = Mat3::Zero();  // second x-derivatives of the phase (= grad xi)
};

using SecondDerivs = std::array<CMat3, 3>;  // [a](b, c) = d_b d_c V_a

/// B V = i sum_j dp/dxi_j d_j V + (i/2) sum_{j,k} d2p/dxi_j dxi_k (d_jk phase) V - p_1 V.
/// D(a, j) = d_j V_a.
inline CVec3 apply_B(const BCContext& c, const CVec3& V, const CMat3& D) {
  CVec3 acc = CVec3::Zero();
  for (int j = 0; j < 3; ++j) acc += I_unit * (dp_dxi(c.rho, c.cp, c.cs, c.xi, j).cast<cplx>() * D.col(j));
  Mat3 hess_term = Mat3::Zero();
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) hess_term += d2p_dxi2(c.rho, c.cp, c.cs, j, k) * c.phase_hessian(j, k);
  acc += 0.5 * I_unit * (hess_term.cast<cplx>() * V);
  acc -= subprincipal_symbol(c.grad_lambda, c.grad_mu, c.xi) * V;
  return acc;
}

/// C V = i sum_j dp_1/dxi_j d_j V + (1/2) sum_{j,k} d2p/dxi_j dxi_k d_jk V.
inline CVec3 apply_C(const BCContext& c, const CMat3& D, const SecondDerivs& D2) {
  CVec3 acc = CVec3::Zero();
  for (int j = 0; j < 3; ++j) acc += I_unit * (dp1_dxi(c.grad_lambda, c.grad_mu, j) * D.col(j));
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) {
      const CVec3 vjk(D2[0](j, k), D2[1](j, k), D2[2](j, k));
      acc += 0.5 * (d2p_dxi2(c.rho, c.cp, c.cs, j, k).cast<cplx>() * vjk);
    }
  return acc;
}

/// Perpendicular correction from B(a_0): -(B a_0)_perp / (rho (cp^2 - cs^2)|xi|^2).
inline CVec3 h_minus1_from_Ba0(const BCContext& c, const CVec3& Ba0, const Vec3& N, double* projection_residual = nullptr) {
  const CVec3 n = to_complex(N);
  const CVec3 raw = -Ba0 / (c.rho * (c.cp * c.cp - c.cs * c.cs) * c.xi.squaredNorm());
  const CVec3 h = raw - bdot(n, raw) * n;
  if (projection_residual) *projection_residual = std::abs(bdot(n, h)) / std::max(1e-300, h.norm());
  return h;
}

// ---------------------------------------------------------------------------
// Ray bundle

enum class LaunchKind { PlaneWave, PointSource };

struct BundleLaunch {
  LaunchKind kind = LaunchKind::PlaneWave;
  Vec3 x0 = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  /// Transport starts here (must be > 0 for a point source).
  double s_ref = 0.0;
  /// Initial b_0 on companion (u, v): b0 * (1 + profile_u * u + profile_v * v).
  cplx b0 = 1.0;
  double profile_u = 0.0, profile_v = 0.0;
};

struct BundleOptions {
  double h = 1e-3;
  double ds_over_h = 10.0;
  int radius = 3;
  double drift_tol = 1e-7;
};

/// P-ray bundle: (2R+1)^2 companions integrated with a fixed step on a common
/// arclength grid. Companion (i, j) carries label coordinates (u, v) = h(i, j):
/// launch offsets for a plane-wave patch, direction angles for a point source.
class RayBundle {
 public:
  RayBundle(const ElasticMedium& medium, const BundleLaunch& launch, double s_max, const BundleOptions& opt = {})
      : medium_(&medium), launch_(launch), opt_(opt) {
    R_ = opt.radius;
    n_ = 2 * R_ + 1;
    h_ = opt.h;
    ds_ = opt.h * opt.ds_over_h;
    N0_ = launch.direction.normalized();
    e1_ = any_orthogonal(N0_);
    e2_ = N0_.cross(e1_);
    region_ = medium.region_index(launch.x0);
    if (launch.kind == LaunchKind::PointSource && !(launch.s_ref > 0.0))
      throw Error(ErrorKind::InvalidArgument, "point-source bundle needs s_ref > 0");
    // two padding nodes on each side keep every reported node centred
    if (launch.kind == LaunchKind::PlaneWave) {
      s_first_ = launch.s_ref - kPad * ds_;
      k_launch_ = kPad;
      k_ref_ = kPad;
    } else {
      k_ref_ = static_cast<int>(std::ceil(launch.s_ref / ds_ - 1e-9));
      if (k_ref_ < kPad) throw Error(ErrorKind::InvalidArgument, "point-source s_ref must be at least two arclength steps");
    }
    K_ = static_cast<int>(std::floor((s_max - s_first_) / ds_ + 1e-9)) + kPad;
    if (K_ < k_ref_ + 2 * kPad + 4) throw Error(ErrorKind::InvalidArgument, "bundle too short for the arclength grid");
    sides_.resize(medium.interfaces.size());
    for (std::size_t i = 0; i < medium.interfaces.size(); ++i)
      sides_[i] = medium.interfaces[i].implicit(launch.x0) > 0.0 ? 1 : -1;
    integrate();
  }

  int radius() const { return R_; }
  static constexpr int kPad = 2;
  int nodes() const { return K_ + 1; }
  /// Reported transport nodes are [k_ref, k_end].
  int k_ref() const { return k_ref_; }
  int k_end() const { return K_ - kPad; }
  double ds() const { return ds_; }
  double h() const { return h_; }
  double s_of(int k) const { return s_first_ + k * ds_; }
  double s_ref() const { return s_of(k_ref_); }
  double s_max() const { return s_of(k_end()); }
  int region() const { return region_; }
  const ElasticMedium& medium() const { return *medium_; }
  const BundleLaunch& launch() const { return launch_; }
  double max_drift() const { return max_drift_; }

  const RayState& node(int i, int j, int k) const { return states_[index(i, j, k)]; }
  const RayState& node_rate(int i, int j, int k) const { return rates_[index(i, j, k)]; }
  Vec3 x(int i, int j, int k) const { return node(i, j, k).segment<3>(0); }
  Vec3 xi(int i, int j, int k) const { return node(i, j, k).segment<3>(3); }
  Vec3 N(int i, int j, int k) const { return xi(i, j, k).normalized(); }

  cplx initial_b0(int i, int j) const {
    return launch_.b0 * (1.0 + launch_.profile_u * h_ * i + launch_.profile_v * h_ * j);
  }

  /// Companion state at arbitrary s by cubic Hermite interpolation.
  RayState companion_at(int i, int j, double s) const {
    double fk = (s - s_first_) / ds_;
    int k = static_cast<int>(std::floor(fk));
    k = std::clamp(k, 0, K_ - 1);
    const double th = fk - k;
    const RayState& y0 = node(i, j, k);
    const RayState& y1 = node(i, j, k + 1);
    const RayState& d0 = node_rate(i, j, k);
    const RayState& d1 = node_rate(i, j, k + 1);
    const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
    const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
    return h00 * y0 + h10 * ds_ * d0 + h01 * y1 + h11 * ds_ * d1;
  }

  /// Divergence of N = xi/|xi| at the central ray, from the crossings of the
  /// four nearest companions with the plane orthogonal to N through x(s).
  double divergence_of_N(double s) const {
    if (s < s_ref() - 1e-12 || s > s_max() + 1e-12)
      throw Error(ErrorKind::InvalidArgument, "s outside the bundle's transport range");
    const RayState c = companion_at(0, 0, s);
    const Vec3 xc = c.segment<3>(0);
    const Vec3 Nc = c.segment<3>(3).normalized();
    const Vec3 a1 = any_orthogonal(Nc), a2 = Nc.cross(a1);
    auto cross_plane = [&](int i, int j, Eigen::Vector2d& q, Eigen::Vector2d& n) {
      double sc = s;
      RayState y = companion_at(i, j, sc);
      for (int it = 0; it < 30; ++it) {
        const Vec3 p = y.segment<3>(0);
        const Vec3 d = y.segment<3>(3).normalized();
        const double f = (p - xc).dot(Nc);
        const double step = f / d.dot(Nc);
        sc -= step;
        y = companion_at(i, j, sc);
        if (std::abs(step) < 1e-15) break;
      }
      const Vec3 p = y.segment<3>(0) - xc;
      const Vec3 d = y.segment<3>(3).normalized();
      q = Eigen::Vector2d(p.dot(a1), p.dot(a2));
      n = Eigen::Vector2d(d.dot(a1), d.dot(a2));
    };
    Eigen::Vector2d qp, np, qm, nm, qvp, nvp, qvm, nvm;
    cross_plane(1, 0, qp, np);
    cross_plane(-1, 0, qm, nm);
    cross_plane(0, 1, qvp, nvp);
    cross_plane(0, -1, qvm, nvm);
    Eigen::Matrix2d Q, D;
    Q.col(0) = (qp - qm) / (2 * h_);
    Q.col(1) = (qvp - qvm) / (2 * h_);
    D.col(0) = (np - nm) / (2 * h_);
    D.col(1) = (nvp - nvm) / (2 * h_);
    return (D * Q.inverse()).trace();
  }

  Vec3 central_x(double s) const { return companion_at(0, 0, s).segment<3>(0); }
  double central_t(double s) const { return companion_at(0, 0, s)(6); }

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * n_ + static_cast<std::size_t>(i + R_)) * n_ + static_cast<std::size_t>(j + R_);
  }

  void integrate() {
    const ElasticMedium& m = *medium_;
    states_.assign(static_cast<std::size_t>(K_ + 1) * n_ * n_, RayState::Zero());
    rates_ = states_;
    const BicharRhs rhs{medium_, region_, Mode::P, +1};
    for (int i = -R_; i <= R_; ++i)
      for (int j = -R_; j <= R_; ++j) {
        PhasePoint p;
        Vec3 dir = N0_;
        Vec3 x = launch_.x0;
        if (launch_.kind == LaunchKind::PlaneWave) {
          x = launch_.x0 + h_ * (i * e1_ + j * e2_);
        } else {
          dir = (N0_ + std::tan(h_ * i) * e1_ + std::tan(h_ * j) * e2_).normalized();
        }
        p = on_shell(m, x, dir, Mode::P);
        auto traj = ode::integrate_fixed<7>(rhs, 0.0, pack(p), ds_, K_ - k_launch_);
        if (k_launch_ > 0) {
          const BicharRhs back{medium_, region_, Mode::P, -1};
          auto before = ode::integrate_fixed<7>(back, 0.0, pack(p), ds_, k_launch_);
          std::vector<RayState> all;
          for (int k = k_launch_; k >= 1; --k) {
            RayState y = before[static_cast<std::size_t>(k)];
            y(6) = -y(6);
            all.push_back(y);
          }
          all.insert(all.end(), traj.begin(), traj.end());
          traj = std::move(all);
        }
        for (int k = 0; k <= K_; ++k) {
          const RayState& y = traj[static_cast<std::size_t>(k)];
          const Vec3 xk = y.segment<3>(0);
          for (std::size_t f = 0; f < m.interfaces.size(); ++f)
            if ((m.interfaces[f].implicit(xk) > 0.0 ? 1 : -1) != sides_[f])
              throw Error(ErrorKind::BundleBroken, "companion (" + std::to_string(i) + "," + std::to_string(j) +
                                                       ") crossed interface " + std::to_string(f));
          if (m.exits_domain(xk)) throw Error(ErrorKind::BundleBroken, "companion left the domain");
          states_[index(i, j, k)] = y;
          rates_[index(i, j, k)] = rhs(0.0, y);
          const double c = local_speed(m, region_, xk, Mode::P).c;
          const double drift = std::abs(c * y.segment<3>(3).norm() - 1.0);
          max_drift_ = std::max(max_drift_, drift);
          if (drift > opt_.drift_tol)
            throw Error(ErrorKind::BundleBroken, "companion characteristic drift " + std::to_string(drift));
        }
      }
  }

  const ElasticMedium* medium_;
  BundleLaunch launch_;
  BundleOptions opt_;
  int R_ = 3, n_ = 7, K_ = 0, k_ref_ = 0, k_launch_ = 0, region_ = 0;
  double h_ = 1e-3, ds_ = 1e-2, s_first_ = 0.0;
  Vec3 N0_, e1_, e2_;
  std::vector<int> sides_;
  std::vector<RayState> states_, rates_;
  double max_drift_ = 0.0;
};

/// Leading amplitude along the central ray:
/// b0(s) = b0(s_ref) sqrt(rho cp(s_ref) / rho cp(s)) exp(-1/2 int divN).
inline cplx transport_b0(const RayBundle& b, cplx b0_initial, double s, double tol = 1e-9) {
  const ElasticMedium& m = b.medium();
  auto rho_c = [&](double ss) {
    const Vec3 x = b.central_x(ss);
    return m.region_params(b.region(), x).rho * local_speed(m, b.region(), x, Mode::P).c;
  };
  const double integral = quad::adaptive_simpson([&](double r) { return b.divergence_of_N(r); }, b.s_ref(), s, tol);
  return b0_initial * std::sqrt(rho_c(b.s_ref()) / rho_c(s)) * std::exp(-0.5 * integral);
}

struct TransportState {
  double s = 0.0, t = 0.0;
  Vec3 x = Vec3::Zero();
  PolarizationBasis frame;
  cplx b0{0.0, 0.0};
  CVec3 h_minus1 = CVec3::Zero();
  cplx a_minus1{0.0, 0.0};
  double divN = 0.0;
  double rho_cp = 0.0, rho_cp0 = 0.0;
  double dlog_rho_cp = 0.0;  // d/ds log(rho cp)
  cplx G{0.0, 0.0};
  cplx compatibility{0.0, 0.0};  // N . B(b0 N)
  double h_projection_residual = 0.0;
  /// Outgoing mode amplitudes (P, SV, SH) after an interface update.
  std::array<cplx, 3> mode_amplitudes{cplx(0.0), cplx(0.0), cplx(0.0)};
  Mode mode = Mode::P;
};

struct TransportReport {
  std::vector<TransportState> states;
  std::vector<cplx> a_minus1_direct;  // RK4 on the transport ODE
  double defect_residual = 0.0;       // max |a' + coef a - G| / max |G|
  double route_mismatch = 0.0;        // integrating factor vs direct ODE, relative
  double compatibility_residual = 0.0;  // max |N.B(b0 N)| / (2 rho cp |b0|)
  double max_h_projection = 0.0;
};

namespace detail {

template <class V>
using GradOf = Eigen::Matrix<typename V::Scalar, 3, 3>;

/// x-gradient of a vector field sampled on the bundle grid (valid radius r,
/// node window [k0, k1]); result valid at radius r - 1.
template <class V>
std::vector<GradOf<V>> bundle_gradient(const RayBundle& b, const std::vector<V>& f, const std::vector<Mat3>& Minv,
                                       int r, int k0, int k1) {
  const int R = b.radius(), n = 2 * R + 1, nk = k1 - k0 + 1;
  auto id = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(k - k0) * n + static_cast<std::size_t>(i + R)) * n + static_cast<std::size_t>(j + R);
  };
  std::vector<GradOf<V>> out(f.size(), GradOf<V>::Zero());
  const double h = b.h(), ds = b.ds();
  for (int i = -(r - 1); i <= r - 1; ++i)
    for (int j = -(r - 1); j <= r - 1; ++j) {
      std::vector<V> line(static_cast<std::size_t>(nk));
      for (int k = k0; k <= k1; ++k) line[static_cast<std::size_t>(k - k0)] = f[id(i, j, k)];
      const auto fs = quad::derivative(line, ds);
      for (int k = k0; k <= k1; ++k) {
        GradOf<V> F;
        F.col(0) = (f[id(i + 1, j, k)] - f[id(i - 1, j, k)]) / (2.0 * h);
        F.col(1) = (f[id(i, j + 1, k)] - f[id(i, j - 1, k)]) / (2.0 * h);
        F.col(2) = fs[static_cast<std::size_t>(k - k0)];
        out[id(i, j, k)] = F * Minv[id(i, j, k)].template cast<typename V::Scalar>();
      }
    }
  return out;
}

}  // namespace detail

/// Transports b0, h_{-1} and a_{-1} along the central ray of a P bundle.
/// a_{-1} solves d/ds a + 1/2[d/ds log(rho cp) + divN] a = G with
/// G = -(N.B h_{-1} + N.C a_0) / (2 i rho cp^2 |xi|), by the integrating
/// factor 1/a_0 and, independently, by RK4 on the ODE.
inline TransportReport transport_amplitudes(const RayBundle& b, cplx a_minus1_initial) {
  const ElasticMedium& m = b.medium();
  const int R = b.radius(), n = 2 * R + 1;
  if (R < 3) throw Error(ErrorKind::InvalidArgument, "lower-order transport needs bundle radius >= 3");
  const int k0 = b.k_ref() - RayBundle::kPad, k1 = b.nodes() - 1, nk = k1 - k0 + 1;
  const int kr = b.k_ref(), ke = b.k_end(), nr = ke - kr + 1;
  const std::size_t total = static_cast<std::size_t>(nk) * n * n;
  auto id = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(k - k0) * n + static_cast<std::size_t>(i + R)) * n + static_cast<std::size_t>(j + R);
  };
  const double h = b.h();

  // level 0: coordinate Jacobian M = [x_u x_v N]
  std::vector<Mat3> Minv(total, Mat3::Identity());
  std::vector<double> J(total, 0.0);
  for (int k = k0; k <= k1; ++k)
    for (int i = -(R - 1); i <= R - 1; ++i)
      for (int j = -(R - 1); j <= R - 1; ++j) {
        Mat3 M;
        M.col(0) = (b.x(i + 1, j, k) - b.x(i - 1, j, k)) / (2 * h);
        M.col(1) = (b.x(i, j + 1, k) - b.x(i, j - 1, k)) / (2 * h);
        M.col(2) = b.N(i, j, k);
        const double det = M.determinant();
        if (!(det > 0.0))
          throw Error(ErrorKind::CausticEncountered, "ray-bundle Jacobian vanished at s = " + std::to_string(b.s_of(k)));
        J[id(i, j, k)] = det;
        Minv[id(i, j, k)] = M.inverse();
      }

  // per-node context and leading amplitude a0 = b0 N
  std::vector<BCContext> ctx(total);
  std::vector<Vec3> xi_f(total, Vec3::Zero());
  std::vector<CVec3> a0(total, CVec3::Zero());
  for (int k = k0; k <= k1; ++k)
    for (int i = -R; i <= R; ++i)
      for (int j = -R; j <= R; ++j) xi_f[id(i, j, k)] = b.xi(i, j, k);
  const auto H = detail::bundle_gradient(b, xi_f, Minv, R, k0, k1);
  const auto& reg = m.regions[static_cast<std::size_t>(b.region())];
  for (int k = k0; k <= k1; ++k)
    for (int i = -(R - 1); i <= R - 1; ++i)
      for (int j = -(R - 1); j <= R - 1; ++j) {
        const Vec3 x = b.x(i, j, k);
        const Jet lam = reg.lambda.jet(x), mu = reg.mu.jet(x), rho = reg.rho.jet(x);
        BCContext& c = ctx[id(i, j, k)];
        c.rho = rho.value;
        c.cp = std::sqrt((lam.value + 2 * mu.value) / rho.value);
        c.cs = std::sqrt(mu.value / rho.value);
        c.xi = b.xi(i, j, k);
        c.grad_lambda = lam.grad;
        c.grad_mu = mu.grad;
        const Mat3 Hn = H[id(i, j, k)];
        c.phase_hessian = 0.5 * (Hn + Hn.transpose());
        const Vec3 x0 = b.x(i, j, kr);
        const Params p0 = m.region_params(b.region(), x0);
        const double rc0 = p0.rho * p0.cp(), rc = c.rho * c.cp;
        const cplx b0 = b.initial_b0(i, j) * std::sqrt(rc0 / rc) * std::sqrt(J[id(i, j, kr)] / J[id(i, j, k)]);
        a0[id(i, j, k)] = b0 * to_complex(b.N(i, j, k));
      }

  // level 2: grad a0, B a0, h_{-1}
  const auto Da0 = detail::bundle_gradient(b, a0, Minv, R - 1, k0, k1);
  std::vector<CVec3> hm1(total, CVec3::Zero());
  std::vector<CVec3> Ba0(total, CVec3::Zero());
  std::vector<double> hproj(total, 0.0);
  for (int k = k0; k <= k1; ++k)
    for (int i = -(R - 2); i <= R - 2; ++i)
      for (int j = -(R - 2); j <= R - 2; ++j) {
        const std::size_t q = id(i, j, k);
        Ba0[q] = apply_B(ctx[q], a0[q], Da0[q]);
        hm1[q] = h_minus1_from_Ba0(ctx[q], Ba0[q], b.N(i, j, k), &hproj[q]);
      }

  // level 3: grad h_{-1}, second derivatives of a0
  const auto Dh = detail::bundle_gradient(b, hm1, Minv, R - 2, k0, k1);
  std::array<std::vector<CMat3>, 3> DDa0;
  for (int c = 0; c < 3; ++c) {
    std::vector<CVec3> col(total, CVec3::Zero());
    for (std::size_t q = 0; q < total; ++q) col[q] = Da0[q].col(c);
    DDa0[static_cast<std::size_t>(c)] = detail::bundle_gradient(b, col, Minv, R - 2, k0, k1);
  }

  TransportReport rep;
  rep.states.resize(static_cast<std::size_t>(nr));
  std::vector<cplx> G(static_cast<std::size_t>(nr)), b0c(static_cast<std::size_t>(nr));
  std::vector<double> divN(static_cast<std::size_t>(nr)), logrc(static_cast<std::size_t>(nr));
  const Params pc0 = m.region_params(b.region(), b.x(0, 0, kr));
  for (int k = kr; k <= ke; ++k) {
    const std::size_t q = id(0, 0, k);
    const BCContext& c = ctx[q];
    const Vec3 N = b.N(0, 0, k);
    const CVec3 n = to_complex(N);
    // Dh(a, b): derivative b of component a; second derivatives of a0:
    // DDa0[c](a, b) = d_b d_c a0_a
    SecondDerivs D2;
    for (int a = 0; a < 3; ++a)
      for (int bb = 0; bb < 3; ++bb)
        for (int cc = 0; cc < 3; ++cc) {
          const cplx v1 = DDa0[static_cast<std::size_t>(cc)][q](a, bb);
          const cplx v2 = DDa0[static_cast<std::size_t>(bb)][q](a, cc);
          D2[static_cast<std::size_t>(a)](bb, cc) = 0.5 * (v1 + v2);
        }
    const CVec3 Bh = apply_B(c, hm1[q], Dh[q]);
    const CVec3 Ca0 = apply_C(c, Da0[q], D2);
    const cplx g = -(bdot(n, Bh) + bdot(n, Ca0)) / (2.0 * I_unit * c.rho * c.cp * c.cp * c.xi.norm());
    TransportState st;
    st.s = b.s_of(k);
    st.t = b.node(0, 0, k)(6);
    st.x = b.x(0, 0, k);
    st.frame = polarization_basis(b.xi(0, 0, k));
    st.b0 = bdot(n, a0[q]);
    st.h_minus1 = hm1[q];
    st.h_projection_residual = hproj[q];
    st.divN = b.divergence_of_N(st.s);
    st.rho_cp = c.rho * c.cp;
    st.rho_cp0 = pc0.rho * pc0.cp();
    const Jet rho = reg.rho.jet(st.x), lam = reg.lambda.jet(st.x), mu = reg.mu.jet(st.x);
    const Vec3 grad_log_rc = 0.5 * (lam.grad + 2 * mu.grad) / (lam.value + 2 * mu.value) + 0.5 * rho.grad / rho.value;
    st.dlog_rho_cp = grad_log_rc.dot(N);
    st.G = g;
    st.compatibility = bdot(n, Ba0[q]);
    const std::size_t kk = static_cast<std::size_t>(k - kr);
    G[kk] = g;
    b0c[kk] = st.b0;
    divN[kk] = st.divN;
    logrc[kk] = std::log(st.rho_cp);
    rep.compatibility_residual =
        std::max(rep.compatibility_residual, std::abs(st.compatibility) / (2 * st.rho_cp * std::abs(st.b0)));
    rep.max_h_projection = std::max(rep.max_h_projection, st.h_projection_residual);
    rep.states[kk] = st;
  }

  // integrating factor g = sqrt(rho cp(s)/rho cp(T0)) exp(1/2 int divN) / a0(T0)
  const double ds = b.ds();
  const auto intdiv = quad::cumulative(divN, ds);
  const cplx a00 = b0c[0];
  if (std::abs(a00) < 1e-14) throw Error(ErrorKind::ZeroLeadingAmplitude, "a_0(T_0) vanishes");
  std::vector<cplx> gfac(static_cast<std::size_t>(nr)), gG(static_cast<std::size_t>(nr));
  for (std::size_t kk = 0; kk < gfac.size(); ++kk) {
    gfac[kk] = std::sqrt(std::exp(logrc[kk] - logrc[0])) * std::exp(0.5 * intdiv[kk]) / a00;
    gG[kk] = gfac[kk] * G[kk];
  }
  const auto igG = quad::cumulative(gG, ds);
  const cplx C0 = gfac[0] * a_minus1_initial;
  for (std::size_t kk = 0; kk < gfac.size(); ++kk) rep.states[kk].a_minus1 = (C0 + igG[kk]) / gfac[kk];

  // direct RK4 on the ODE with step 2 ds (midpoint data at the odd node)
  std::vector<double> coef(static_cast<std::size_t>(nr));
  {
    const auto dl = quad::derivative(logrc, ds);
    for (std::size_t kk = 0; kk < coef.size(); ++kk) coef[kk] = 0.5 * (dl[kk] + divN[kk]);
  }
  rep.a_minus1_direct.assign(static_cast<std::size_t>(nr), cplx(0.0));
  rep.a_minus1_direct[0] = a_minus1_initial;
  cplx a = a_minus1_initial;
  for (std::size_t kk = 0; kk + 2 < static_cast<std::size_t>(nr); kk += 2) {
    auto f = [&](std::size_t at, cplx v) { return -coef[at] * v + G[at]; };
    const double H2 = 2 * ds;
    const cplx q1 = f(kk, a), q2 = f(kk + 1, a + 0.5 * H2 * q1), q3 = f(kk + 1, a + 0.5 * H2 * q2),
               q4 = f(kk + 2, a + H2 * q3);
    const cplx mid_guess = a + 0.5 * H2 * (q1 + q2) / 2.0;
    a += H2 / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
    rep.a_minus1_direct[kk + 1] = mid_guess;
    rep.a_minus1_direct[kk + 2] = a;
  }
  double scale = 0.0;
  for (const auto& st : rep.states) scale = std::max(scale, std::abs(st.a_minus1));
  for (std::size_t kk = 0; kk + 2 < static_cast<std::size_t>(nr); kk += 2)
    rep.route_mismatch = std::max(rep.route_mismatch, std::abs(rep.a_minus1_direct[kk + 2] - rep.states[kk + 2].a_minus1) /
                                                          std::max(1e-300, scale));

  // plug-back defect of the integrating-factor solution
  std::vector<cplx> am(static_cast<std::size_t>(nr));
  for (std::size_t kk = 0; kk < am.size(); ++kk) am[kk] = rep.states[kk].a_minus1;
  const auto dam = quad::derivative(am, ds);
  double gmax = 0.0;
  for (const auto& g : G) gmax = std::max(gmax, std::abs(g));
  for (std::size_t kk = 0; kk < am.size(); ++kk)
    rep.defect_residual =
        std::max(rep.defect_residual, std::abs(dam[kk] + coef[kk] * am[kk] - G[kk]) / std::max(1e-300, gmax));
  return rep;
}

/// Outgoing amplitude after an interface event: the incident P displacement
/// b0 a_P is mapped by the principal-level matrices and re-projected onto
/// the outgoing mode's polarizations. a_{-1} is passed at principal level.
inline TransportState apply_interface_amplitudes(const TransportState& in, const RTMatrices& rt, BranchKind kind,
                                                 Mode out_mode) {
  if (!rt.column_valid[0]) throw Error(ErrorKind::InvalidArgument, "no P column in the interface matrices");
  const CMat3& M = kind == BranchKind::Reflect ? rt.M_R : rt.M_T;
  TransportState out = in;
  out.mode = out_mode;
  for (int j = 0; j < 3; ++j) out.mode_amplitudes[static_cast<std::size_t>(j)] = M(j, 0) * in.b0;
  const cplx factor = out_mode == Mode::P ? M(0, 0) : M(1, 0);
  out.b0 = factor * in.b0;
  out.a_minus1 = factor * in.a_minus1;
  out.h_minus1 = CVec3::Zero();
  return out;
}

// ---------------------------------------------------------------------------
// Wave-packet evaluation of the two-term parametrix

enum class PacketOrder { Leading, TwoTerm };

struct PacketSpec {
  BundleLaunch launch;
  double omega = 50.0;
  double sigma = 0.1;  // Gaussian envelope width (transverse)
  cplx a_minus1 = 0.0;
};

struct PacketField {
  double t = 0.0, s = 0.0;
  Vec3 center = Vec3::Zero();
  Vec3 N = Vec3::UnitX();
  cplx b0{0.0, 0.0}, a_minus1{0.0, 0.0};
  std::vector<Vec3> points;
  std::vector<CVec3> values;
  CVec3 center_value = CVec3::Zero();
};

/// Evaluates u = (b0 + a_{-1}/omega) N exp(i omega (psi - t)) times a
/// transverse Gaussian envelope, on a (2g+1)^2 grid in the plane orthogonal
/// to the central ray at time t.
inline PacketField propagate_packet(const ElasticMedium& medium, const PacketSpec& spec, PacketOrder order, double t,
                                    int half_grid = 8, double extent = 3.0, const BundleOptions& opt = {}) {
  const double c0 = medium.wave_speeds(spec.launch.x0).cp;
  const double s_start = spec.launch.s_ref;
  // central ray time t(s) is monotone; bracket and bisect
  double s_hi = std::max(4.0 * c0 * t, s_start + 8 * opt.h * opt.ds_over_h);
  RaySegment seg = integrate_segment(medium, on_shell(medium, spec.launch.x0, spec.launch.direction, Mode::P), s_hi);
  const double t_ref = seg.at(s_start).t;
  if (seg.end().t - t_ref < t)
    throw Error(ErrorKind::InvalidArgument, "ray segment ends before the requested time");
  double lo = s_start, hi = seg.s1;
  while (hi - lo > 1e-14 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (seg.at(mid).t - t_ref < t) lo = mid;
    else hi = mid;
  }
  const double s_star = 0.5 * (lo + hi);
  const double margin = 4 * opt.h * opt.ds_over_h;
  RayBundle bundle(medium, spec.launch, std::min(seg.s1, s_star + margin), opt);
  PacketField out;
  out.t = t;
  out.s = s_star;
  out.center = seg.at(s_star).x;
  out.N = seg.at(s_star).xi.normalized();
  if (order == PacketOrder::Leading) {
    out.b0 = transport_b0(bundle, spec.launch.b0, s_star);
  } else {
    const auto rep = transport_amplitudes(bundle, spec.a_minus1);
    // interpolate node values to s_star (cubic Lagrange on nearest nodes)
    const double fk = (s_star - bundle.s_ref()) / bundle.ds();
    const int n = static_cast<int>(rep.states.size());
    int k = std::clamp(static_cast<int>(std::floor(fk)) - 1, 0, n - 4);
    cplx b0 = 0.0, am = 0.0;
    for (int a = 0; a < 4; ++a) {
      double w = 1.0;
      for (int c = 0; c < 4; ++c)
        if (c != a) w *= (fk - (k + c)) / static_cast<double>(a - c);
      b0 += w * rep.states[static_cast<std::size_t>(k + a)].b0;
      am += w * rep.states[static_cast<std::size_t>(k + a)].a_minus1;
    }
    out.b0 = b0;
    out.a_minus1 = am;
  }
  const cplx amp = out.b0 + (order == PacketOrder::TwoTerm ? out.a_minus1 / spec.omega : cplx(0.0));
  const Vec3 a1 = any_orthogonal(out.N), a2 = out.N.cross(a1);
  const Vec3 xi_c = seg.at(s_star).xi;
  for (int i = -half_grid; i <= half_grid; ++i)
    for (int j = -half_grid; j <= half_grid; ++j) {
      const Vec3 d = extent * spec.sigma / std::max(1, half_grid) * (i * a1 + j * a2);
      const double env = std::exp(-d.squaredNorm() / (2 * spec.sigma * spec.sigma));
      const double phase = spec.omega * xi_c.dot(d);
      out.points.push_back(out.center + d);
      out.values.push_back(amp * env * std::exp(I_unit * phase) * to_complex(out.N));
    }
  out.center_value = amp * to_complex(out.N);
  return out;
}

}  // namespace elastoray
