#pragma once

#include <array>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "medium.hpp"

namespace elastoray {

/// Principal symbol of the elastic operator at (tau, xi):
/// -rho[(tau^2 - cs^2 |xi|^2) I - (cp^2 - cs^2) xi xi^T].
template <class Scalar = double>
Eigen::Matrix<Scalar, 3, 3> principal_symbol(double rho, double cp, double cs, Scalar tau,
                                             const Eigen::Matrix<Scalar, 3, 1>& xi) {
  const Scalar xx = xi.dot(xi);  // bilinear for complex xi
  return -rho * ((tau * tau - cs * cs * xx) * Eigen::Matrix<Scalar, 3, 3>::Identity() -
                 (cp * cp - cs * cs) * xi * xi.transpose());
}

/// Sub-principal (order one) part: -i[grad(lambda) xi^T + (grad(mu).xi) I + xi grad(mu)^T].
inline CMat3 subprincipal_symbol(const Vec3& grad_lambda, const Vec3& grad_mu, const Vec3& xi) {
  const Mat3 m = grad_lambda * xi.transpose() + grad_mu.dot(xi) * Mat3::Identity() + xi * grad_mu.transpose();
  return -I_unit * m.cast<cplx>();
}

struct PolarizationBasis {
  Vec3 N = Vec3::UnitX();
  Vec3 N1 = Vec3::UnitY();
  Vec3 N2 = Vec3::UnitZ();

  Mat3 as_rows() const {
    Mat3 V;
    V.row(0) = N.transpose();
    V.row(1) = N1.transpose();
    V.row(2) = N2.transpose();
    return V;
  }
};

/// N = xi/|xi|; N1, N2 complete a right-handed orthonormal frame. When a
/// reference normal is given, N2 = (nu x xi) normalized (SH) and N1 = N2 x N (SV).
inline PolarizationBasis polarization_basis(const Vec3& xi, const std::optional<Vec3>& nu = std::nullopt) {
  PolarizationBasis b;
  b.N = xi.normalized();
  Vec3 sh = nu ? Vec3(nu->cross(b.N)) : Vec3::Zero();
  if (sh.norm() < 1e-12) sh = any_orthogonal(b.N);
  b.N2 = sh.normalized();
  b.N1 = b.N2.cross(b.N);
  return b;
}

struct ModeProjectors {
  Mat3 P, S;
  Mat3 V;            // rows: N, N1, N2 (orthogonal, V^{-1} = V^T)
  Vec3 eigenvalues;  // -rho(tau^2 - cp^2|xi|^2), -rho(tau^2 - cs^2|xi|^2) x2
};

inline ModeProjectors mode_projectors(double rho, double cp, double cs, double tau, const Vec3& xi) {
  if (!(xi.norm() > 0.0)) throw Error(ErrorKind::InvalidArgument, "xi must be nonzero");
  ModeProjectors r;
  const PolarizationBasis b = polarization_basis(xi);
  r.V = b.as_rows();
  const double x2 = xi.squaredNorm();
  r.eigenvalues = -Vec3(rho * (tau * tau - cp * cp * x2), rho * (tau * tau - cs * cs * x2),
                        rho * (tau * tau - cs * cs * x2));
  Mat3 eP = Mat3::Zero();
  eP(0, 0) = 1.0;
  r.P = r.V.transpose() * eP * r.V;
  r.S = Mat3::Identity() - r.P;
  return r;
}

/// Principal symbol of the traction operator on a plane wave a e^{i x.xi}:
/// i[lambda (xi.a) nu + mu((nu.xi) a + (nu.a) xi)].
inline CVec3 traction_symbol(double lambda, double mu, const Vec3& nu, const CVec3& a, const CVec3& xi) {
  const CVec3 n = to_complex(nu);
  return I_unit * (lambda * bdot(xi, a) * n + mu * (bdot(n, xi) * a + bdot(n, a) * xi));
}

enum class Pol { P = 0, SV = 1, SH = 2 };

inline const char* to_string(Pol p) { return p == Pol::P ? "P" : (p == Pol::SV ? "SV" : "SH"); }

/// Plane wave in one side at a fixed tangential covector.
struct PlaneWave {
  Pol pol = Pol::P;
  CVec3 xi = CVec3::Zero();
  CVec3 polarization = CVec3::Zero();
  cplx normal_slowness{0.0, 0.0};  // component of xi along nu
  bool evanescent = false;
  double rho = 0.0, c = 0.0;
  cplx amplitude{0.0, 0.0};

  /// Time-averaged energy flux through the interface, up to a common factor.
  double normal_flux(double tau) const {
    if (evanescent) return 0.0;
    const double cos_t = c * std::abs(normal_slowness.real()) / tau;
    return rho * c * std::norm(amplitude) * cos_t;
  }
};

/// Builds the plane wave of polarization `pol` on a side with parameters p,
/// normal-slowness sign `sgn` (+1 along nu, -1 against).
inline PlaneWave make_plane_wave(const Params& p, const Vec3& nu, double tau, const Vec3& xi_tan, Pol pol, int sgn) {
  PlaneWave w;
  w.pol = pol;
  w.rho = p.rho;
  w.c = pol == Pol::P ? p.cp() : p.cs();
  const double full = tau * tau / (w.c * w.c);
  const double rad = full - xi_tan.squaredNorm();
  if (rad <= 1e-12 * full) {
    w.evanescent = true;
    w.normal_slowness = cplx(0.0, sgn * std::sqrt(std::max(0.0, -rad)));
  } else {
    w.normal_slowness = cplx(sgn * std::sqrt(rad), 0.0);
  }
  w.xi = to_complex(xi_tan) + w.normal_slowness * to_complex(nu);
  Vec3 sh = nu.cross(xi_tan);
  if (sh.norm() < 1e-12 * std::max(1.0, xi_tan.norm()) || xi_tan.norm() < 1e-14) sh = any_orthogonal(nu);
  const CVec3 a_sh = to_complex(sh.normalized());
  const CVec3 a_p = (w.c / tau) * w.xi;
  switch (pol) {
    case Pol::P: w.polarization = a_p; break;
    case Pol::SH: w.polarization = a_sh; break;
    case Pol::SV: w.polarization = bcross(a_sh, a_p); break;
  }
  return w;
}

struct InterfaceSolution {
  PlaneWave incident;
  std::array<PlaneWave, 3> reflected, transmitted;  // indexed by Pol
  double condition = 0.0;
  double residual = 0.0;  // relative continuity residual
  double tau = 1.0;
  Vec3 nu = Vec3::UnitZ();

  CVec3 reflected_displacement() const {
    CVec3 u = CVec3::Zero();
    for (const auto& w : reflected) u += w.amplitude * w.polarization;
    return u;
  }
  CVec3 transmitted_displacement() const {
    CVec3 u = CVec3::Zero();
    for (const auto& w : transmitted) u += w.amplitude * w.polarization;
    return u;
  }
  bool all_propagating() const {
    for (const auto& w : reflected)
      if (w.evanescent) return false;
    for (const auto& w : transmitted)
      if (w.evanescent) return false;
    return true;
  }
};

/// Solves displacement and traction continuity for one incident plane wave.
/// `incident_side` is the side (+1/-1 relative to nu) the incident wave lives
/// on; the wave propagates towards the interface.
inline InterfaceSolution solve_interface_system(const Params& minus, const Params& plus, const Vec3& nu_in, double tau,
                                                const Vec3& xi_tan_in, Pol incident, int incident_side,
                                                cplx amplitude = 1.0, double glancing_tol = 1e-3) {
  const Vec3 nu = nu_in.normalized();
  const Vec3 xi_tan = xi_tan_in - xi_tan_in.dot(nu) * nu;
  const Params& pin = incident_side >= 0 ? plus : minus;
  const Params& pout = incident_side >= 0 ? minus : plus;
  const int into = incident_side >= 0 ? -1 : +1;
  ElasticMedium::check_physical(pin, Vec3::Zero());
  ElasticMedium::check_physical(pout, Vec3::Zero());

  InterfaceSolution sol;
  sol.tau = tau;
  sol.nu = nu;
  sol.incident = make_plane_wave(pin, nu, tau, xi_tan, incident, into);
  if (sol.incident.evanescent)
    throw Error(ErrorKind::InvalidArgument, std::string("incident ") + to_string(incident) +
                                                " wave is evanescent at this tangential covector");
  const double ratio = std::abs(sol.incident.normal_slowness.real()) / sol.incident.xi.norm();
  if (ratio < glancing_tol)
    throw Error(ErrorKind::GlancingRay, "incident |xi.nu|/|xi| = " + std::to_string(ratio));
  sol.incident.amplitude = amplitude;
  for (int j = 0; j < 3; ++j) {
    sol.reflected[j] = make_plane_wave(pin, nu, tau, xi_tan, static_cast<Pol>(j), -into);
    sol.transmitted[j] = make_plane_wave(pout, nu, tau, xi_tan, static_cast<Pol>(j), into);
  }

  Eigen::Matrix<cplx, 6, 6> A;
  Eigen::Matrix<cplx, 6, 1> rhs;
  for (int j = 0; j < 3; ++j) {
    const auto& r = sol.reflected[j];
    const auto& t = sol.transmitted[j];
    A.block<3, 1>(0, j) = r.polarization;
    A.block<3, 1>(0, 3 + j) = -t.polarization;
    A.block<3, 1>(3, j) = traction_symbol(pin.lambda, pin.mu, nu, r.polarization, r.xi);
    A.block<3, 1>(3, 3 + j) = -traction_symbol(pout.lambda, pout.mu, nu, t.polarization, t.xi);
  }
  const CVec3 tI = traction_symbol(pin.lambda, pin.mu, nu, sol.incident.polarization, sol.incident.xi);
  rhs.head<3>() = -amplitude * sol.incident.polarization;
  rhs.tail<3>() = -amplitude * tI;

  // row scaling so displacement and traction rows are commensurate
  const double tscale = 1.0 / std::max(1e-300, tI.norm() / std::max(1e-300, sol.incident.polarization.norm()));
  A.bottomRows<3>() *= tscale;
  rhs.tail<3>() *= tscale;

  Eigen::JacobiSVD<Eigen::Matrix<cplx, 6, 6>> svd(A);
  const auto sv = svd.singularValues();
  sol.condition = sv(5) > 0.0 ? sv(0) / sv(5) : std::numeric_limits<double>::infinity();
  if (!(sol.condition < 1e12))
    throw Error(ErrorKind::SingularSystem, "interface system condition number " + std::to_string(sol.condition) +
                                               " at |xi_tan| = " + std::to_string(xi_tan.norm()));
  const Eigen::Matrix<cplx, 6, 1> x = Eigen::PartialPivLU<Eigen::Matrix<cplx, 6, 6>>(A).solve(rhs);
  for (int j = 0; j < 3; ++j) {
    sol.reflected[j].amplitude = x(j);
    sol.transmitted[j].amplitude = x(3 + j);
  }

  // continuity residuals in unscaled form
  const CVec3 uI = amplitude * sol.incident.polarization;
  CVec3 du = uI + sol.reflected_displacement() - sol.transmitted_displacement();
  CVec3 dt = amplitude * tI;
  for (int j = 0; j < 3; ++j) {
    const auto& r = sol.reflected[j];
    const auto& t = sol.transmitted[j];
    dt += r.amplitude * traction_symbol(pin.lambda, pin.mu, nu, r.polarization, r.xi);
    dt -= t.amplitude * traction_symbol(pout.lambda, pout.mu, nu, t.polarization, t.xi);
  }
  const double su = std::max(1e-300, uI.norm());
  const double st = std::max(1e-300, (amplitude * tI).norm());
  sol.residual = std::max(du.norm() / su, dt.norm() / st);
  return sol;
}

/// Relative mismatch between incident and outgoing normal energy flux.
inline double energy_flux_check(const InterfaceSolution& s) {
  const double in = s.incident.normal_flux(s.tau);
  double out = 0.0;
  for (const auto& w : s.reflected) out += w.normal_flux(s.tau);
  for (const auto& w : s.transmitted) out += w.normal_flux(s.tau);
  return std::abs(out - in) / in;
}

/// Reflection and transmission matrices in mode-amplitude coordinates
/// (P, SV, SH): column i holds the outgoing amplitudes for a unit incident
/// wave of polarization i at the same tangential covector.
struct RTMatrices {
  CMat3 M_R = CMat3::Zero();
  CMat3 M_T = CMat3::Zero();
  std::array<bool, 3> column_valid{false, false, false};
  std::array<bool, 3> reflected_evanescent{false, false, false};
  std::array<bool, 3> transmitted_evanescent{false, false, false};
  std::array<std::optional<InterfaceSolution>, 3> columns;
  double max_residual = 0.0;
  double max_condition = 0.0;

  /// Displacement-space action on an incident displacement vector of the
  /// given incident wave (projected onto the incident polarizations).
  CVec3 reflected_displacement(const CVec3& coeffs) const {
    CVec3 u = CVec3::Zero();
    for (int i = 0; i < 3; ++i)
      if (columns[i])
        for (int j = 0; j < 3; ++j) u += coeffs(i) * M_R(j, i) * columns[i]->reflected[j].polarization;
    return u;
  }
};

inline RTMatrices rt_matrices(const Params& minus, const Params& plus, const Vec3& nu, double tau, const Vec3& xi_tan,
                              int incident_side) {
  RTMatrices m;
  for (int i = 0; i < 3; ++i) {
    try {
      auto s = solve_interface_system(minus, plus, nu, tau, xi_tan, static_cast<Pol>(i), incident_side);
      for (int j = 0; j < 3; ++j) {
        m.M_R(j, i) = s.reflected[j].amplitude;
        m.M_T(j, i) = s.transmitted[j].amplitude;
        m.reflected_evanescent[j] = s.reflected[j].evanescent;
        m.transmitted_evanescent[j] = s.transmitted[j].evanescent;
      }
      m.max_residual = std::max(m.max_residual, s.residual);
      m.max_condition = std::max(m.max_condition, s.condition);
      m.column_valid[i] = true;
      m.columns[i] = std::move(s);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InvalidArgument) throw;  // incident mode evanescent: column left empty
    }
  }
  return m;
}

}  // namespace elastoray
