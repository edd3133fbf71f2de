#include <gtest/gtest.h>

#include <random>

#include "elastoray/amplitude.hpp"
#include "elastoray/presets.hpp"

using namespace elastoray;

namespace {

BundleLaunch point_source(double s_ref, double profile_u = 0.0) {
  BundleLaunch L;
  L.kind = LaunchKind::PointSource;
  L.s_ref = s_ref;
  L.profile_u = profile_u;
  return L;
}

BundleLaunch bump_launch() {
  BundleLaunch L;
  L.x0 = Vec3(-3.0, 0.4, 0.2);
  L.direction = Vec3(1.0, 0.1, 0.0);
  return L;
}

BundleOptions spacing(double h) {
  BundleOptions o;
  o.h = h;
  return o;
}

}  // namespace

TEST(SymbolDerivatives, MatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double rho = 1.3, cp = 2.1, cs = 0.9, tau = 0.7, e = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 xi(U(rng), U(rng), U(rng));
    for (int j = 0; j < 3; ++j) {
      const Vec3 d = e * Vec3::Unit(j);
      const Mat3 fd = (principal_symbol(rho, cp, cs, tau, Vec3(xi + d)) - principal_symbol(rho, cp, cs, tau, Vec3(xi - d))) / (2 * e);
      EXPECT_LE((fd - dp_dxi(rho, cp, cs, xi, j)).norm(), 1e-8);
      for (int k = 0; k < 3; ++k) {
        const Vec3 dk = e * Vec3::Unit(k);
        const Mat3 fd2 = (dp_dxi(rho, cp, cs, Vec3(xi + dk), j) - dp_dxi(rho, cp, cs, Vec3(xi - dk), j)) / (2 * e);
        EXPECT_LE((fd2 - d2p_dxi2(rho, cp, cs, j, k)).norm(), 1e-8);
      }
    }
    const Mat3 fdt = (principal_symbol(rho, cp, cs, tau + e, xi) - principal_symbol(rho, cp, cs, tau - e, xi)) / (2 * e);
    EXPECT_LE((fdt - dp_dtau(rho, tau)).norm(), 1e-8);
  }
  const Vec3 gl(0.3, -0.2, 0.5), gm(-0.1, 0.4, 0.2), xi(0.2, 0.7, -0.4);
  for (int j = 0; j < 3; ++j) {
    const Vec3 d = e * Vec3::Unit(j);
    const CMat3 fd = (subprincipal_symbol(gl, gm, Vec3(xi + d)) - subprincipal_symbol(gl, gm, Vec3(xi - d))) / (2 * e);
    EXPECT_LE((fd - dp1_dxi(gl, gm, j)).norm(), 1e-9);
  }
}

TEST(SymbolDerivatives, ContractedFormsMatchClosedExpressions) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> G(0.0, 1.0);
  BCContext c;
  c.rho = 1.4;
  c.cp = 1.9;
  c.cs = 0.8;
  c.xi = Vec3(0.3, -0.1, 0.2);
  c.grad_lambda = Vec3(G(rng), G(rng), G(rng));
  c.grad_mu = Vec3(G(rng), G(rng), G(rng));
  Mat3 H;
  for (int i = 0; i < 9; ++i) H(i) = G(rng);
  c.phase_hessian = 0.5 * (H + H.transpose());
  CVec3 V;
  CMat3 D;
  SecondDerivs D2;
  for (int i = 0; i < 3; ++i) V(i) = cplx(G(rng), G(rng));
  for (int i = 0; i < 9; ++i) D(i) = cplx(G(rng), G(rng));
  for (auto& m : D2) {
    CMat3 r;
    for (int i = 0; i < 9; ++i) r(i) = cplx(G(rng), G(rng));
    m = 0.5 * (r + r.transpose());
  }
  const double a = c.cp * c.cp - c.cs * c.cs;
  const CVec3 xi = to_complex(c.xi);
  const CVec3 transport = c.rho * (2 * c.cs * c.cs * (D * xi) + a * (D.transpose() * xi + xi * D.trace()));
  const CVec3 hess = c.rho * (2 * c.cs * c.cs * c.phase_hessian.trace() * V + 2 * a * (c.phase_hessian.cast<cplx>() * V));
  const CVec3 p1V = -I_unit * (to_complex(c.grad_lambda) * bdot(xi, V) + c.grad_mu.dot(c.xi) * V +
                               xi * bdot(to_complex(c.grad_mu), V));
  const CVec3 B = I_unit * transport + 0.5 * I_unit * hess - p1V;
  EXPECT_LE((apply_B(c, V, D) - B).norm(), 1e-12 * B.norm());

  CVec3 lap, graddiv;
  for (int i = 0; i < 3; ++i) {
    lap(i) = D2[static_cast<std::size_t>(i)].trace();
    graddiv(i) = D2[0](i, 0) + D2[1](i, 1) + D2[2](i, 2);
  }
  const CVec3 first = to_complex(c.grad_lambda) * D.trace() + D * to_complex(c.grad_mu) +
                      D.transpose() * to_complex(c.grad_mu);
  const CVec3 C = first + c.rho * (c.cs * c.cs * lap + a * graddiv);
  EXPECT_LE((apply_C(c, D, D2) - C).norm(), 1e-12 * C.norm());
}

TEST(Bundle, PlaneWaveInHomogeneousMediumHasZeroDivergence) {
  const auto m = presets::homogeneous(2.0, 1.0, 1.5);
  BundleLaunch L;
  L.direction = Vec3(1.0, 0.3, -0.2);
  RayBundle b(m, L, 2.0);
  for (double s = 0.0; s <= 2.0; s += 0.25) EXPECT_LE(std::abs(b.divergence_of_N(s)), 1e-9);
  const auto rep = transport_amplitudes(b, cplx(0.2, 0.1));
  for (const auto& st : rep.states) {
    EXPECT_LE(std::abs(st.b0 - 1.0), 1e-9);
    EXPECT_LE(st.h_minus1.norm(), 1e-7);
    EXPECT_LE(std::abs(st.a_minus1 - cplx(0.2, 0.1)), 1e-7);
  }
}

TEST(Bundle, PointSourceDivergenceIsTwoOverS) {
  const auto m = presets::homogeneous(2.0, 1.0, 1.5);
  double err[2];
  for (int r = 0; r < 2; ++r) {
    RayBundle b(m, point_source(1.0), 3.0, spacing(r == 0 ? 2e-3 : 1e-3));
    err[r] = 0.0;
    for (double s = 1.0; s <= 3.0; s += 0.1) err[r] = std::max(err[r], std::abs(b.divergence_of_N(s) * s / 2.0 - 1.0));
  }
  EXPECT_LT(err[1], 1e-4);
  EXPECT_GT(err[0] / err[1], 3.5);
  EXPECT_LT(err[0] / err[1], 4.5);
}

TEST(Transport, PointSourceLeadingAmplitudeDecaysAsOneOverS) {
  const auto m = presets::homogeneous(2.0, 1.0, 1.5);
  double err[2];
  for (int r = 0; r < 2; ++r) {
    RayBundle b(m, point_source(1.0), 3.0, spacing(r == 0 ? 2e-3 : 1e-3));
    err[r] = 0.0;
    for (double s : {1.5, 2.0, 3.0}) err[r] = std::max(err[r], std::abs(transport_b0(b, 1.0, s) * s - 1.0));
  }
  EXPECT_LT(err[1], 1e-4);
  EXPECT_GT(err[0] / err[1], 3.5);
  EXPECT_LT(err[0] / err[1], 4.5);
}

TEST(Transport, VariableDensityRatio) {
  // plane wave along z through rho(z), constant impedance-free geometry:
  // b0 ratio is sqrt(rho cp(start) / rho cp(end))
  ElasticMedium m = presets::homogeneous(1.0, 0.5, 1.0);
  auto& reg = m.regions[0];
  reg.rho = AnalyticField::exp(AnalyticField::affine(0.0, Vec3(0.0, 0.0, 0.3)));
  reg.lambda = AnalyticField::product(reg.rho, AnalyticField::constant(0.5));
  reg.mu = AnalyticField::product(reg.rho, AnalyticField::constant(0.25));
  BundleLaunch L;
  L.direction = Vec3::UnitZ();
  RayBundle b(m, L, 2.0);
  const double expect = std::sqrt(std::exp(-0.3 * b.s_max()));
  EXPECT_NEAR(std::abs(transport_b0(b, 1.0, b.s_max())), expect, 1e-8);
  const auto rep = transport_amplitudes(b, 0.0);
  EXPECT_NEAR(std::abs(rep.states.back().b0), expect, 1e-8);
}

TEST(Transport, PerpendicularCorrectionMatchesAngularGradient) {
  const double cp = 2.0, alpha = 0.5, s_ref = 1.0;
  const auto m = presets::homogeneous(cp, 1.0, 1.5);
  RayBundle b(m, point_source(s_ref, alpha), 3.0);
  const auto rep = transport_amplitudes(b, 0.0);
  const Vec3 e_theta = any_orthogonal(Vec3::UnitX());
  EXPECT_LT(rep.max_h_projection, 1e-12);
  for (const auto& st : rep.states) {
    const CVec3 expect = -I_unit * cp * alpha * s_ref / (st.s * st.s) * to_complex(e_theta);
    EXPECT_LE((st.h_minus1 - expect).norm(), 1e-6 * expect.norm()) << "s = " << st.s;
  }
  RayBundle uniform(m, point_source(s_ref), 3.0);
  for (const auto& st : transport_amplitudes(uniform, 0.0).states) EXPECT_LE(st.h_minus1.norm(), 1e-8);
}

TEST(Transport, PointSourceLowerOrderAmplitudeClosedForm) {
  const double cp = 2.0, s_ref = 1.0;
  const auto m = presets::homogeneous(cp, 1.0, 1.5);
  RayBundle b(m, point_source(s_ref), 3.0);
  const auto rep = transport_amplitudes(b, 0.0);
  for (const auto& st : rep.states) {
    const cplx expect = I_unit * cp * s_ref * (1.0 / st.s - 1.0 / s_ref) / st.s;
    EXPECT_LE(std::abs(st.a_minus1 - expect), 1e-4) << "s = " << st.s;
    EXPECT_LE(std::abs(st.G + I_unit * cp * s_ref / std::pow(st.s, 3)), 5e-4 * cp * s_ref / std::pow(st.s, 3)) << "s = " << st.s;
  }
}

TEST(Transport, SmoothHeterogeneousDefectAndRoutes) {
  const auto m = presets::radial_bump();
  TransportReport rep[2];
  for (int r = 0; r < 2; ++r) {
    RayBundle b(m, bump_launch(), 5.0, spacing(r == 0 ? 2e-3 : 1e-3));
    rep[r] = transport_amplitudes(b, cplx(0.1, -0.05));
  }
  EXPECT_LT(rep[1].defect_residual, 1e-4);
  EXPECT_GT(rep[0].defect_residual / rep[1].defect_residual, 2.0);
  EXPECT_LT(rep[1].route_mismatch, 1e-6);
  EXPECT_LT(rep[1].compatibility_residual, 1e-4);
  EXPECT_GT(rep[0].compatibility_residual / rep[1].compatibility_residual, 3.0);
  EXPECT_LT(rep[1].max_h_projection, 1e-12);
}

TEST(Transport, LinearInInitialData) {
  const auto m = presets::radial_bump();
  BundleLaunch L = bump_launch();
  RayBundle b1(m, L, 3.0);
  L.b0 = cplx(2.0, -1.0);
  RayBundle b2(m, L, 3.0);
  const auto r1 = transport_amplitudes(b1, 0.3);
  const auto r2 = transport_amplitudes(b2, cplx(2.0, -1.0) * 0.3);
  for (std::size_t k = 0; k < r1.states.size(); ++k) {
    EXPECT_LE(std::abs(r2.states[k].b0 - cplx(2.0, -1.0) * r1.states[k].b0), 1e-12);
    EXPECT_LE(std::abs(r2.states[k].a_minus1 - cplx(2.0, -1.0) * r1.states[k].a_minus1), 1e-10);
  }
}

TEST(Transport, Errors) {
  const auto m = presets::homogeneous(2.0, 1.0, 1.5);
  BundleLaunch L;
  L.b0 = 0.0;
  RayBundle b(m, L, 1.0);
  try {
    transport_amplitudes(b, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroLeadingAmplitude);
  }
  const auto two = presets::two_halfspaces(presets::params_from_speeds(1.0, 0.5, 1.0),
                                           presets::params_from_speeds(2.0, 0.9, 1.3));
  BundleLaunch D;
  D.x0 = Vec3(0.0, 0.0, -0.5);
  D.direction = Vec3(0.2, 0.0, 1.0);
  try {
    RayBundle crossing(two, D, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BundleBroken);
  }
  try {
    RayBundle bad(m, point_source(0.0), 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(InterfaceAmplitudes, IdenticalMediaAndNormalIncidence) {
  TransportState in;
  in.b0 = cplx(0.8, 0.1);
  in.a_minus1 = cplx(-0.2, 0.3);
  const Params p = presets::params_from_speeds(2.0, 1.0, 1.5);
  const auto same = rt_matrices(p, p, Vec3::UnitZ(), 1.0, Vec3(0.1, 0.0, 0.0), -1);
  const auto t = apply_interface_amplitudes(in, same, BranchKind::Transmit, Mode::P);
  EXPECT_LE(std::abs(t.b0 - in.b0), 1e-12);
  EXPECT_LE(std::abs(t.a_minus1 - in.a_minus1), 1e-12);
  const auto r = apply_interface_amplitudes(in, same, BranchKind::Reflect, Mode::P);
  EXPECT_LE(std::abs(r.b0), 1e-12);

  const Params a = presets::params_from_speeds(1.0, 0.5, 1.0);
  const Params b = presets::params_from_speeds(2.0, 1.1, 2.5);
  const double Z1 = 1.0, Z2 = 5.0;
  const auto rt = rt_matrices(a, b, Vec3::UnitZ(), 1.0, Vec3::Zero(), -1);
  const auto tn = apply_interface_amplitudes(in, rt, BranchKind::Transmit, Mode::P);
  EXPECT_LE(std::abs(tn.b0 - 2 * Z1 / (Z1 + Z2) * in.b0), 1e-12);
  EXPECT_LE(std::abs(tn.mode_amplitudes[1]) + std::abs(tn.mode_amplitudes[2]), 1e-12);
  const auto rn = apply_interface_amplitudes(in, rt, BranchKind::Reflect, Mode::P);
  EXPECT_LE(std::abs(std::abs(rn.b0) - std::abs((Z1 - Z2) / (Z1 + Z2) * in.b0)), 1e-12);
}

TEST(Packet, HomogeneousTranslationAndTwoTermAmplitude) {
  const auto m = presets::homogeneous(2.0, 1.0, 1.5);
  PacketSpec spec;
  spec.launch.direction = Vec3(1.0, 1.0, 0.0);
  spec.a_minus1 = 0.3;
  spec.omega = 40.0;
  const auto lead = propagate_packet(m, spec, PacketOrder::Leading, 1.0);
  EXPECT_LE((lead.center - 2.0 * Vec3(1.0, 1.0, 0.0).normalized()).norm(), 1e-9);
  EXPECT_NEAR(lead.s, 2.0, 1e-9);
  EXPECT_LE(std::abs(lead.b0 - 1.0), 1e-9);
  const auto two = propagate_packet(m, spec, PacketOrder::TwoTerm, 1.0);
  EXPECT_LE((two.center_value - (1.0 + 0.3 / 40.0) * to_complex(two.N)).norm(), 1e-7);
  std::size_t mid = two.points.size() / 2;
  EXPECT_LE((two.points[mid] - two.center).norm(), 1e-12);
  EXPECT_LE((two.values[mid] - two.center_value).norm(), 1e-12);
}
