#include <gtest/gtest.h>

#include <random>

#include "elastoray/interface_ops.hpp"
#include "elastoray/presets.hpp"

using namespace elastoray;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> G(0.0, 1.0);
  return Vec3(G(rng), G(rng), G(rng)).normalized();
}

}  // namespace

TEST(Symbols, PrincipalSymbolHandValue) {
  const Mat3 p = principal_symbol(1.0, std::sqrt(3.0), 1.0, 0.0, Vec3(Vec3::UnitX()));
  EXPECT_LE((p - Vec3(3, 1, 1).asDiagonal().toDenseMatrix()).norm(), 1e-14);
}

TEST(Symbols, CharacteristicKernels) {
  const Vec3 xi(0.3, -0.4, 0.5);
  const double cp = 2.0, cs = 1.1, rho = 1.7;
  const Mat3 pP = principal_symbol(rho, cp, cs, cp * xi.norm(), xi);
  EXPECT_LE((pP * xi).norm(), 1e-14);
  const Mat3 pS = principal_symbol(rho, cp, cs, cs * xi.norm(), xi);
  EXPECT_LE((pS * xi.cross(Vec3::UnitZ())).norm(), 1e-14);
  EXPECT_LE((pS - pS.transpose()).norm(), 1e-15);
}

TEST(Symbols, DeterminantAndEigen) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.2, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const double rho = U(rng), cs = U(rng), cp = cs * (1.0 + U(rng)), tau = U(rng);
    const Vec3 xi = U(rng) * random_unit(rng);
    const Mat3 p = principal_symbol(rho, cp, cs, tau, xi);
    const double x2 = xi.squaredNorm();
    const double det = -rho * rho * rho * (tau * tau - cp * cp * x2) * std::pow(tau * tau - cs * cs * x2, 2);
    EXPECT_LE(std::abs(p.determinant() - det), 1e-10 * std::max(1.0, std::abs(det)));
    const auto pr = mode_projectors(rho, cp, cs, tau, xi);
    EXPECT_LE((pr.P + pr.S - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((pr.P * pr.P - pr.P).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((pr.S * pr.S - pr.S).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((pr.P * pr.S).cwiseAbs().maxCoeff(), 1e-12);
    const double sc = std::max(1.0, p.cwiseAbs().maxCoeff());
    const Mat3 D = pr.V * p * pr.V.transpose();
    EXPECT_LE((D - Mat3(pr.eigenvalues.asDiagonal())).cwiseAbs().maxCoeff(), 1e-12 * sc);
    EXPECT_LE((pr.P * p - pr.eigenvalues(0) * pr.P).cwiseAbs().maxCoeff(), 1e-12 * sc);
    // independent numerical eigen-solve
    Eigen::SelfAdjointEigenSolver<Mat3> es(p);
    Vec3 ev = es.eigenvalues();
    Vec3 expect = pr.eigenvalues;
    std::sort(expect.data(), expect.data() + 3);
    EXPECT_LE((ev - expect).cwiseAbs().maxCoeff(), 1e-12 * sc);
  }
  const auto e1 = mode_projectors(1, 2, 1, 1, Vec3::UnitX());
  EXPECT_LE((e1.P - Vec3(1, 0, 0).asDiagonal().toDenseMatrix()).norm(), 1e-15);
}

TEST(Symbols, Subprincipal) {
  EXPECT_EQ(subprincipal_symbol(Vec3::Zero(), Vec3::Zero(), Vec3(1, 2, 3)), CMat3::Zero());
  const CMat3 s = subprincipal_symbol(Vec3::UnitZ(), Vec3::Zero(), Vec3::UnitX());
  CMat3 e = CMat3::Zero();
  e(2, 0) = -I_unit;
  EXPECT_LE((s - e).norm(), 1e-15);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> G(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vec3 gl(G(rng), G(rng), G(rng)), gm(G(rng), G(rng), G(rng)), xi(G(rng), G(rng), G(rng));
    const CMat3 m = subprincipal_symbol(gl, gm, xi);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double v = gl(i) * xi(j) + (i == j ? gm.dot(xi) : 0.0) + xi(i) * gm(j);
        EXPECT_LE(std::abs(m(i, j) - cplx(0.0, -v)), 1e-15 * std::max(1.0, std::abs(v)));
      }
  }
}

TEST(Symbols, PolarizationBasisOrthonormal) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    const auto b = polarization_basis(2.0 * random_unit(rng), random_unit(rng));
    const Mat3 V = b.as_rows();
    EXPECT_LE((V * V.transpose() - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(V.determinant(), 1.0, 1e-12);
  }
}

TEST(Traction, HandExpansions) {
  const double lam = 1.3, mu = 0.7;
  const Vec3 e3 = Vec3::UnitZ();
  EXPECT_LE((traction_symbol(lam, mu, e3, to_complex(e3), to_complex(e3)) - I_unit * (lam + 2 * mu) * to_complex(e3))
                .norm(),
            1e-15);
  EXPECT_LE((traction_symbol(lam, mu, e3, to_complex(Vec3::UnitX()), to_complex(e3)) -
             I_unit * mu * to_complex(Vec3::UnitX()))
                .norm(),
            1e-15);
  EXPECT_LE(traction_symbol(lam, mu, e3, to_complex(Vec3::UnitX()), to_complex(Vec3::UnitY())).norm(), 1e-15);
}

TEST(Interface, IdenticalMedia) {
  const Params p = presets::params_from_speeds(2.0, 1.0, 1.5);
  const auto m = rt_matrices(p, p, Vec3::UnitZ(), 1.0, Vec3(0.2, 0.1, 0.0), -1);
  EXPECT_LE(m.M_R.norm(), 1e-12);
  EXPECT_LE((m.M_T - CMat3::Identity()).norm(), 1e-12);
  EXPECT_LE(energy_flux_check(*m.columns[0]), 1e-12);
}

TEST(Interface, NormalIncidenceImpedance) {
  const Params a = presets::params_from_speeds(1.0, 0.5, 1.0);
  const Params b = presets::params_from_speeds(2.0, 1.1, 2.5);
  const double Z1 = 1.0, Z2 = 2.5 * 2.0;
  const auto s = solve_interface_system(a, b, Vec3::UnitZ(), 1.0, Vec3::Zero(), Pol::P, -1);
  const CVec3 nu = to_complex(Vec3::UnitZ());
  EXPECT_LE((s.reflected_displacement() - (Z1 - Z2) / (Z1 + Z2) * nu).norm(), 1e-12);
  EXPECT_LE((s.transmitted_displacement() - 2 * Z1 / (Z1 + Z2) * nu).norm(), 1e-12);
  EXPECT_LE(std::abs(s.reflected[1].amplitude) + std::abs(s.reflected[2].amplitude), 1e-12);
  EXPECT_LE(std::abs(s.transmitted[1].amplitude) + std::abs(s.transmitted[2].amplitude), 1e-12);
  EXPECT_LE(energy_flux_check(s), 1e-12);
  EXPECT_LE(s.residual, 1e-12);
}

TEST(Interface, RandomSubcriticalFluxAndResidual) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int done = 0;
  while (done < 1000) {
    const double cp1 = 0.5 + 2 * U(rng), cs1 = cp1 * (0.3 + 0.35 * U(rng));
    const double cp2 = 0.5 + 2 * U(rng), cs2 = cp2 * (0.3 + 0.35 * U(rng));
    const Params a = presets::params_from_speeds(cp1, cs1, 0.5 + 2 * U(rng));
    const Params b = presets::params_from_speeds(cp2, cs2, 0.5 + 2 * U(rng));
    const double cmax = std::max({cp1, cp2});
    const Vec3 nu = random_unit(rng);
    const Vec3 t = any_orthogonal(nu);
    const double p = 0.95 * U(rng) / cmax;  // below every critical slowness
    const Pol pol = static_cast<Pol>(done % 3);
    const auto s = solve_interface_system(a, b, nu, 1.0, p * t, pol, done % 2 ? +1 : -1);
    ASSERT_TRUE(s.all_propagating());
    EXPECT_LT(energy_flux_check(s), 1e-10);
    EXPECT_LT(s.residual, 1e-10);
    ++done;
  }
}

TEST(Interface, PostCriticalUsesDecayingBranches) {
  const Params a = presets::params_from_speeds(1.0, 0.5, 1.0);
  const Params b = presets::params_from_speeds(2.0, 0.9, 1.3);
  const Vec3 nu = Vec3::UnitZ();
  const double p = std::sin(0.7) / 1.0;  // beyond the P critical angle of 30 degrees
  const auto s = solve_interface_system(a, b, nu, 1.0, p * Vec3::UnitX(), Pol::P, -1);
  ASSERT_TRUE(s.transmitted[0].evanescent);
  // transmitted side is z > 0: exp(i z xi_z) must decay
  EXPECT_GT(s.transmitted[0].normal_slowness.imag(), 0.0);
  EXPECT_LT(s.residual, 1e-10);
  EXPECT_LT(energy_flux_check(s), 1e-10);
}

TEST(Interface, SwappedSides) {
  const Params a = presets::params_from_speeds(1.0, 0.5, 1.0);
  const Params b = presets::params_from_speeds(1.7, 0.8, 2.0);
  const Vec3 nu = Vec3(0.2, 0.1, 1.0).normalized();
  const Vec3 xt = 0.3 * any_orthogonal(nu);
  const auto s1 = solve_interface_system(a, b, nu, 1.0, xt, Pol::P, -1);
  const auto s2 = solve_interface_system(b, a, -nu, 1.0, xt, Pol::P, +1);
  EXPECT_LT(s2.residual, 1e-10);
  EXPECT_LE((s1.transmitted_displacement() - s2.transmitted_displacement()).norm(), 1e-10);
  EXPECT_LE((s1.reflected_displacement() - s2.reflected_displacement()).norm(), 1e-10);
}

TEST(Interface, GlancingRejected) {
  const Params a = presets::params_from_speeds(1.0, 0.5, 1.0);
  try {
    solve_interface_system(a, a, Vec3::UnitZ(), 1.0, Vec3(0.9999999, 0, 0), Pol::P, -1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GlancingRay);
  }
}
