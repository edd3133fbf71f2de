#include <gtest/gtest.h>

#include <random>

#include "elastoray/presets.hpp"
#include "elastoray/tomography.hpp"

using namespace elastoray;

namespace {

VectorField random_compact_field(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto comp = [&] {
    return AnalyticField::compact_bump(Vec3(U(rng), U(rng), U(rng)), U(rng), 1.5 + 0.5 * U(rng)) +
           AnalyticField::gaussian(Vec3(U(rng), U(rng), U(rng)), 0.5 * U(rng), 0.8);
  };
  return VectorField{comp(), comp(), comp()};
}

double boundary_term(const VectorField& v, const BrokenRay& ray) {
  double acc = 0.0;
  for (const auto& seg : ray.segments) {
    const PhasePoint a = seg.start(), b = seg.end();
    acc += v.value(b.x).dot(b.xi) - v.value(a.x).dot(a.xi);
  }
  return acc;
}

}  // namespace

TEST(SymmetrizedGradient, HandCases) {
  const Vec3 x(0.3, -0.7, 1.1);
  const VectorField c{AnalyticField::constant(1.0), AnalyticField::constant(-2.0), AnalyticField::constant(0.5)};
  EXPECT_EQ(symmetrized_gradient_tensor(c).value(x), Mat3::Zero());
  const VectorField id{AnalyticField::affine(0.0, Vec3::UnitX()), AnalyticField::affine(0.0, Vec3::UnitY()),
                       AnalyticField::affine(0.0, Vec3::UnitZ())};
  EXPECT_EQ(symmetrized_gradient_tensor(id).value(x), Mat3::Identity());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> G(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Mat3 M;
    for (int i = 0; i < 9; ++i) M(i) = G(rng);
    const VectorField v{AnalyticField::affine(G(rng), M.row(0).transpose()), AnalyticField::affine(G(rng), M.row(1).transpose()),
                        AnalyticField::affine(G(rng), M.row(2).transpose())};
    const Mat3 S = symmetrized_gradient_tensor(v).value(Vec3(G(rng), G(rng), G(rng)));
    EXPECT_LE((S - 0.5 * (M + M.transpose())).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(S, S.transpose());
  }
}

TEST(RayTransform, TrivialCases) {
  const auto m = presets::homogeneous(2.0, 1.0);
  const PhasePoint start = on_shell(m, Vec3::Zero(), Vec3(1.0, 2.0, -0.5), Mode::P);
  const BrokenRay ray = trace_broken_ray(m, start, BranchPolicy::transmitted(), 4, 3.0);
  EXPECT_EQ(ray_transform_2tensor(m, ray, TensorField2()), 0.0);
  const auto A = TensorField2::scalar_identity(AnalyticField::constant(2.0));
  EXPECT_NEAR(ray_transform_2tensor(m, ray, A), 3.0, 1e-10);
}

TEST(RayTransform, GaugeIdentitySmoothMedium) {
  const auto m = presets::radial_bump();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::normal_distribution<double> G(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const VectorField v = random_compact_field(rng);
    const Vec3 x0(1.5 * U(rng), 1.5 * U(rng), 1.5 * U(rng));
    const PhasePoint start = on_shell(m, x0, Vec3(G(rng), G(rng), G(rng)), Mode::P);
    const BrokenRay ray = trace_broken_ray(m, start, BranchPolicy::transmitted(), 4, 2.0 + 2.0 * (U(rng) + 1.0));
    const double I = ray_transform_2tensor(m, ray, potential_tensor(m, v));
    worst = std::max(worst, std::abs(I - boundary_term(v, ray)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(RayTransform, GaugeIdentityHomogeneousUsesSymmetrizedGradient) {
  const double cp = 1.7;
  const auto m = presets::homogeneous(cp, 1.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> G(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const VectorField v = random_compact_field(rng);
    const Vec3 d = Vec3(G(rng), G(rng), G(rng)).normalized();
    const Vec3 x0 = -1.5 * d;
    const BrokenRay ray = trace_broken_ray(m, on_shell(m, x0, d, Mode::P), BranchPolicy::transmitted(), 4, 3.0);
    const double I = ray_transform_2tensor(m, ray, symmetrized_gradient_tensor(v));
    const Vec3 x1 = ray.end().x;
    EXPECT_NEAR(I, (v.value(x1).dot(d) - v.value(x0).dot(d)) / cp, 1e-8);
  }
}

TEST(RayTransform, GaugeIdentityAcrossInterface) {
  const auto m = presets::two_halfspaces(presets::params_from_speeds(1.0, 0.5, 1.0),
                                         presets::params_from_speeds(1.4, 0.7, 1.2));
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const VectorField v = random_compact_field(rng);
    const PhasePoint start = on_shell(m, Vec3(-0.5, 0.1, -1.0), Vec3(0.3, 0.1 * t, 1.0), Mode::P);
    const BrokenRay ray = trace_broken_ray(m, start, BranchPolicy::transmitted(), 4, 3.0);
    ASSERT_EQ(ray.events.size(), 1u);
    const double I = ray_transform_2tensor(m, ray, potential_tensor(m, v));
    EXPECT_NEAR(I, boundary_term(v, ray), 1e-6);
  }
}

TEST(RayTransform, Linearity) {
  const auto m = presets::radial_bump();
  std::mt19937_64 rng(23);
  const auto A = potential_tensor(m, random_compact_field(rng));
  const auto B = TensorField2::from_entries({AnalyticField::gaussian(Vec3::Zero(), 1.0, 1.0), AnalyticField::constant(0.2),
                                             AnalyticField::constant(0.0), AnalyticField::affine(1.0, Vec3(0.1, 0, 0)),
                                             AnalyticField::constant(-0.3), AnalyticField::constant(0.7)});
  const BrokenRay ray =
      trace_broken_ray(m, on_shell(m, Vec3(-1.0, 0.2, 0.0), Vec3(1.0, 0.3, 0.1), Mode::P), BranchPolicy::transmitted(), 4, 3.0);
  const double a = 1.3, b = -0.4;
  const double lhs = ray_transform_2tensor(m, ray, a * A + b * B);
  const double rhs = a * ray_transform_2tensor(m, ray, A) + b * ray_transform_2tensor(m, ray, B);
  EXPECT_NEAR(lhs, rhs, 1e-9);
}

TEST(Ellipticity, HandValuesAndSignChange) {
  EXPECT_EQ(ellipticity_factor(Params{2.0, 1.0, 1.0}), 0.0);
  EXPECT_NEAR(ellipticity_factor(Params{1.0, 1.0, 3.0}), -1.0, 1e-15);
  EXPECT_NEAR(ellipticity_factor(presets::params_from_speeds(100.0, 1.0, 1.0)), 1.0, 1e-3);
  EXPECT_GT(ellipticity_factor(presets::params_from_speeds(1000.0, 1.0, 1.0)),
            ellipticity_factor(presets::params_from_speeds(100.0, 1.0, 1.0)));

  ElasticMedium m2 = ElasticMedium::homogeneous(2.0, 1.0, 1.0);
  for (const auto& e : ellipticity_map(m2, Grid3{})) {
    EXPECT_EQ(e.factor, 0.0);
    EXPECT_TRUE(e.in_D);
  }
  const auto ramp = presets::lambda_ramp();
  Grid3 g{Vec3(-0.5, 0.0, 0.0), Vec3(0.5, 0.0, 0.0), {11, 1, 1}};
  const auto map = ellipticity_map(ramp, g);
  EXPECT_LT(map.front().factor, 0.0);
  EXPECT_GT(map.back().factor, 0.0);
  EXPECT_EQ(map[5].factor, 0.0);
  EXPECT_TRUE(map[5].in_D);
}

TEST(Ellipticity, DenominatorBound) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 1e300;
  for (int t = 0; t < 100000; ++t) {
    const double cs = 0.1 + 3.0 * U(rng);
    const double cp = cs * (std::sqrt(4.0 / 3.0) + 5.0 * U(rng));  // 3 lambda + 2 mu > 0
    const double den = std::pow(cp, 4) - 5 * cp * cp * cs * cs + 8 * std::pow(cs, 4);
    worst = std::min(worst, den / std::pow(cs, 4));
  }
  EXPECT_GE(worst, 7.0 / 4.0 - 1e-12);
}

TEST(DensityPDE, ExactAndConstantRatio) {
  ElasticMedium m = presets::radial_bump();
  Grid3 g{Vec3::Constant(-1.0), Vec3::Constant(1.0), {9, 9, 9}};
  const auto same = pde_residual(m, m.regions[0].rho, g);
  EXPECT_TRUE(same.exact_zero);
  EXPECT_EQ(same.sup_norm, 0.0);
  EXPECT_EQ(same.points.size(), 125u);
  const auto scaled = pde_residual(m, AnalyticField::product(AnalyticField::constant(2.5), m.regions[0].rho), g);
  EXPECT_LT(scaled.sup_norm, 1e-10);
  ElasticMedium c = presets::homogeneous(2.5, 1.0, 1.3);
  EXPECT_EQ(pde_residual(c, AnalyticField::constant(0.4), g).sup_norm, 0.0);
}

TEST(DensityPDE, HarmonicGaugeConstruction) {
  // rho depends on z only and h is linear in (x, y): grad log(rho rho~) . grad h
  // is constant and Delta^2 h = 0.
  ElasticMedium m = presets::radial_bump();
  const auto rho = AnalyticField::axial(Vec3::Zero(), Vec3::UnitZ(), {1.0, 0.3, 0.1});
  m.regions[0].rho = rho;
  const auto rho_t = AnalyticField::product(rho, AnalyticField::exp(AnalyticField::affine(0.0, Vec3(0.2, -0.1, 0.0))));
  Grid3 g{Vec3::Constant(-1.0), Vec3::Constant(1.0), {11, 11, 11}};
  EXPECT_LT(pde_residual(m, rho_t, g).sup_norm, 1e-8);
}

TEST(DensityPDE, PolynomialOracle) {
  // rho = 1, rho~ = exp(-h), h = a x^2 + b y^2 + x^4:
  // residual = F * 24 + Delta(|grad h|^2)
  const double a = 0.3, b = -0.2;
  ElasticMedium m = ElasticMedium::homogeneous(1.0, 1.0, 1.0);  // F = -1
  const auto h = AnalyticField::axial(Vec3::Zero(), Vec3::UnitX(), {0.0, 0.0, a, 0.0, 1.0}) +
                 AnalyticField::axial(Vec3::Zero(), Vec3::UnitY(), {0.0, 0.0, b});
  const auto rho_t = AnalyticField::exp(AnalyticField::product(AnalyticField::constant(-1.0), h));
  Grid3 g{Vec3::Constant(-0.5), Vec3::Constant(0.5), {41, 41, 5}};
  const auto rep = pde_residual(m, rho_t, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    const double x = rep.points[i](0);
    // |grad h|^2 = (2 a x + 4 x^3)^2 + (2 b y)^2
    const double lap = 8 * a * a + 192 * a * x * x + 480 * std::pow(x, 4) + 8 * b * b;
    const double expect = -24.0 + lap;
    worst = std::max(worst, std::abs(rep.residual[i] - expect));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(DensityPDE, NearDRaised) {
  const auto ramp = presets::lambda_ramp();
  Grid3 g{Vec3(-0.2, -0.2, -0.2), Vec3(0.2, 0.2, 0.2), {9, 5, 5}};
  try {
    pde_residual(ramp, AnalyticField::gaussian(Vec3::Zero(), 1.0, 1.0) + AnalyticField::constant(1.0), g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NearD);
  }
  PDEOptions opt;
  opt.throw_near_D = false;
  EXPECT_TRUE(pde_residual(ramp, AnalyticField::gaussian(Vec3::Zero(), 1.0, 1.0) + AnalyticField::constant(1.0), g, opt).near_D);
}

TEST(LensMatch, IdenticalAndPerturbed) {
  const auto A = presets::homogeneous_ball();
  const double q = 0.0;
  const auto sweep = sample_level_set_covectors(A, q, 12, 7);
  for (const auto& c : sweep) EXPECT_NEAR(A.foliation->value(c.x), q, 1e-12);
  const auto same = lens_match_check(A, A, sweep, q);
  EXPECT_EQ(same.no_return, 0);
  EXPECT_LT(same.max_time_difference, 1e-8);
  EXPECT_LT(same.max_exit_mismatch, 1e-8);
  EXPECT_LT(same.max_reversal, 1e-8);

  ElasticMedium B = A;
  const auto bump = AnalyticField::constant(1.0) + AnalyticField::gaussian(Vec3::Zero(), 0.0201, 0.3);
  B.regions[0].lambda = AnalyticField::product(B.regions[0].lambda, bump);
  B.regions[0].mu = AnalyticField::product(B.regions[0].mu, bump);
  const auto pert = lens_match_check(A, B, sweep, q);
  EXPECT_GT(pert.max_time_difference, 1e-6);
  EXPECT_LT(pert.max_reversal, 1e-7);
}
