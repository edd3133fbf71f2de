#include <gtest/gtest.h>

#include <random>

#include "elastoray/presets.hpp"

using namespace elastoray;

namespace {

std::vector<AnalyticField> sample_fields() {
  return {AnalyticField::constant(2.0),
          AnalyticField::affine(1.0, Vec3(0.3, -0.2, 0.5)),
          AnalyticField::gaussian(Vec3(0.1, 0.2, -0.3), 0.7, 0.9),
          AnalyticField::radial(Vec3(0.5, 0.5, 0.5), {1.0, 0.0, 0.4, 0.1}),
          AnalyticField::axial(Vec3::Zero(), Vec3(1, 2, 2), {1.0, 0.2, 0.04}),
          AnalyticField::compact_bump(Vec3::Zero(), 0.5, 2.5),
          AnalyticField::exp(AnalyticField::affine(0.1, Vec3(0.2, 0.1, -0.3))) *
              AnalyticField::gaussian(Vec3::Zero(), 1.0, 1.3)};
}

}  // namespace

TEST(AnalyticField, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  const double h = 1e-4;
  for (const auto& f : sample_fields()) {
    for (int k = 0; k < 100; ++k) {
      const Vec3 x(U(rng), U(rng), U(rng));
      const Jet j = f.jet(x);
      for (int a = 0; a < 3; ++a) {
        const Vec3 e = h * Vec3::Unit(a);
        const double fd = (f.value(x + e) - f.value(x - e)) / (2 * h);
        EXPECT_LE(std::abs(fd - j.grad(a)), 1e-5 * std::max(1.0, std::abs(j.grad(a))));
        const Vec3 gd = (f.gradient(x + e) - f.gradient(x - e)) / (2 * h);
        for (int b = 0; b < 3; ++b)
          EXPECT_LE(std::abs(gd(b) - j.hess(b, a)), 1e-5 * std::max(1.0, std::abs(j.hess(b, a))));
      }
      EXPECT_LE((j.hess - j.hess.transpose()).norm(), 1e-12);
    }
  }
}

TEST(AnalyticField, GaussianBumpOnConstant) {
  const auto rho = AnalyticField::constant(1.0) + AnalyticField::gaussian(Vec3::Zero(), 0.5, 1.0);
  EXPECT_DOUBLE_EQ(rho.value(Vec3::Zero()), 1.0 + 0.5 * std::exp(0.0));
}

TEST(Medium, EvalParamsSingleRegion) {
  const auto m = ElasticMedium::homogeneous(1, 1, 1);
  const Params p = m.eval_params(Vec3(0.3, 2, -1));
  EXPECT_EQ(p.lambda, 1.0);
  EXPECT_EQ(p.mu, 1.0);
  EXPECT_EQ(p.rho, 1.0);
}

TEST(Medium, EvalParamsHalfSpaces) {
  const auto m = presets::two_halfspaces(Params{2, 1, 1}, Params{1, 1, 1});
  EXPECT_EQ(m.eval_params(Vec3(0, 0, 1)).lambda, 1.0);
  EXPECT_EQ(m.eval_params(Vec3(0, 0, -1)).lambda, 2.0);
  EXPECT_EQ(m.eval_params(Vec3::Zero(), SideHint{0, -1}).lambda, 2.0);
  try {
    m.eval_params(Vec3::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OnInterfaceWithoutHint);
  }
}

TEST(Medium, OutsideAllRegions) {
  auto m = presets::two_halfspaces(Params{2, 1, 1}, Params{1, 1, 1});
  m.regions.pop_back();
  try {
    m.eval_params(Vec3(0, 0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutsideAllRegions);
  }
}

TEST(Medium, WaveSpeeds) {
  const auto s = ElasticMedium::homogeneous(1, 1, 1).wave_speeds(Vec3::Zero());
  EXPECT_NEAR(s.cp, std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(s.cs, 1.0, 1e-15);
  const auto d = ElasticMedium::homogeneous(4, 2, 3).wave_speeds(Vec3::Zero());
  EXPECT_NEAR(d.cp, 2.0 * d.cs, 1e-15);
  const auto o = ElasticMedium::homogeneous(3, 1, 2).wave_speeds(Vec3::Zero());
  EXPECT_NEAR(o.cp, std::sqrt(2.5), 1e-15);
  EXPECT_NEAR(o.cs, std::sqrt(0.5), 1e-15);
}

TEST(Medium, NonPhysical) {
  try {
    ElasticMedium::homogeneous(1, -1, 1).wave_speeds(Vec3::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPhysical);
    EXPECT_NE(std::string(e.what()).find("mu>0 and 3lambda+2mu>0"), std::string::npos);
  }
}

TEST(Medium, SpeedIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.1, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const Params p{U(rng), U(rng), U(rng)};
    EXPECT_NEAR(p.cp() * p.cp() - p.cs() * p.cs(), (p.lambda + p.mu) / p.rho,
                1e-12 * std::max(1.0, (p.lambda + p.mu) / p.rho));
  }
}

TEST(Medium, GradLogSpeed) {
  EXPECT_EQ(ElasticMedium::homogeneous(1, 1, 1).grad_log_speed(Vec3::Zero(), Mode::P), Vec3::Zero());
  ElasticMedium m;
  const auto mu = AnalyticField::axial(Vec3::Zero(), Vec3::UnitZ(), {1.0, 2.0, 1.0});
  m.regions.push_back(Region{"r", {}, mu, mu, AnalyticField::constant(1.0)});
  EXPECT_LE((m.grad_log_speed(Vec3::Zero(), Mode::S) - Vec3::UnitZ()).norm(), 1e-14);

  const auto b = presets::radial_bump();
  const double h = 1e-5;
  for (Mode md : {Mode::P, Mode::S}) {
    const Vec3 x(0.4, -0.3, 0.7);
    const Vec3 g = b.grad_log_speed(x, md);
    for (int a = 0; a < 3; ++a) {
      const Vec3 e = h * Vec3::Unit(a);
      const double fd =
          (std::log(b.wave_speeds(x + e).of(md)) - std::log(b.wave_speeds(x - e).of(md))) / (2 * h);
      EXPECT_NEAR(fd, g(a), 1e-6);
    }
  }
}

TEST(Medium, InterfaceCrossing) {
  const auto m = presets::two_halfspaces(Params{2, 1, 1}, Params{1, 1, 1});
  const auto c = m.interface_crossing(Vec3(0, 0, 1), Vec3(0, 0, -1));
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->fraction, 0.5, 1e-12);
  EXPECT_LE(c->point.norm(), 1e-12);

  ElasticMedium s;
  s.interfaces.push_back(Interface{shape::Sphere{Vec3::Zero(), 1.0}, "sphere"});
  const auto cs = s.interface_crossing(Vec3(2, 0, 0), Vec3::Zero());
  ASSERT_TRUE(cs);
  EXPECT_NEAR(cs->fraction, 0.5, 1e-12);
  EXPECT_LE((cs->point - Vec3(1, 0, 0)).norm(), 1e-12);
  const auto back = s.interface_crossing(Vec3::Zero(), Vec3(2, 0, 0));
  ASSERT_TRUE(back);
  EXPECT_LE((back->point - cs->point).norm(), 1e-10);

  ElasticMedium l;
  l.interfaces.push_back(
      Interface{shape::LevelSet{AnalyticField::gaussian(Vec3::Zero(), 1.0, 1.0), 0.5}, "level"});
  const auto cl = l.interface_crossing(Vec3::Zero(), Vec3(3, 1, 0));
  ASSERT_TRUE(cl);
  EXPECT_LT(std::abs(l.interfaces[0].implicit(cl->point)), 1e-10);
  EXPECT_FALSE(m.interface_crossing(Vec3(0, 0, 1), Vec3(0, 0, 2)));
}

TEST(Medium, Foliation) {
  auto m = ElasticMedium::homogeneous(1, 1, 1);
  try {
    m.foliation_value(Vec3::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoFoliation);
  }
  m.foliation = AnalyticField::affine(0.0, Vec3::UnitZ());
  EXPECT_EQ(m.foliation_value(Vec3(1, 2, 3)), 3.0);
}

TEST(Medium, EllipticityDenominatorPositive) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.05, 5.0);
  for (int k = 0; k < 100000; ++k) {
    const double cs = U(rng), cp = cs * (1.0 + U(rng));
    const double den = cp * cp * cp * cp - 5 * cp * cp * cs * cs + 8 * cs * cs * cs * cs;
    EXPECT_GE(den, 1.75 * cs * cs * cs * cs * (1 - 1e-12));
  }
}

TEST(Medium, ValidateDetectsViolations) {
  const auto good = presets::radial_bump();
  EXPECT_TRUE(good.validate(2000, 5).empty());
  auto bad = good;
  bad.regions[0].mu = AnalyticField::affine(0.0, Vec3::UnitX());
  const auto issues = bad.validate(2000, 5);
  ASSERT_FALSE(issues.empty());
  EXPECT_NE(issues[0].what.find("mu>0"), std::string::npos);
}
