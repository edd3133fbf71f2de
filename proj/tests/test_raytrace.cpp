#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "elastoray/presets.hpp"
#include "elastoray/raytrace.hpp"

using namespace elastoray;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

ElasticMedium snell_pair() {
  return presets::two_halfspaces(presets::params_from_speeds(1.0, 0.5, 1.0),
                                 presets::params_from_speeds(2.0, 0.9, 1.3));
}

PhasePoint oblique_start(const ElasticMedium& m, double theta) {
  const Vec3 dir(std::sin(theta), 0.0, std::cos(theta));
  return on_shell(m, Vec3(-std::sin(theta), 0.0, -std::cos(theta)), dir, Mode::P);
}

double angle_to_normal(const Vec3& xi) { return std::atan2(std::hypot(xi.x(), xi.y()), std::abs(xi.z())); }

}  // namespace

TEST(Raytrace, HomogeneousStraightRay) {
  const auto m = presets::homogeneous(2.0, 1.0);
  PhasePoint p;
  p.xi = Vec3(0.5, 0, 0);
  const auto seg = integrate_segment(m, p, 4.0);
  EXPECT_EQ(seg.termination, Termination::MaxS);
  EXPECT_LE((seg.end().x - Vec3(4, 0, 0)).norm(), 1e-12);
  EXPECT_NEAR(seg.end().t, 2.0, 1e-12);
  EXPECT_LE((seg.end().xi - p.xi).norm(), 1e-14);
}

TEST(Raytrace, StartOffShellRejected) {
  const auto m = presets::homogeneous(2.0, 1.0);
  PhasePoint p;
  p.xi = Vec3(1, 0, 0);
  try {
    integrate_segment(m, p, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CharacteristicViolation);
  }
}

TEST(Raytrace, DepthGradientSelfConvergence) {
  const auto m = presets::depth_gradient(0.2);
  const PhasePoint p = on_shell(m, Vec3::Zero(), Vec3::UnitX(), Mode::S);
  TraceOptions fine;
  fine.ode.abs = fine.ode.rel = 1e-13;
  const auto a = integrate_segment(m, p, 3.0);
  const auto b = integrate_segment(m, p, 3.0, std::nullopt, std::nullopt, fine);
  for (double s = 0.0; s <= 3.0; s += 0.25) EXPECT_LE((a.at(s).x - b.at(s).x).norm(), 1e-8);
  // rays in a linear speed profile are circular arcs centred on c = 0
  const double R = 1.0 / 0.2;
  EXPECT_NEAR((b.end().x - Vec3(0, 0, -R)).norm(), R, 1e-9);
}

TEST(Raytrace, RadialBumpConservation) {
  const auto m = presets::radial_bump();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> G(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const Vec3 x0(G(rng) * 0.5, G(rng) * 0.5, G(rng) * 0.5);
    const PhasePoint p = on_shell(m, x0, Vec3(G(rng), G(rng), G(rng)), k % 2 ? Mode::S : Mode::P);
    const auto seg = integrate_segment(m, p, 10.0);
    EXPECT_LT(seg.max_drift, 1e-9);
  }
}

TEST(Raytrace, TimeReversal) {
  const auto m = presets::radial_bump();
  const PhasePoint p = on_shell(m, Vec3(-1, 0.2, 0.1), Vec3(1, 0.3, -0.2), Mode::P);
  const auto fwd = integrate_segment(m, p, 5.0);
  PhasePoint back = fwd.end();
  back.direction = -1;
  const auto rev = integrate_segment(m, back, 5.0);
  EXPECT_LE((rev.end().x - p.x).norm(), 1e-7);
  EXPECT_LE((rev.end().xi.normalized() - p.xi.normalized()).norm(), 1e-7);
}

TEST(Raytrace, TravelTimeTrapezoid) {
  const auto m = presets::radial_bump();
  const PhasePoint p = on_shell(m, Vec3(-2, 0.5, 0.1), Vec3(1, -0.1, 0.05), Mode::P);
  const auto seg = integrate_segment(m, p, 6.0);
  const int n = 100000;
  const double h = seg.length() / n;
  double t = 0.0;
  double f0 = 1.0 / m.wave_speeds(seg.at(0.0).x).cp;
  for (int k = 1; k <= n; ++k) {
    const double f1 = 1.0 / m.wave_speeds(seg.at(k * h).x).cp;
    t += 0.5 * h * (f0 + f1);
    f0 = f1;
  }
  EXPECT_NEAR(t, seg.end().t - p.t, 1e-8);
}

TEST(Snell, NormalIncidence) {
  const auto m = snell_pair();
  const PhasePoint p = on_shell(m, Vec3(0, 0, -1), Vec3::UnitZ(), Mode::P);
  const auto seg = integrate_segment(m, p, 5.0);
  ASSERT_EQ(seg.termination, Termination::InterfaceHit);
  const auto br = snell_branches(m, seg.end(), 0);
  ASSERT_EQ(br.size(), 4u);
  const Vec3 xi = seg.end().xi;
  for (const auto& b : br) {
    if (b.kind == BranchKind::Reflect && b.mode == Mode::P) {
      EXPECT_LE((b.point.xi - (xi - 2 * xi.dot(Vec3::UnitZ()) * Vec3::UnitZ())).norm(), 1e-12);
    }
    if (b.kind == BranchKind::Transmit && b.mode == Mode::P) {
      EXPECT_LE((b.point.xi - xi * 1.0 / 2.0).norm(), 1e-12);
    }
  }
}

TEST(Snell, TransmittedAngleAndCritical) {
  const auto m = snell_pair();
  for (double deg : {20.0, 29.0, 30.0, 31.0}) {
    const auto seg = integrate_segment(m, oblique_start(m, deg * kDeg), 5.0);
    const auto br = snell_branches(m, seg.end(), 0);
    for (const auto& b : br) {
      if (b.kind != BranchKind::Transmit || b.mode != Mode::P) continue;
      if (deg < 30.0) {
        ASSERT_FALSE(b.evanescent);
        EXPECT_NEAR(angle_to_normal(b.point.xi), std::asin(2.0 * std::sin(deg * kDeg)), 1e-8);
      } else {
        EXPECT_TRUE(b.evanescent);
      }
    }
  }
  const auto seg = integrate_segment(m, oblique_start(m, 20 * kDeg), 5.0);
  for (const auto& b : snell_branches(m, seg.end(), 0))
    if (b.kind == BranchKind::Transmit && b.mode == Mode::P) {
      EXPECT_NEAR(angle_to_normal(b.point.xi) / kDeg, 43.160, 1e-3);
    }
}

TEST(Snell, GlancingRejected) {
  const auto m = snell_pair();
  PhasePoint hit = on_shell(m, Vec3::Zero(), Vec3(1, 0, 1e-4), Mode::P, SideHint{0, -1});
  try {
    snell_branches(m, hit, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GlancingRay);
  }
}

TEST(BrokenRay, NoInterfaces) {
  const auto m = presets::homogeneous(1.0, 0.5);
  const auto r = trace_broken_ray(m, on_shell(m, Vec3::Zero(), Vec3(1, 1, 0), Mode::P), BranchPolicy::transmitted(),
                                  5, 3.0);
  EXPECT_EQ(r.segments.size(), 1u);
  EXPECT_TRUE(r.events.empty());
}

TEST(BrokenRay, PurelyTransmittedPlane) {
  const auto m = snell_pair();
  const double th = 15 * kDeg;
  const auto r = trace_broken_ray(m, oblique_start(m, th), BranchPolicy::transmitted(), 5, 4.0);
  ASSERT_EQ(r.segments.size(), 2u);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].kind, BranchKind::Transmit);
  EXPECT_LT(r.events[0].tangential_jump(), 1e-10 * r.events[0].xi_in.norm());
  const Vec3 chord = r.segments[1].end().x - r.segments[1].start().x;
  EXPECT_NEAR(angle_to_normal(chord), std::asin(2 * std::sin(th)), 1e-8);
}

TEST(BrokenRay, SphereSpecularReflection) {
  ElasticMedium m;
  m.interfaces.push_back(Interface{shape::Sphere{Vec3::Zero(), 1.0}, "sphere"});
  const auto in = presets::params_from_speeds(1.0, 0.5, 1.0);
  const auto out = presets::params_from_speeds(1.5, 0.7, 1.0);
  m.regions.push_back(Region{"inside", {-1}, AnalyticField::constant(in.lambda), AnalyticField::constant(in.mu),
                             AnalyticField::constant(in.rho)});
  m.regions.push_back(Region{"outside", {+1}, AnalyticField::constant(out.lambda), AnalyticField::constant(out.mu),
                             AnalyticField::constant(out.rho)});
  const PhasePoint p = on_shell(m, Vec3(-0.2, 0.1, 0.0), Vec3(1, 0.4, 0.2), Mode::P);
  const auto r = trace_broken_ray(m, p, BranchPolicy::explicit_sequence({{BranchKind::Reflect, Mode::P}}), 1, 3.0);
  ASSERT_EQ(r.events.size(), 1u);
  const Vec3 nu = r.events[0].normal;
  const Vec3 din = (r.segments[0].end().x - r.segments[0].start().x).normalized();
  const Vec3 dout = (r.segments[1].end().x - r.segments[1].start().x).normalized();
  EXPECT_LE((dout - (din - 2 * din.dot(nu) * nu)).norm(), 1e-9);
}

TEST(BrokenRay, PolicyExhaustedWhenEvanescent) {
  const auto m = snell_pair();
  try {
    trace_broken_ray(m, oblique_start(m, 40 * kDeg), BranchPolicy::transmitted(), 3, 4.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PolicyExhausted);
  }
}

TEST(Lens, HomogeneousBall) {
  const auto m = presets::homogeneous_ball();
  const auto d = travel_time_and_lens(m, Vec3(-1, 0, 0), Vec3::UnitX(), Mode::P, 0.0);
  EXPECT_NEAR(d.travel_time, 2.0, 1e-8);
  EXPECT_LE((d.exit.x - Vec3(1, 0, 0)).norm(), 1e-8);
  EXPECT_LE((d.exit.xi.normalized() - Vec3::UnitX()).norm(), 1e-8);
  for (double b : {0.1, 0.35, 0.6, 0.9}) {
    const Vec3 x(-std::sqrt(1 - b * b), b, 0);
    const auto r = travel_time_and_lens(m, x, Vec3::UnitX(), Mode::P, 0.0);
    EXPECT_NEAR(r.travel_time, 2 * std::sqrt(1 - b * b), 1e-8);
  }
}

TEST(Lens, ReversalAndSelfConvergence) {
  auto m = presets::depth_gradient(0.2);
  m.foliation = AnalyticField::affine(0.0, Vec3::UnitZ());
  const Vec3 xi(1, 0.2, 0.4);
  const auto a = travel_time_and_lens(m, Vec3::Zero(), xi, Mode::P, 0.0);
  TraceOptions fine;
  fine.ode.abs = fine.ode.rel = 1e-13;
  const auto b = travel_time_and_lens(m, Vec3::Zero(), xi, Mode::P, 0.0, 100.0, fine);
  EXPECT_NEAR(a.travel_time, b.travel_time, 1e-8);
  EXPECT_LE((a.exit.x - b.exit.x).norm(), 1e-8);
  const auto back = travel_time_and_lens(m, a.exit.x, -a.exit.xi, Mode::P, 0.0);
  EXPECT_LE(back.exit.x.norm(), 1e-6);
  EXPECT_LE((back.exit.xi.normalized() + xi.normalized()).norm(), 1e-6);
  EXPECT_NEAR(back.travel_time, a.travel_time, 1e-8);
}

TEST(Lens, NoReturn) {
  auto m = presets::homogeneous(1.0, 0.5);
  m.foliation = AnalyticField::affine(0.0, Vec3::UnitZ());
  try {
    travel_time_and_lens(m, Vec3::Zero(), Vec3(0.2, 0, 1), Mode::P, 0.0, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoReturn);
  }
}

TEST(BranchTree, NoInterfaces) {
  const auto m = presets::homogeneous(1.0, 0.5);
  const auto t = enumerate_branch_tree(m, on_shell(m, Vec3::Zero(), Vec3::UnitX(), Mode::P), 0, 2.0);
  ASSERT_EQ(t.entries.size(), 1u);
  EXPECT_TRUE(t.entries[0].kinds.empty());
}

TEST(BranchTree, SingleInterfaceCounts) {
  const auto m = snell_pair();
  const auto below = enumerate_branch_tree(m, oblique_start(m, 20 * kDeg), 1, 4.0);
  EXPECT_EQ(below.entries.size(), 4u);
  EXPECT_TRUE(below.pruned.empty());
  const auto above = enumerate_branch_tree(m, oblique_start(m, 40 * kDeg), 1, 4.0);
  EXPECT_EQ(above.entries.size(), 3u);
  ASSERT_EQ(above.pruned.size(), 1u);
  EXPECT_EQ(above.pruned[0].kinds[0], BranchKind::Transmit);
  EXPECT_EQ(above.pruned[0].modes[1], Mode::P);
  EXPECT_EQ(above.pruned[0].reason, "evanescent");
}

TEST(Foliation, ConvexityProbe) {
  const auto ball = presets::graded_ball();
  const auto r = foliation_convexity_probe(ball, 0.3, 20, 3);
  EXPECT_EQ(r.verdict, "convex");
  auto flat = presets::homogeneous(1.0, 0.5);
  flat.foliation = AnalyticField::affine(0.0, Vec3::UnitZ());
  flat.sample_box = Box{Vec3::Constant(-1), Vec3::Constant(1)};
  const auto f = foliation_convexity_probe(flat, 0.2, 10, 3);
  EXPECT_EQ(f.verdict, "flat");
}
