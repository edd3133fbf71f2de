#pragma once

#include "medium.hpp"

// Small catalogue of media used by the CLI verify suites and the tests.
namespace elastoray::presets {

inline Params params_from_speeds(double cp, double cs, double rho) {
  const double mu = rho * cs * cs;
  return Params{rho * cp * cp - 2.0 * mu, mu, rho};
}

inline ElasticMedium homogeneous(double cp, double cs, double rho = 1.0) {
  const Params p = params_from_speeds(cp, cs, rho);
  ElasticMedium m = ElasticMedium::homogeneous(p.lambda, p.mu, p.rho);
  m.domain = std::make_pair(Vec3(Vec3::Zero()), 50.0);
  return m;
}

/// Plane z = 0; region 0 below (side-), region 1 above (side+).
inline ElasticMedium two_halfspaces(const Params& below, const Params& above, const Vec3& normal = Vec3::UnitZ()) {
  ElasticMedium m;
  m.interfaces.push_back(Interface{shape::Plane{Vec3::Zero(), normal.normalized()}, "plane"});
  m.regions.push_back(Region{"below", {-1}, AnalyticField::constant(below.lambda), AnalyticField::constant(below.mu),
                             AnalyticField::constant(below.rho)});
  m.regions.push_back(Region{"above", {+1}, AnalyticField::constant(above.lambda), AnalyticField::constant(above.mu),
                             AnalyticField::constant(above.rho)});
  m.domain = std::make_pair(Vec3(Vec3::Zero()), 50.0);
  m.sample_box = Box{Vec3::Constant(-2.0), Vec3::Constant(2.0)};
  return m;
}

/// c_S = 1 + g z, c_P = sqrt(3) c_S, rho = 1 (lambda = mu).
inline ElasticMedium depth_gradient(double g = 0.2) {
  ElasticMedium m;
  const auto mu = AnalyticField::axial(Vec3::Zero(), Vec3::UnitZ(), {1.0, 2.0 * g, g * g});
  m.regions.push_back(Region{"bulk", {}, mu, mu, AnalyticField::constant(1.0)});
  m.domain = std::make_pair(Vec3(Vec3::Zero()), 0.8 / g);
  m.sample_box = Box{Vec3::Constant(-0.5 / g), Vec3::Constant(0.5 / g)};
  return m;
}

/// Smooth radial bump in the Lame parameters and a milder one in rho.
inline ElasticMedium radial_bump(double amp = 0.3, double width = 1.5) {
  ElasticMedium m;
  const auto mu = AnalyticField::constant(1.0) + AnalyticField::gaussian(Vec3::Zero(), amp, width);
  const auto lam = AnalyticField::constant(1.2) + AnalyticField::gaussian(Vec3(0.3, -0.2, 0.1), 0.5 * amp, width);
  const auto rho = AnalyticField::constant(1.0) + AnalyticField::gaussian(Vec3(-0.2, 0.1, 0.0), 0.2 * amp, width);
  m.regions.push_back(Region{"bulk", {}, lam, mu, rho});
  m.domain = std::make_pair(Vec3(Vec3::Zero()), 30.0);
  m.sample_box = Box{Vec3::Constant(-4.0), Vec3::Constant(4.0)};
  return m;
}

/// Unit ball with kappa = 1 - |x|; speed constant (c_P = 1, c_S = 1/2).
inline ElasticMedium homogeneous_ball() {
  ElasticMedium m = homogeneous(1.0, 0.5, 1.0);
  m.foliation = AnalyticField::radial(Vec3::Zero(), {1.0, -1.0});
  m.domain = std::make_pair(Vec3(Vec3::Zero()), 2.0);
  return m;
}

/// Unit ball whose speeds increase towards the center (mu = lambda = 2 - r^2).
inline ElasticMedium graded_ball() {
  ElasticMedium m;
  const auto mu = AnalyticField::radial(Vec3::Zero(), {2.0, 0.0, -1.0});
  m.regions.push_back(Region{"bulk", {}, mu, mu, AnalyticField::constant(1.0)});
  m.foliation = AnalyticField::radial(Vec3::Zero(), {1.0, -1.0});
  m.domain = std::make_pair(Vec3(Vec3::Zero()), 1.3);
  m.sample_box = Box{Vec3::Constant(-0.9), Vec3::Constant(0.9)};
  return m;
}

/// lambda = 2 mu (1 + slope x), mu = rho = 1: crosses c_P = 2 c_S on the plane x = 0.
inline ElasticMedium lambda_ramp(double slope = 0.5) {
  ElasticMedium m;
  m.regions.push_back(Region{"bulk", {}, AnalyticField::affine(2.0, Vec3(2.0 * slope, 0.0, 0.0)),
                             AnalyticField::constant(1.0), AnalyticField::constant(1.0)});
  m.domain = std::make_pair(Vec3(Vec3::Zero()), 0.9 / slope);
  m.sample_box = Box{Vec3::Constant(-0.5 / slope), Vec3::Constant(0.5 / slope)};
  return m;
}

}  // namespace elastoray::presets
