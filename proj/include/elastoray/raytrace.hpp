#pragma once

#include <functional>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "medium.hpp"
#include "ode.hpp"

namespace elastoray {

/// Point (t, x, xi) of phase space on the characteristic variety of one mode.
struct PhasePoint {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 xi = Vec3::UnitX();
  double tau = 1.0;
  Mode mode = Mode::P;
  int direction = +1;  // +1 moves along xi, -1 against it
};

using RayState = Eigen::Matrix<double, 7, 1>;

inline RayState pack(const PhasePoint& p) {
  RayState y;
  y << p.x, p.xi, p.t;
  return y;
}

struct RaySample {
  double s = 0.0;
  PhasePoint point;
};

struct TraceOptions {
  ode::Tolerances ode{};
  double glancing_tol = 1e-3;
  double event_tol = 1e-12;
  int event_subsamples = 8;
  double drift_fail = 1e-6;
};

/// Speed and gradient of its logarithm for one mode in one region.
struct LocalSpeed {
  double c = 0.0;
  Vec3 grad_log = Vec3::Zero();
};

inline LocalSpeed local_speed(const ElasticMedium& m, int region, const Vec3& x, Mode mode) {
  const auto& r = m.regions.at(static_cast<std::size_t>(region));
  const Jet lam = r.lambda.jet(x), mu = r.mu.jet(x), rho = r.rho.jet(x);
  ElasticMedium::check_physical(Params{lam.value, mu.value, rho.value}, x);
  const double M = mode == Mode::P ? lam.value + 2.0 * mu.value : mu.value;
  const Vec3 gM = mode == Mode::P ? Vec3(lam.grad + 2.0 * mu.grad) : mu.grad;
  return LocalSpeed{std::sqrt(M / rho.value), 0.5 * (gM / M - rho.grad / rho.value)};
}

/// Right-hand side of the arclength-parametrized bicharacteristic system in
/// a fixed region.
struct BicharRhs {
  const ElasticMedium* medium;
  int region;
  Mode mode;
  int direction;

  RayState operator()(double, const RayState& y) const {
    const Vec3 x = y.segment<3>(0);
    const Vec3 xi = y.segment<3>(3);
    const LocalSpeed ls = local_speed(*medium, region, x, mode);
    const double n = xi.norm();
    RayState d;
    d.segment<3>(0) = direction * xi / n;
    d.segment<3>(3) = -direction * n * ls.grad_log;
    d(6) = 1.0 / ls.c;
    return d;
  }
};

enum class Termination { InterfaceHit, DomainExit, MaxS, Stopped, PolicyEnd, MaxEvents };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::InterfaceHit: return "interface";
    case Termination::DomainExit: return "domain_exit";
    case Termination::MaxS: return "max_s";
    case Termination::Stopped: return "stopped";
    case Termination::PolicyEnd: return "policy_end";
    case Termination::MaxEvents: return "max_events";
  }
  return "?";
}

struct RaySegment {
  int region = -1;
  Mode mode = Mode::P;
  int direction = +1;
  double tau = 1.0;
  double s0 = 0.0, s1 = 0.0;
  std::vector<RaySample> samples;
  std::vector<ode::DenseStep<7>> dense;
  double max_drift = 0.0;
  Termination termination = Termination::MaxS;
  int hit_interface = -1;

  double length() const { return s1 - s0; }

  RayState state_at(double s) const {
    if (dense.empty()) return pack(samples.front().point);
    s = std::clamp(s, s0, s1);
    auto it = std::upper_bound(dense.begin(), dense.end(), s,
                               [](double v, const ode::DenseStep<7>& d) { return v < d.s1(); });
    if (it == dense.end()) --it;
    return it->at(s);
  }

  PhasePoint at(double s) const {
    const RayState y = state_at(s);
    PhasePoint p;
    p.x = y.segment<3>(0);
    p.xi = y.segment<3>(3);
    p.t = y(6);
    p.tau = tau;
    p.mode = mode;
    p.direction = direction;
    return p;
  }

  const PhasePoint& start() const { return samples.front().point; }
  const PhasePoint& end() const { return samples.back().point; }
};

/// Scalar function whose sign change along the ray terminates the segment.
struct StopCondition {
  std::function<double(const Vec3&)> f;
  double expected_sign = +1.0;
};

inline double characteristic_drift(const ElasticMedium& m, int region, const PhasePoint& p) {
  const double c = local_speed(m, region, p.x, p.mode).c;
  return std::abs(c * p.xi.norm() - p.tau) / std::abs(p.tau);
}

/// Integrates one bicharacteristic segment until the first interface hit,
/// domain exit, stop condition or max_s.
inline RaySegment integrate_segment(const ElasticMedium& medium, const PhasePoint& start, double max_s,
                                    std::optional<SideHint> hint = std::nullopt,
                                    const std::optional<StopCondition>& stop = std::nullopt,
                                    const TraceOptions& opt = {}) {
  if (!(start.xi.norm() > 0.0)) throw Error(ErrorKind::InvalidArgument, "xi must be nonzero");
  RaySegment seg;
  seg.region = medium.region_index(start.x, hint);
  seg.mode = start.mode;
  seg.direction = start.direction;
  seg.tau = start.tau;
  const double d0 = characteristic_drift(medium, seg.region, start);
  if (d0 > 1e-8)
    throw Error(ErrorKind::CharacteristicViolation,
                "start point violates |tau| = c|xi| (relative drift " + std::to_string(d0) + ")");
  seg.samples.push_back({0.0, start});
  seg.max_drift = d0;

  // Watched scalar functions: interfaces (expected side), domain, stop.
  struct Watch {
    std::function<double(const Vec3&)> f;
    double sign;
    bool armed;
    int id;  // interface index, -1 domain, -2 stop
  };
  std::vector<Watch> watches;
  const double arm_eps = 1e-12;
  for (std::size_t i = 0; i < medium.interfaces.size(); ++i) {
    const auto& itf = medium.interfaces[i];
    double sg;
    if (hint && hint->interface == static_cast<int>(i)) sg = hint->side >= 0 ? 1.0 : -1.0;
    else sg = itf.implicit(start.x) > 0.0 ? 1.0 : -1.0;
    auto f = [&itf](const Vec3& x) { return itf.implicit(x); };
    watches.push_back({f, sg, sg * f(start.x) > arm_eps * itf.scale(), static_cast<int>(i)});
  }
  if (medium.domain) {
    const Vec3 c = medium.domain->first;
    const double R = medium.domain->second;
    auto f = [c, R](const Vec3& x) { return R - (x - c).norm(); };
    watches.push_back({f, 1.0, f(start.x) > 0.0, -1});
  }
  if (stop) watches.push_back({stop->f, stop->expected_sign, stop->expected_sign * stop->f(start.x) > arm_eps, -2});

  const BicharRhs rhs{&medium, seg.region, start.mode, start.direction};
  bool finished = false;
  auto on_step = [&](const ode::DenseStep<7>& d) -> bool {
    // scan the step for the first sign violation of any armed watch
    double best_s = d.s1();
    int best = -1;
    double lo_best = d.s0;
    const int K = std::max(1, opt.event_subsamples);
    for (std::size_t w = 0; w < watches.size(); ++w) {
      auto& wt = watches[w];
      double prev = d.s0;
      for (int k = 1; k <= K; ++k) {
        const double sk = d.s0 + d.h * static_cast<double>(k) / K;
        if (sk > best_s) break;
        const Vec3 xk = d.at(sk).segment<3>(0);
        const double v = wt.sign * wt.f(xk);
        if (!wt.armed) {
          if (v > arm_eps) wt.armed = true;
          prev = sk;
          continue;
        }
        if (v <= 0.0) {
          if (sk < best_s || best < 0) {
            best_s = sk;
            best = static_cast<int>(w);
            lo_best = prev;
          }
          break;
        }
        prev = sk;
      }
    }
    ode::DenseStep<7> kept = d;
    if (best >= 0) {
      const auto& wt = watches[static_cast<std::size_t>(best)];
      double lo = lo_best, hi = best_s;
      while (hi - lo > opt.event_tol) {
        const double mid = 0.5 * (lo + hi);
        if (wt.sign * wt.f(d.at(mid).segment<3>(0)) > 0.0) lo = mid;
        else hi = mid;
      }
      best_s = 0.5 * (lo + hi);
      seg.termination = wt.id >= 0 ? Termination::InterfaceHit : (wt.id == -1 ? Termination::DomainExit
                                                                               : Termination::Stopped);
      seg.hit_interface = wt.id >= 0 ? wt.id : -1;
      finished = true;
    }
    seg.dense.push_back(kept);
    const RayState y = d.at(best_s);
    PhasePoint p{y(6), y.segment<3>(0), y.segment<3>(3), start.tau, start.mode, start.direction};
    seg.samples.push_back({best_s, p});
    const double drift = characteristic_drift(medium, seg.region, p);
    seg.max_drift = std::max(seg.max_drift, drift);
    if (drift > opt.drift_fail)
      throw Error(ErrorKind::CharacteristicViolation, "characteristic drift " + std::to_string(drift) +
                                                          " exceeds " + std::to_string(opt.drift_fail));
    return finished;
  };
  const auto status = ode::integrate_adaptive<7>(rhs, 0.0, pack(start), max_s, opt.ode, on_step);
  if (status == ode::Stop::StepUnderflow) throw Error(ErrorKind::StepFailure, "step size underflow");
  if (status == ode::Stop::TooManySteps) throw Error(ErrorKind::StepFailure, "step budget exhausted");
  if (!finished) seg.termination = Termination::MaxS;
  seg.s1 = seg.samples.back().s;
  return seg;
}

/// Outgoing branch at an interface event.
struct SnellBranch {
  PhasePoint point;
  BranchKind kind = BranchKind::Transmit;
  Mode mode = Mode::P;
  bool evanescent = false;
  /// Normal slowness component along nu (imaginary magnitude when evanescent).
  cplx normal_slowness{0.0, 0.0};
  int side = +1;
  int region = -1;
};

/// Side (+1/-1) of interface `iface` the incident ray comes from.
inline int incident_side(const PhasePoint& hit, const Vec3& nu) {
  const double v = hit.direction * hit.xi.dot(nu);
  return v > 0.0 ? -1 : +1;
}

inline void check_transversal(const PhasePoint& hit, const Vec3& nu, double tol) {
  const double r = std::abs(hit.xi.dot(nu)) / hit.xi.norm();
  if (r < tol)
    throw Error(ErrorKind::GlancingRay, "|xi.nu|/|xi| = " + std::to_string(r) + " below " + std::to_string(tol) +
                                            " at " + fmt_vec(hit.x));
}

/// Up to four outgoing branches (R/T x P/S) preserving the tangential covector.
inline std::vector<SnellBranch> snell_branches(const ElasticMedium& medium, const PhasePoint& hit, int iface,
                                               double glancing_tol = 1e-3) {
  const auto& itf = medium.interfaces.at(static_cast<std::size_t>(iface));
  if (!itf.on_interface(hit.x, 1e-7))
    throw Error(ErrorKind::InvalidArgument, "hit point not on interface " + std::to_string(iface));
  const Vec3 nu = itf.normal(hit.x);
  check_transversal(hit, nu, glancing_tol);
  const int in_side = incident_side(hit, nu);
  const Vec3 xt = hit.xi - hit.xi.dot(nu) * nu;
  std::vector<SnellBranch> out;
  for (BranchKind kind : {BranchKind::Reflect, BranchKind::Transmit}) {
    const int side = kind == BranchKind::Reflect ? in_side : -in_side;
    const int region = medium.region_index(hit.x, SideHint{iface, side});
    for (Mode mode : {Mode::P, Mode::S}) {
      const double c = medium.region_speed(region, hit.x, mode);
      const double full = hit.tau * hit.tau / (c * c);
      const double rad = full - xt.squaredNorm();
      SnellBranch b;
      b.kind = kind;
      b.mode = mode;
      b.side = side;
      b.region = region;
      b.point = hit;
      b.point.mode = mode;
      if (rad <= 1e-12 * full) {
        b.evanescent = true;
        b.normal_slowness = cplx(0.0, std::sqrt(std::max(0.0, -rad)));
        b.point.xi = xt;
      } else {
        const double qn = std::sqrt(rad);
        const double along = hit.direction * side * qn;
        b.normal_slowness = cplx(along, 0.0);
        b.point.xi = xt + along * nu;
      }
      out.push_back(b);
    }
  }
  return out;
}

struct RayEvent {
  BranchKind kind = BranchKind::Transmit;
  Mode mode_in = Mode::P, mode_out = Mode::P;
  int interface = -1;
  Vec3 point = Vec3::Zero();
  Vec3 xi_in = Vec3::Zero(), xi_out = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double t = 0.0;

  double tangential_jump() const {
    const Vec3 a = xi_in - xi_in.dot(normal) * normal;
    const Vec3 b = xi_out - xi_out.dot(normal) * normal;
    return (a - b).norm();
  }
};

struct BrokenRay {
  std::vector<RaySegment> segments;
  std::vector<RayEvent> events;
  Termination termination = Termination::MaxS;

  double total_length() const {
    double l = 0.0;
    for (const auto& s : segments) l += s.length();
    return l;
  }
  const PhasePoint& end() const { return segments.back().end(); }
};

/// Branch selection: purely transmitted in one mode, or an explicit list of
/// (R|T, outgoing mode) choices consumed event by event.
struct BranchPolicy {
  struct Choice {
    BranchKind kind;
    Mode mode;
  };
  bool purely_transmitted = true;
  std::vector<Choice> sequence;

  static BranchPolicy transmitted() { return BranchPolicy{}; }
  static BranchPolicy explicit_sequence(std::vector<Choice> seq) { return BranchPolicy{false, std::move(seq)}; }
};

inline BrokenRay trace_broken_ray(const ElasticMedium& medium, const PhasePoint& start, const BranchPolicy& policy,
                                  int max_events, double max_s, std::optional<SideHint> hint = std::nullopt,
                                  const std::optional<StopCondition>& stop = std::nullopt,
                                  const TraceOptions& opt = {}) {
  BrokenRay ray;
  PhasePoint cur = start;
  double remaining = max_s;
  std::optional<SideHint> h = hint;
  for (;;) {
    RaySegment seg = integrate_segment(medium, cur, remaining, h, stop, opt);
    remaining -= seg.length();
    const Termination term = seg.termination;
    const int iface = seg.hit_interface;
    const PhasePoint hit = seg.end();
    ray.segments.push_back(std::move(seg));
    if (term != Termination::InterfaceHit) {
      ray.termination = term;
      return ray;
    }
    const std::size_t k = ray.events.size();
    if (static_cast<int>(k) >= max_events) {
      ray.termination = Termination::MaxEvents;
      return ray;
    }
    BranchKind kind = BranchKind::Transmit;
    Mode mode = cur.mode;
    if (!policy.purely_transmitted) {
      if (k >= policy.sequence.size()) {
        ray.termination = Termination::PolicyEnd;
        return ray;
      }
      kind = policy.sequence[k].kind;
      mode = policy.sequence[k].mode;
    }
    const auto branches = snell_branches(medium, hit, iface, opt.glancing_tol);
    const SnellBranch* chosen = nullptr;
    for (const auto& b : branches)
      if (b.kind == kind && b.mode == mode) chosen = &b;
    if (chosen->evanescent)
      throw Error(ErrorKind::PolicyExhausted, std::string("requested branch (") + to_string(kind) + "," +
                                                  to_string(mode) + ") is evanescent at " + fmt_vec(hit.x));
    RayEvent ev;
    ev.kind = kind;
    ev.mode_in = cur.mode;
    ev.mode_out = mode;
    ev.interface = iface;
    ev.point = hit.x;
    ev.xi_in = hit.xi;
    ev.xi_out = chosen->point.xi;
    ev.normal = medium.interfaces[static_cast<std::size_t>(iface)].normal(hit.x);
    ev.t = hit.t;
    ray.events.push_back(ev);
    cur = chosen->point;
    h = SideHint{iface, chosen->side};
    if (remaining <= 0.0) {
      ray.termination = Termination::MaxS;
      return ray;
    }
  }
}

struct LensResult {
  double travel_time = 0.0;
  PhasePoint entry;
  PhasePoint exit;
  BrokenRay ray;
};

/// Rescales xi so that c|xi| = tau at x (tau = 1).
inline PhasePoint on_shell(const ElasticMedium& medium, const Vec3& x, const Vec3& dir, Mode mode,
                           std::optional<SideHint> hint = std::nullopt) {
  const double c = medium.wave_speeds(x, hint).of(mode);
  PhasePoint p;
  p.x = x;
  p.xi = dir.normalized() / c;
  p.mode = mode;
  return p;
}

/// q-interior travel time and lens relation for an inward covector on the
/// level set kappa = q. The purely transmitted ray is traced until it returns
/// to the level set.
inline LensResult travel_time_and_lens(const ElasticMedium& medium, const Vec3& x, const Vec3& xi, Mode mode,
                                       double q, double max_s = 100.0, const TraceOptions& opt = {}) {
  if (!medium.foliation) throw Error(ErrorKind::NoFoliation, "lens relation needs a foliation function");
  const AnalyticField& kappa = *medium.foliation;
  const Vec3 dk = kappa.gradient(x);
  if (!(xi.dot(dk) > 0.0)) throw Error(ErrorKind::InvalidArgument, "covector is not inward pointing (<xi,dkappa> <= 0)");
  if (std::abs(kappa.value(x) - q) > 1e-8) throw Error(ErrorKind::InvalidArgument, "entry point not on the level set");
  std::optional<SideHint> hint;
  for (std::size_t i = 0; i < medium.interfaces.size(); ++i)
    if (medium.interfaces[i].on_interface(x))
      hint = SideHint{static_cast<int>(i), medium.interfaces[i].implicit_gradient(x).dot(dk) > 0.0 ? +1 : -1};
  const PhasePoint start = on_shell(medium, x, xi, mode, hint);
  StopCondition stop{[&kappa, q](const Vec3& y) { return kappa.value(y) - q; }, +1.0};
  LensResult r;
  r.entry = start;
  r.ray = trace_broken_ray(medium, start, BranchPolicy::transmitted(), 64, max_s, hint, stop, opt);
  if (r.ray.termination != Termination::Stopped)
    throw Error(ErrorKind::NoReturn, std::string("ray did not return to the level set (") +
                                         to_string(r.ray.termination) + ")");
  r.exit = r.ray.end();
  r.travel_time = r.exit.t - start.t;
  return r;
}

struct BranchEntry {
  std::vector<BranchKind> kinds;
  std::vector<Mode> modes;  // modes[0] is the launch mode
  BrokenRay ray;
};

struct PrunedBranch {
  std::vector<BranchKind> kinds;
  std::vector<Mode> modes;
  std::string reason;
};

struct BranchTree {
  std::vector<BranchEntry> entries;
  std::vector<PrunedBranch> pruned;
};

/// All geometric branch sequences up to depth k; evanescent and glancing
/// continuations are pruned with a reason.
inline BranchTree enumerate_branch_tree(const ElasticMedium& medium, const PhasePoint& start, int depth,
                                        double max_s = 20.0, std::optional<SideHint> hint = std::nullopt,
                                        const TraceOptions& opt = {}) {
  BranchTree tree;
  std::function<void(BranchEntry, const PhasePoint&, std::optional<SideHint>, double)> rec;
  rec = [&](BranchEntry entry, const PhasePoint& from, std::optional<SideHint> h, double budget) {
    RaySegment seg = integrate_segment(medium, from, budget, h, std::nullopt, opt);
    const double left = budget - seg.length();
    const bool hit = seg.termination == Termination::InterfaceHit;
    const int iface = seg.hit_interface;
    const PhasePoint end = seg.end();
    entry.ray.segments.push_back(std::move(seg));
    entry.ray.termination = entry.ray.segments.back().termination;
    if (!hit || static_cast<int>(entry.kinds.size()) >= depth || left <= 0.0) {
      tree.entries.push_back(std::move(entry));
      return;
    }
    std::vector<SnellBranch> branches;
    try {
      branches = snell_branches(medium, end, iface, opt.glancing_tol);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::GlancingRay) throw;
      for (BranchKind k : {BranchKind::Reflect, BranchKind::Transmit})
        for (Mode m : {Mode::P, Mode::S}) {
          PrunedBranch p{entry.kinds, entry.modes, "glancing"};
          p.kinds.push_back(k);
          p.modes.push_back(m);
          tree.pruned.push_back(std::move(p));
        }
      return;
    }
    for (const auto& b : branches) {
      auto kinds = entry.kinds;
      auto modes = entry.modes;
      kinds.push_back(b.kind);
      modes.push_back(b.mode);
      if (b.evanescent) {
        tree.pruned.push_back({kinds, modes, "evanescent"});
        continue;
      }
      BranchEntry child{kinds, modes, entry.ray};
      RayEvent ev;
      ev.kind = b.kind;
      ev.mode_in = end.mode;
      ev.mode_out = b.mode;
      ev.interface = iface;
      ev.point = end.x;
      ev.xi_in = end.xi;
      ev.xi_out = b.point.xi;
      ev.normal = medium.interfaces[static_cast<std::size_t>(iface)].normal(end.x);
      ev.t = end.t;
      child.ray.events.push_back(ev);
      rec(std::move(child), b.point, SideHint{iface, b.side}, left);
    }
  };
  BranchEntry root;
  root.modes.push_back(start.mode);
  rec(std::move(root), start, hint, max_s);
  return tree;
}

struct ConvexityReport {
  double q = 0.0;
  std::vector<Vec3> points;
  std::vector<double> drift;  // max over both ends of kappa(end) - q
  double max_drift = 0.0;
  double min_drift = 0.0;
  std::string verdict;  // "convex", "flat" or "not convex"
};

/// Traces short geodesics tangent to the level set kappa = q (both
/// directions) and records where they drift. Negative drift means the ray
/// leaves towards smaller kappa, i.e. the level set is convex seen from
/// {kappa > q}.
inline ConvexityReport foliation_convexity_probe(const ElasticMedium& medium, double q, int samples,
                                                 std::uint64_t seed = 1, double length = 0.2, Mode mode = Mode::P,
                                                 double flat_tol = 1e-8, const TraceOptions& opt = {}) {
  if (!medium.foliation) throw Error(ErrorKind::NoFoliation, "medium has no foliation function");
  const AnalyticField& kappa = *medium.foliation;
  ConvexityReport rep;
  rep.q = q;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> G(0.0, 1.0);
  const Box& b = medium.sample_box;
  int attempts = 0;
  while (static_cast<int>(rep.points.size()) < samples && attempts < samples * 50) {
    ++attempts;
    Vec3 x(b.lo.x() + U(rng) * (b.hi.x() - b.lo.x()), b.lo.y() + U(rng) * (b.hi.y() - b.lo.y()),
           b.lo.z() + U(rng) * (b.hi.z() - b.lo.z()));
    for (int it = 0; it < 60; ++it) {
      const Vec3 g = kappa.gradient(x);
      if (g.squaredNorm() < 1e-24) break;
      x -= (kappa.value(x) - q) * g / g.squaredNorm();
    }
    if (std::abs(kappa.value(x) - q) > 1e-11) continue;
    const Vec3 n = kappa.gradient(x).normalized();
    Vec3 t(G(rng), G(rng), G(rng));
    t -= t.dot(n) * n;
    if (t.norm() < 1e-6) continue;
    double worst = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int dir : {+1, -1}) {
      try {
        PhasePoint p = on_shell(medium, x, t, mode);
        p.direction = dir;
        const RaySegment seg = integrate_segment(medium, p, length, std::nullopt, std::nullopt, opt);
        if (seg.termination != Termination::MaxS) {
          ok = false;
          break;
        }
        worst = std::max(worst, kappa.value(seg.end().x) - q);
      } catch (const Error&) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    rep.points.push_back(x);
    rep.drift.push_back(worst);
  }
  if (rep.drift.empty()) {
    rep.verdict = "no samples";
    return rep;
  }
  rep.max_drift = *std::max_element(rep.drift.begin(), rep.drift.end());
  rep.min_drift = *std::min_element(rep.drift.begin(), rep.drift.end());
  if (std::abs(rep.max_drift) <= flat_tol && std::abs(rep.min_drift) <= flat_tol) rep.verdict = "flat";
  else if (rep.max_drift < 0.0) rep.verdict = "convex";
  else rep.verdict = "not convex";
  return rep;
}

}  // namespace elastoray
