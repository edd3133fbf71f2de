#pragma once

#include <chrono>
#include <filesystem>

#include "acceptance.hpp"
#include "scenario.hpp"

// Invariant suites run against a loaded scenario, and the run manifest that
// every subcommand writes next to its outputs.
namespace elastoray::verify {

using scenario::json;
using scenario::Scenario;

inline constexpr const char* kToolVersion = "0.1.0";

struct CheckRow {
  std::string suite;
  std::string name;
  std::string status;  // PASS | FAIL | SKIP
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;  // manifest only; never part of data outputs
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string scenario_hash;
  std::string subcommand;
  json parameters = json::object();
  double wall_clock = 0.0;
  std::vector<std::string> outputs;
  std::vector<CheckRow> checks;
  bool cached = false;

  bool all_pass() const {
    for (const auto& c : checks)
      if (c.status == "FAIL") return false;
    return true;
  }
  int exit_code() const { return all_pass() ? 0 : 1; }
};

inline json to_json(const RunManifest& m) {
  json checks = json::array();
  for (const auto& c : m.checks)
    checks.push_back({{"suite", c.suite}, {"name", c.name}, {"status", c.status}, {"measured", c.measured},
                      {"threshold", c.threshold}, {"detail", c.detail}, {"seconds", c.seconds}});
  return {{"tool_version", m.tool_version}, {"scenario_hash", m.scenario_hash}, {"subcommand", m.subcommand},
          {"parameters", m.parameters},     {"wall_clock_seconds", m.wall_clock}, {"outputs", m.outputs},
          {"checks", checks},               {"cached", m.cached}};
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.tool_version = j.at("tool_version").get<std::string>();
  m.scenario_hash = j.at("scenario_hash").get<std::string>();
  m.subcommand = j.at("subcommand").get<std::string>();
  m.parameters = j.at("parameters");
  m.wall_clock = j.at("wall_clock_seconds").get<double>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.cached = j.value("cached", false);
  for (const auto& c : j.at("checks"))
    m.checks.push_back({c.at("suite").get<std::string>(), c.at("name").get<std::string>(), c.at("status").get<std::string>(),
                        c.at("measured").get<double>(), c.at("threshold").get<double>(), c.at("detail").get<std::string>(),
                        c.at("seconds").get<double>()});
  return m;
}

/// NaN and infinities are not JSON; they are written as null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------

struct VerifyOptions {
  std::uint64_t seed = 1;
  int jobs = 1;
  int samples_per_region = 10000;
};

namespace detail {

inline CheckRow row(std::string suite, std::string name, bool pass, double measured, double threshold, std::string detail = "") {
  return {std::move(suite), std::move(name), pass ? "PASS" : "FAIL", measured, threshold, std::move(detail), 0.0};
}

inline CheckRow skip(std::string suite, std::string name, std::string why) {
  return {std::move(suite), std::move(name), "SKIP", 0.0, 0.0, std::move(why), 0.0};
}

inline CheckRow failed(std::string suite, std::string name, const std::exception& e) {
  return {std::move(suite), std::move(name), "FAIL", 0.0, 0.0, std::string("error: ") + e.what(), 0.0};
}

inline std::string fmt(double v) { return acceptance::detail::num(v); }

}  // namespace detail

// ---------------------------------------------------------------------------
// medium

inline std::vector<CheckRow> medium_suite(const Scenario& s, const VerifyOptions& o) {
  using detail::row;
  std::vector<CheckRow> out;
  const ElasticMedium& m = s.medium;
  const auto issues = m.validate(o.samples_per_region, o.seed);
  std::string first;
  if (!issues.empty()) first = issues.front().what + " at sample x = " + fmt_vec(issues.front().at);
  out.push_back(row("medium", "admissibility (mu>0 and 3lambda+2mu>0, rho>0, interfaces disjoint)", issues.empty(),
                    static_cast<double>(issues.size()), 0.0,
                    issues.empty() ? std::to_string(o.samples_per_region) + " samples per region" : first));

  // c_P > c_S, i.e. (lambda + mu) / rho > 0, sampled per region
  std::mt19937_64 rng(o.seed + 101);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Box& b = m.sample_box;
  for (std::size_t r = 0; r < m.regions.size(); ++r) {
    double worst = std::numeric_limits<double>::infinity();
    Vec3 at = Vec3::Zero();
    int got = 0;
    for (int t = 0; t < 50 * o.samples_per_region && got < o.samples_per_region; ++t) {
      const Vec3 x(b.lo.x() + U(rng) * (b.hi.x() - b.lo.x()), b.lo.y() + U(rng) * (b.hi.y() - b.lo.y()),
                   b.lo.z() + U(rng) * (b.hi.z() - b.lo.z()));
      int idx = -1;
      try {
        idx = m.region_index(x);
      } catch (const Error&) {
        continue;
      }
      if (idx != static_cast<int>(r)) continue;
      ++got;
      const Params p = m.region_params(idx, x);
      const double gap = (p.lambda + p.mu) / p.rho;  // c_P^2 - c_S^2
      if (gap < worst) {
        worst = gap;
        at = x;
      }
    }
    const std::string name = "region " + m.regions[r].name + ": c_P > c_S";
    if (got == 0) {
      out.push_back(detail::skip("medium", name, "no samples of this region inside the sample box"));
      continue;
    }
    out.push_back(row("medium", name, worst > 0.0, worst, 0.0,
                      "min c_P^2 - c_S^2 = " + detail::fmt(worst) + " at x = " + fmt_vec(at)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// raytrace

inline PhasePoint launch_point(const ElasticMedium& m, const scenario::LaunchSpec& L) {
  return on_shell(m, L.x, L.direction, L.mode);
}

inline BranchPolicy launch_policy(const scenario::LaunchSpec& L) {
  return L.policy.empty() ? BranchPolicy::transmitted() : BranchPolicy::explicit_sequence(L.policy);
}

inline std::vector<CheckRow> raytrace_suite(const Scenario& s, const VerifyOptions& o) {
  std::vector<CheckRow> out;
  if (s.launches.empty()) return {detail::skip("raytrace", "launches", "scenario defines no launch covectors")};
  const double tol_char = s.tol("characteristic", 1e-8), tol_jump = s.tol("tangential_jump", 1e-10);
  std::vector<std::string> names;
  for (const auto& [k, L] : s.launches) names.push_back(k);
  std::vector<std::vector<CheckRow>> rows(names.size());
  parallel_for(names.size(), o.jobs, [&](std::size_t i) {
    const auto& L = s.launches.at(names[i]);
    try {
      const BrokenRay r = trace_broken_ray(s.medium, launch_point(s.medium, L), launch_policy(L), L.max_events, L.max_s);
      double drift = 0.0, jump = 0.0;
      for (const auto& seg : r.segments) drift = std::max(drift, seg.max_drift);
      for (const auto& e : r.events) jump = std::max(jump, e.tangential_jump() / e.xi_in.norm());
      rows[i].push_back(detail::row("raytrace", "launch " + names[i] + ": |c|xi| - tau|/tau", drift < tol_char, drift, tol_char,
                                    std::to_string(r.segments.size()) + " segments, termination " + to_string(r.termination)));
      if (r.events.empty())
        rows[i].push_back(detail::skip("raytrace", "launch " + names[i] + ": tangential slowness jump", "no interface events"));
      else
        rows[i].push_back(detail::row("raytrace", "launch " + names[i] + ": tangential slowness jump / |xi|", jump < tol_jump, jump,
                                      tol_jump, std::to_string(r.events.size()) + " events"));
    } catch (const std::exception& e) {
      rows[i].push_back(detail::failed("raytrace", "launch " + names[i], e));
    }
  });
  for (auto& v : rows) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// ---------------------------------------------------------------------------
// interface

struct RTRow {
  double angle_deg = 0.0;
  bool propagating = true;
  double flux = 0.0, residual = 0.0;
  std::array<cplx, 3> reflected{}, transmitted{};
};

/// Plane-wave sweep of incidence angles on a flat interface between two
/// homogeneous media.
inline std::vector<RTRow> rt_sweep(const scenario::RTSpec& rt) {
  std::vector<RTRow> rows;
  const Vec3 nu = rt.normal.normalized();
  const Vec3 t = any_orthogonal(nu);
  const Params& inc = rt.side < 0 ? rt.minus : rt.plus;
  const double c = rt.incident == Pol::P ? inc.cp() : inc.cs();
  for (int k = 0; k < rt.count; ++k) {
    RTRow r;
    r.angle_deg = rt.count > 1 ? rt.angle_from + (rt.angle_to - rt.angle_from) * k / (rt.count - 1) : rt.angle_from;
    const double slowness = std::sin(r.angle_deg * acceptance::detail::kDeg) / c;
    const auto s = solve_interface_system(rt.minus, rt.plus, nu, rt.tau, rt.tau * slowness * t, rt.incident, rt.side);
    r.propagating = s.all_propagating();
    r.flux = energy_flux_check(s);
    r.residual = s.residual;
    for (int j = 0; j < 3; ++j) {
      r.reflected[static_cast<std::size_t>(j)] = s.reflected[static_cast<std::size_t>(j)].amplitude;
      r.transmitted[static_cast<std::size_t>(j)] = s.transmitted[static_cast<std::size_t>(j)].amplitude;
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<CheckRow> interface_suite(const Scenario& s, const VerifyOptions& o) {
  std::vector<CheckRow> out;
  const double tol = s.tol("energy_flux", 1e-10);
  bool any = false;
  if (s.rt) {
    any = true;
    try {
      double flux = 0.0, res = 0.0;
      int prop = 0;
      for (const auto& r : rt_sweep(*s.rt)) {
        res = std::max(res, r.residual);
        if (!r.propagating) continue;
        ++prop;
        flux = std::max(flux, r.flux);
      }
      out.push_back(detail::row("interface", "rt sweep: system residual", res < tol, res, tol,
                                std::to_string(s.rt->count) + " angles"));
      out.push_back(detail::row("interface", "rt sweep: energy flux balance", flux < tol, flux, tol,
                                std::to_string(prop) + " fully propagating angles"));
    } catch (const std::exception& e) {
      out.push_back(detail::failed("interface", "rt sweep", e));
    }
  }
  // every propagating interface event met by the scenario launches
  double flux = 0.0;
  int events = 0;
  for (const auto& [name, L] : s.launches) {
    try {
      const BrokenRay r = trace_broken_ray(s.medium, launch_point(s.medium, L), launch_policy(L), L.max_events, L.max_s);
      for (const auto& e : r.events) {
        const Vec3 nu = e.normal;
        const SideHint minus{e.interface, -1}, plus{e.interface, +1};
        const Params pm = s.medium.eval_params(e.point, minus), pp = s.medium.eval_params(e.point, plus);
        const int side = e.xi_in.dot(nu) > 0.0 ? -1 : +1;
        const Vec3 xt = e.xi_in - e.xi_in.dot(nu) * nu;
        const double tau = s.medium.wave_speeds(e.point, side < 0 ? minus : plus).of(e.mode_in) * e.xi_in.norm();
        const Pol pol = e.mode_in == Mode::P ? Pol::P : Pol::SV;
        const auto sol = solve_interface_system(pm, pp, nu, tau, xt, pol, side);
        if (!sol.all_propagating()) continue;
        ++events;
        flux = std::max({flux, energy_flux_check(sol), sol.residual});
      }
    } catch (const std::exception&) {
      // raytrace suite reports tracing failures
    }
  }
  if (events > 0) {
    any = true;
    out.push_back(detail::row("interface", "launch events: energy flux balance", flux < tol, flux, tol,
                              std::to_string(events) + " propagating events"));
  }
  (void)o;
  if (!any) out.push_back(detail::skip("interface", "interface systems", "no rt sweep and no propagating interface events"));
  return out;
}

// ---------------------------------------------------------------------------
// amplitude

inline std::vector<CheckRow> amplitude_suite(const Scenario& s, const VerifyOptions& o) {
  if (s.bundles.empty()) return {detail::skip("amplitude", "bundles", "scenario defines no ray bundles")};
  const double tol_def = s.tol("defect", 1e-4), tol_route = s.tol("route_mismatch", 1e-6);
  std::vector<std::string> names;
  for (const auto& [k, B] : s.bundles) names.push_back(k);
  std::vector<std::vector<CheckRow>> rows(names.size());
  parallel_for(names.size(), o.jobs, [&](std::size_t i) {
    const auto& B = s.bundles.at(names[i]);
    try {
      BundleOptions bo;
      bo.h = B.h;
      const RayBundle b(s.medium, B.launch, B.s_max, bo);
      const TransportReport rep = transport_amplitudes(b, B.a_minus1);
      rows[i].push_back(detail::row("amplitude", "bundle " + names[i] + ": a_-1 transport defect", rep.defect_residual < tol_def,
                                    rep.defect_residual, tol_def));
      rows[i].push_back(detail::row("amplitude", "bundle " + names[i] + ": integrating factor vs direct ODE",
                                    rep.route_mismatch < tol_route, rep.route_mismatch, tol_route));
    } catch (const std::exception& e) {
      rows[i].push_back(detail::failed("amplitude", "bundle " + names[i], e));
    }
  });
  std::vector<CheckRow> out;
  for (auto& v : rows) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// ---------------------------------------------------------------------------
// tomography

inline double endpoint_difference(const VectorField& v, const BrokenRay& ray) {
  return acceptance::detail::endpoint_difference(v, ray);
}

inline std::vector<CheckRow> tomography_suite(const Scenario& s, const VerifyOptions&) {
  std::vector<CheckRow> out;
  const double tol = s.tol("gauge", 1e-6);
  for (const auto& [tn, T] : s.tensors) {
    if (!T.potential) {
      out.push_back(detail::skip("tomography", "tensor " + tn + ": gauge identity", "explicit tensor entries (no potential)"));
      continue;
    }
    const VectorField v{T.vector[0], T.vector[1], T.vector[2]};
    for (const auto& [ln, L] : s.launches) {
      const std::string name = "tensor " + tn + " along " + ln + ": gauge identity";
      if (L.mode != Mode::P || !L.policy.empty()) {
        out.push_back(detail::skip("tomography", name, "launch is not a purely transmitted P ray"));
        continue;
      }
      try {
        const BrokenRay ray = trace_broken_ray(s.medium, launch_point(s.medium, L), BranchPolicy::transmitted(), L.max_events, L.max_s);
        const double err = std::abs(ray_transform_2tensor(s.medium, ray, T.build(s.medium)) - endpoint_difference(v, ray));
        out.push_back(detail::row("tomography", name, err < tol, err, tol));
      } catch (const std::exception& e) {
        out.push_back(detail::failed("tomography", name, e));
      }
    }
  }
  if (s.pde) {
    const double ptol = s.tol("pde_residual", 1e-10);
    try {
      PDEOptions po;
      po.near_D_tol = s.pde->near_D_tol;
      const auto rep = pde_residual(s.medium, s.pde->rho_tilde, s.pde->grid, po);
      out.push_back(detail::row("tomography", "density PDE residual", rep.exact_zero || rep.sup_norm < ptol, rep.sup_norm, ptol,
                                std::to_string(rep.points.size()) + " interior nodes" + (rep.exact_zero ? ", identical densities" : "")));
    } catch (const std::exception& e) {
      out.push_back(detail::failed("tomography", "density PDE residual", e));
    }
  }
  if (out.empty()) out.push_back(detail::skip("tomography", "tensors", "scenario defines no tensor fields and no pde block"));
  return out;
}

// ---------------------------------------------------------------------------
// weinstein

struct ProbeResult {
  json report;
  bool pass = false;
  double measured = 0.0, threshold = 0.0;
  std::string summary;
};

inline json law_json(const weinstein::LawReport& r) {
  json rungs = json::array();
  for (std::size_t k = 0; k < r.tau.size(); ++k)
    rungs.push_back({{"tau", r.tau[k]},
                     {"lhs", json::array({r.lhs[k].real(), r.lhs[k].imag()})},
                     {"rhs", json::array({r.rhs[k].real(), r.rhs[k].imag()})},
                     {"ratio", json::array({r.ratio[k].real(), r.ratio[k].imag()})},
                     {"deviation", number(k < r.deviation.size() ? r.deviation[k] : NAN)},
                     {"resolved", k < r.resolved.size() && r.resolved[k]}});
  return {{"law", r.law}, {"rungs", rungs}, {"slope", number(r.slope)}, {"slope_threshold", r.slope_threshold},
          {"exact", r.exact}, {"pass", r.pass}, {"note", r.note}};
}

inline json order_json(const weinstein::OrderEstimate& e) {
  json rungs = json::array();
  for (std::size_t k = 0; k < e.tau.size(); ++k)
    rungs.push_back({{"tau", e.tau[k]},
                     {"pairing", json::array({e.pairings[k].real(), e.pairings[k].imag()})},
                     {"resolved", k < e.resolved.size() && e.resolved[k]}});
  return {{"rungs", rungs}, {"order", number(e.order)}, {"half_width", number(e.half_width)},
          {"rungs_used", e.rungs_used}, {"decays_to_floor", e.decays_to_floor}};
}

/// Runs one probe; the distribution is sampled on the probe grid when it has one.
inline ProbeResult run_probe(const scenario::ProbeSpec& P, const Scenario& s) {
  using namespace weinstein;
  ProbeResult out;
  const SampledDistribution g = P.make_distribution();
  out.report["law"] = P.law;
  out.report["uses_samples"] = g.uses_samples();
  if (P.law == "order") {
    const OrderEstimate e = estimate_order(g, P.packet);
    out.report["order"] = order_json(e);
    out.pass = e.decays_to_floor || std::isfinite(e.order);
    out.measured = e.order;
    out.summary = e.decays_to_floor ? "decays to the noise floor" : "order " + detail::fmt(e.order) + " +- " + detail::fmt(e.half_width);
  } else if (P.law == "psido") {
    const LawReport r = verify_psido_symbol_law(g, P.packet, P.op->build());
    out.report["psido"] = law_json(r);
    out.measured = r.slope;
    out.threshold = s.tol("psido_slope", r.slope_threshold);
    out.pass = r.exact || r.slope <= out.threshold;
    out.summary = r.exact ? "exact on every rung" : "remainder slope " + detail::fmt(r.slope);
  } else if (P.law == "fio") {
    const FIOReport r = verify_fio_symbol_extraction(g, P.op->t, P.op->c, P.op->sign, P.packet);
    json phase = json::array();
    for (double e : r.phase_error) phase.push_back(number(e));
    out.report["fio"] = {{"law", law_json(r.law)},
                         {"constant", json::array({r.constant.real(), r.constant.imag()})},
                         {"J_fitted", r.J_fitted},
                         {"phase_error", phase},
                         {"max_phase_error", number(r.max_phase_error)}};
    out.threshold = s.tol("fio_phase", 1e-3);
    out.measured = r.max_phase_error;
    out.pass = r.max_phase_error < out.threshold && r.law.pass;
    out.summary = "J = " + detail::fmt(r.J_fitted) + ", max phase error " + detail::fmt(r.max_phase_error);
  } else {
    const LawReport r = verify_pullback_law(g, Diffeo1{P.theta}, P.packet);
    out.report["pullback"] = law_json(r);
    out.pass = r.pass;
    out.measured = r.slope;
    out.threshold = r.slope_threshold;
    out.summary = r.exact ? "exact on every rung" : "remainder slope " + detail::fmt(r.slope);
  }
  out.report["pass"] = out.pass;
  return out;
}

inline std::vector<CheckRow> weinstein_suite(const Scenario& s, const VerifyOptions& o) {
  if (s.probes.empty()) return {detail::skip("weinstein", "probes", "scenario defines no probes")};
  std::vector<std::string> names;
  for (const auto& [k, P] : s.probes) names.push_back(k);
  std::vector<CheckRow> rows(names.size());
  parallel_for(names.size(), o.jobs, [&](std::size_t i) {
    const auto& P = s.probes.at(names[i]);
    const std::string name = "probe " + names[i] + ": " + P.law + " law";
    if (!P.grid) {
      rows[i] = detail::skip("weinstein", name, "probe has no grid");
      return;
    }
    try {
      const ProbeResult r = run_probe(P, s);
      rows[i] = detail::row("weinstein", name, r.pass, r.measured, r.threshold, r.summary);
    } catch (const std::exception& e) {
      rows[i] = detail::failed("weinstein", name, e);
    }
  });
  return rows;
}

// ---------------------------------------------------------------------------
// acceptance and dispatch

inline std::vector<CheckRow> acceptance_suite(const Scenario&, const VerifyOptions& o) {
  std::vector<CheckRow> out;
  acceptance::Options ao;
  ao.seed = o.seed;
  ao.jobs = o.jobs;
  for (const auto& [id, fn] : acceptance::registry()) {
    const acceptance::Verdict v = fn(ao);
    CheckRow r = detail::row("acceptance", v.id + " " + v.title, v.pass(), v.measured, v.threshold, v.detail);
    if (v.accurate && !v.pass()) r.detail += " (over the runtime budget)";
    r.seconds = v.seconds;
    out.push_back(r);
  }
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> n{"medium", "raytrace", "interface", "amplitude", "tomography", "weinstein", "acceptance"};
  return n;
}

inline std::vector<CheckRow> run_suite(const std::string& name, const Scenario& s, const VerifyOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CheckRow> rows;
  if (name == "medium") rows = medium_suite(s, o);
  else if (name == "raytrace") rows = raytrace_suite(s, o);
  else if (name == "interface") rows = interface_suite(s, o);
  else if (name == "amplitude") rows = amplitude_suite(s, o);
  else if (name == "tomography") rows = tomography_suite(s, o);
  else if (name == "weinstein") rows = weinstein_suite(s, o);
  else if (name == "acceptance") rows = acceptance_suite(s, o);
  else throw Error(ErrorKind::InvalidArgument, "unknown suite '" + name + "'");
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (name != "acceptance")
    for (auto& r : rows) r.seconds = dt / static_cast<double>(std::max<std::size_t>(1, rows.size()));
  return rows;
}

/// Selector: "all" or a comma-separated list of suite names.
inline std::vector<std::string> parse_selector(const std::string& sel) {
  if (sel.empty() || sel == "all") return suite_names();
  std::vector<std::string> out;
  std::stringstream ss(sel);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (std::find(suite_names().begin(), suite_names().end(), item) == suite_names().end())
      throw Error(ErrorKind::InvalidArgument, "unknown suite '" + item + "'");
    out.push_back(item);
  }
  return out;
}

inline RunManifest run_verify(const Scenario& s, const std::string& selector, const VerifyOptions& o = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.subcommand = "verify";
  m.scenario_hash = scenario::scenario_hash(s);
  m.parameters = {{"suite", selector.empty() ? "all" : selector}, {"seed", o.seed}, {"jobs", o.jobs},
                  {"samples_per_region", o.samples_per_region}};
  for (const auto& name : parse_selector(selector)) {
    auto rows = run_suite(name, s, o);
    m.checks.insert(m.checks.end(), rows.begin(), rows.end());
  }
  m.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

/// Verdict table as CSV (deterministic: no timings).
inline std::string checks_csv(const std::vector<CheckRow>& rows) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out = "suite,name,status,measured,threshold,detail\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.suite + "," + quote(r.name) + "," + r.status + ",";
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", r.measured, r.threshold);
    out += buf + quote(r.detail) + "\n";
  }
  return out;
}

inline std::string checks_table(const std::vector<CheckRow>& rows) {
  std::string out;
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-4s  %-10s  %-60s  %11.3e  %11.3e  %s\n", r.status.c_str(), r.suite.c_str(),
                  r.name.c_str(), r.measured, r.threshold, r.detail.c_str());
    out += buf;
  }
  return out;
}

}  // namespace elastoray::verify
