#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "elastoray/verify.hpp"

namespace fs = std::filesystem;
using namespace elastoray;
using scenario::json;
using scenario::Scenario;
using verify::CheckRow;
using verify::RunManifest;

namespace {

constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  Scenario s;
  std::string scenario_path;
  fs::path out;
  std::uint64_t seed = 1;
  int jobs = 1;
  RunManifest manifest;
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vec_csv(const Vec3& v) { return g(v.x()) + "," + g(v.y()) + "," + g(v.z()); }
std::string cplx_csv(cplx z) { return g(z.real()) + "," + g(z.imag()); }

void write_output(Context& c, const std::string& name, const std::string& content) {
  fs::create_directories(c.out);
  std::ofstream f(c.out / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (c.out / name).string());
  f << content;
  c.manifest.outputs.push_back(name);
}

CheckRow check(const std::string& suite, const std::string& name, bool pass, double measured, double threshold,
               const std::string& detail = "") {
  return {suite, name, pass ? "PASS" : "FAIL", measured, threshold, detail, 0.0};
}

/// Names from the map, restricted to `only` when given.
template <class Map>
std::vector<std::string> select(const Map& m, const std::string& only, const char* what) {
  std::vector<std::string> out;
  if (!only.empty()) {
    if (!m.count(only)) throw UsageError(std::string("no ") + what + " named '" + only + "' in the scenario");
    return {only};
  }
  for (const auto& kv : m) out.push_back(kv.first);
  if (out.empty()) throw UsageError(std::string("scenario defines no ") + what + "s");
  return out;
}

// ---------------------------------------------------------------------------

void cmd_trace(Context& c, const std::string& only, double ds) {
  for (const auto& name : select(c.s.launches, only, "launch")) {
    const auto& L = c.s.launches.at(name);
    const BrokenRay r = trace_broken_ray(c.s.medium, verify::launch_point(c.s.medium, L), verify::launch_policy(L),
                                         L.max_events, L.max_s);
    std::string csv = "segment,region,mode,s,t,x,y,z,xi_x,xi_y,xi_z\n";
    double drift = 0.0;
    for (std::size_t k = 0; k < r.segments.size(); ++k) {
      const auto& seg = r.segments[k];
      drift = std::max(drift, seg.max_drift);
      const int steps = std::max(1, static_cast<int>(std::ceil((seg.s1 - seg.s0) / ds)));
      for (int i = 0; i <= steps; ++i) {
        const double s = i == steps ? seg.s1 : seg.s0 + i * ds;
        const PhasePoint p = seg.at(s);
        csv += std::to_string(k) + "," + std::to_string(seg.region) + "," + to_string(seg.mode) + "," + g(s) + "," + g(p.t) +
               "," + vec_csv(p.x) + "," + vec_csv(p.xi) + "\n";
      }
    }
    std::string ev = "event,interface,kind,mode_in,mode_out,t,x,y,z,xi_in_x,xi_in_y,xi_in_z,xi_out_x,xi_out_y,xi_out_z,tangential_jump\n";
    double jump = 0.0;
    for (std::size_t k = 0; k < r.events.size(); ++k) {
      const auto& e = r.events[k];
      jump = std::max(jump, e.tangential_jump() / e.xi_in.norm());
      ev += std::to_string(k) + "," + std::to_string(e.interface) + "," + to_string(e.kind) + "," + to_string(e.mode_in) + "," +
            to_string(e.mode_out) + "," + g(e.t) + "," + vec_csv(e.point) + "," + vec_csv(e.xi_in) + "," + vec_csv(e.xi_out) +
            "," + g(e.tangential_jump()) + "\n";
    }
    write_output(c, "trace_" + name + ".csv", csv);
    write_output(c, "events_" + name + ".csv", ev);
    const double tc = c.s.tol("characteristic", 1e-8), tj = c.s.tol("tangential_jump", 1e-10);
    c.manifest.checks.push_back(check("raytrace", "launch " + name + ": |c|xi| - tau|/tau", drift < tc, drift, tc,
                                      std::string("termination ") + to_string(r.termination)));
    if (!r.events.empty())
      c.manifest.checks.push_back(check("raytrace", "launch " + name + ": tangential slowness jump / |xi|", jump < tj, jump, tj));
  }
}

void cmd_lens(Context& c) {
  if (!c.s.lens) throw UsageError("scenario has no lens block");
  const auto& L = *c.s.lens;
  const auto sweep = sample_level_set_covectors(c.s.medium, L.q, L.count, c.seed);
  std::string csv = "entry_x,entry_y,entry_z,entry_xi_x,entry_xi_y,entry_xi_z,status,travel_time,exit_x,exit_y,exit_z,exit_xi_x,exit_xi_y,exit_xi_z,reversal\n";
  double rev = 0.0;
  int ok = 0;
  for (const auto& cv : sweep) {
    csv += vec_csv(cv.x) + "," + vec_csv(cv.xi) + ",";
    try {
      const LensResult r = travel_time_and_lens(c.s.medium, cv.x, cv.xi, L.mode, L.q, L.max_s);
      const double rr = lens_reversal_residual(c.s.medium, r, L.mode, L.q);
      rev = std::max(rev, rr);
      ++ok;
      csv += "ok," + g(r.travel_time) + "," + vec_csv(r.exit.x) + "," + vec_csv(r.exit.xi) + "," + g(rr) + "\n";
    } catch (const Error& e) {
      csv += std::string(to_string(e.kind())) + ",,,,,,,,\n";
    }
  }
  write_output(c, "lens.csv", csv);
  const double tol = c.s.tol("lens_reversal", 1e-6);
  c.manifest.checks.push_back(check("raytrace", "lens relation reversal", rev < tol, rev, tol,
                                    std::to_string(ok) + "/" + std::to_string(sweep.size()) + " covectors returned"));
}

void cmd_rt(Context& c) {
  if (!c.s.rt) throw UsageError("scenario has no rt block");
  std::string csv = "angle_deg,propagating,flux,residual,R_P_re,R_P_im,R_SV_re,R_SV_im,R_SH_re,R_SH_im,T_P_re,T_P_im,T_SV_re,T_SV_im,T_SH_re,T_SH_im\n";
  double worst = 0.0;
  for (const auto& r : verify::rt_sweep(*c.s.rt)) {
    csv += g(r.angle_deg) + "," + (r.propagating ? "1" : "0") + "," + g(r.flux) + "," + g(r.residual);
    for (cplx z : r.reflected) csv += "," + cplx_csv(z);
    for (cplx z : r.transmitted) csv += "," + cplx_csv(z);
    csv += "\n";
    worst = std::max(worst, r.residual);
    if (r.propagating) worst = std::max(worst, r.flux);
  }
  write_output(c, "rt.csv", csv);
  const double tol = c.s.tol("energy_flux", 1e-10);
  c.manifest.checks.push_back(check("interface", "rt sweep: residual and energy flux", worst < tol, worst, tol));
}

void cmd_amp(Context& c, const std::string& only) {
  for (const auto& name : select(c.s.bundles, only, "bundle")) {
    const auto& B = c.s.bundles.at(name);
    BundleOptions bo;
    bo.h = B.h;
    const RayBundle b(c.s.medium, B.launch, B.s_max, bo);
    const TransportReport rep = transport_amplitudes(b, B.a_minus1);
    std::string csv = "s,t,x,y,z,b0_re,b0_im,a_minus1_re,a_minus1_im,a_minus1_direct_re,a_minus1_direct_im,divN\n";
    for (std::size_t k = 0; k < rep.states.size(); ++k) {
      const auto& st = rep.states[k];
      const cplx d = k < rep.a_minus1_direct.size() ? rep.a_minus1_direct[k] : cplx(NAN, NAN);
      csv += g(st.s) + "," + g(st.t) + "," + vec_csv(st.x) + "," + cplx_csv(st.b0) + "," + cplx_csv(st.a_minus1) + "," +
             cplx_csv(d) + "," + g(st.divN) + "\n";
    }
    write_output(c, "amp_" + name + ".csv", csv);
    const double td = c.s.tol("defect", 1e-4), tr = c.s.tol("route_mismatch", 1e-6);
    c.manifest.checks.push_back(check("amplitude", "bundle " + name + ": a_-1 transport defect", rep.defect_residual < td,
                                      rep.defect_residual, td));
    c.manifest.checks.push_back(check("amplitude", "bundle " + name + ": integrating factor vs direct ODE",
                                      rep.route_mismatch < tr, rep.route_mismatch, tr));
  }
}

void cmd_packet(Context& c, const std::string& only) {
  for (const auto& name : select(c.s.packets, only, "packet")) {
    const auto& P = c.s.packets.at(name);
    if (!c.s.bundles.count(P.bundle)) throw UsageError("packet " + name + " refers to unknown bundle '" + P.bundle + "'");
    const auto& B = c.s.bundles.at(P.bundle);
    PacketSpec spec;
    spec.launch = B.launch;
    spec.omega = P.omega;
    spec.sigma = P.sigma;
    spec.a_minus1 = B.a_minus1;
    BundleOptions bo;
    bo.h = B.h;
    const PacketField f = propagate_packet(c.s.medium, spec, P.order, P.t, P.half_grid, P.extent, bo);
    std::string csv = "x,y,z,u_x_re,u_x_im,u_y_re,u_y_im,u_z_re,u_z_im\n";
    bool finite = true;
    for (std::size_t k = 0; k < f.points.size(); ++k) {
      const CVec3& u = f.values[k];
      csv += vec_csv(f.points[k]) + "," + cplx_csv(u(0)) + "," + cplx_csv(u(1)) + "," + cplx_csv(u(2)) + "\n";
      finite = finite && u.allFinite();
    }
    write_output(c, "packet_" + name + ".csv", csv);
    json summary = {{"t", f.t},
                    {"s", f.s},
                    {"center", {f.center.x(), f.center.y(), f.center.z()}},
                    {"N", {f.N.x(), f.N.y(), f.N.z()}},
                    {"b0", {f.b0.real(), f.b0.imag()}},
                    {"a_minus1", {f.a_minus1.real(), f.a_minus1.imag()}}};
    write_output(c, "packet_" + name + ".json", summary.dump(2) + "\n");
    c.manifest.checks.push_back(check("amplitude", "packet " + name + ": finite field samples", finite, 0.0, 0.0,
                                      std::to_string(f.points.size()) + " samples"));
  }
}

void cmd_rtransform(Context& c, const std::string& only_tensor, const std::string& only_launch) {
  std::string csv = "tensor,launch,value,endpoint_difference,gauge_error\n";
  const double tol = c.s.tol("gauge", 1e-6);
  int rows = 0;
  for (const auto& tn : select(c.s.tensors, only_tensor, "tensor")) {
    const auto& T = c.s.tensors.at(tn);
    const TensorField2 A = T.build(c.s.medium);
    for (const auto& ln : select(c.s.launches, only_launch, "launch")) {
      const auto& L = c.s.launches.at(ln);
      if (L.mode != Mode::P || !L.policy.empty()) continue;
      const BrokenRay ray = trace_broken_ray(c.s.medium, verify::launch_point(c.s.medium, L), BranchPolicy::transmitted(),
                                             L.max_events, L.max_s);
      const double I = ray_transform_2tensor(c.s.medium, ray, A);
      ++rows;
      if (T.potential) {
        const double e = verify::endpoint_difference(VectorField{T.vector[0], T.vector[1], T.vector[2]}, ray);
        csv += tn + "," + ln + "," + g(I) + "," + g(e) + "," + g(std::abs(I - e)) + "\n";
        c.manifest.checks.push_back(check("tomography", "tensor " + tn + " along " + ln + ": gauge identity",
                                          std::abs(I - e) < tol, std::abs(I - e), tol));
      } else {
        csv += tn + "," + ln + "," + g(I) + ",,\n";
      }
    }
  }
  if (rows == 0) throw UsageError("no purely transmitted P launch to integrate along");
  write_output(c, "rtransform.csv", csv);
}

void cmd_pde(Context& c) {
  if (!c.s.pde) throw UsageError("scenario has no pde block");
  PDEOptions po;
  po.near_D_tol = c.s.pde->near_D_tol;
  const double tol = c.s.tol("pde_residual", 1e-10);
  try {
    const auto rep = pde_residual(c.s.medium, c.s.pde->rho_tilde, c.s.pde->grid, po);
    std::string csv = "x,y,z,residual,factor,distance_to_D\n";
    for (std::size_t k = 0; k < rep.points.size(); ++k)
      csv += vec_csv(rep.points[k]) + "," + g(rep.residual[k]) + "," + g(rep.factor[k]) + "," + g(rep.distance_to_D[k]) + "\n";
    write_output(c, "pde.csv", csv);
    c.manifest.checks.push_back(check("tomography", "density PDE residual", rep.exact_zero || rep.sup_norm < tol, rep.sup_norm,
                                      tol, rep.exact_zero ? "identical densities" : ""));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NearD) throw;
    c.manifest.checks.push_back({"tomography", "density PDE residual", "FAIL", 0.0, tol, e.what(), 0.0});
  }
  std::string map = "x,y,z,factor,distance_to_D,in_D\n";
  for (const auto& e : ellipticity_map(c.s.medium, c.s.pde->grid))
    map += vec_csv(e.x) + "," + g(e.factor) + "," + g(e.distance) + "," + (e.in_D ? "1" : "0") + "\n";
  write_output(c, "ellipticity.csv", map);
}

void cmd_lenscheck(Context& c, const std::string& compare) {
  if (compare.empty()) throw UsageError("lenscheck needs --compare PATH");
  if (!c.s.lens) throw UsageError("scenario has no lens block");
  const Scenario other = scenario::load_scenario(compare);
  const auto& L = *c.s.lens;
  const auto sweep = sample_level_set_covectors(c.s.medium, L.q, L.count, c.seed);
  const LensMatchReport rep = lens_match_check(c.s.medium, other.medium, sweep, L.q, L.mode);
  std::string csv = "entry_x,entry_y,entry_z,entry_xi_x,entry_xi_y,entry_xi_z,status,travel_A,travel_B,time_difference,exit_position_mismatch,exit_covector_mismatch,reversal_A,reversal_B\n";
  for (const auto& r : rep.rows)
    csv += vec_csv(r.entry.x) + "," + vec_csv(r.entry.xi) + "," + r.status + "," + g(r.travel_A) + "," + g(r.travel_B) + "," +
           g(r.time_difference) + "," + g(r.exit_position_mismatch) + "," + g(r.exit_covector_mismatch) + "," + g(r.reversal_A) +
           "," + g(r.reversal_B) + "\n";
  write_output(c, "lenscheck.csv", csv);
  c.manifest.parameters["compare"] = compare;
  c.manifest.parameters["compare_hash"] = scenario::scenario_hash(other);
  const double tol = c.s.tol("lens_match", 1e-6);
  const double mismatch = std::max({std::abs(rep.max_time_difference), rep.max_exit_mismatch});
  c.manifest.checks.push_back(check("tomography", "lens data agree", mismatch < tol, mismatch, tol,
                                    std::to_string(rep.no_return) + " covectors without return"));
  c.manifest.checks.push_back(check("tomography", "lens reversal", rep.max_reversal < tol, rep.max_reversal, tol));
}

void cmd_probe(Context& c, const std::string& only) {
  for (const auto& name : select(c.s.probes, only, "probe")) {
    const auto r = verify::run_probe(c.s.probes.at(name), c.s);
    write_output(c, "probe_" + name + ".json", r.report.dump(2) + "\n");
    c.manifest.checks.push_back(check("weinstein", "probe " + name + ": " + c.s.probes.at(name).law + " law", r.pass,
                                      r.measured, r.threshold, r.summary));
  }
}

void cmd_verify(Context& c, const std::string& suite, bool fresh) {
  const fs::path cached = c.out / "verify.manifest.json";
  const std::string hash = scenario::scenario_hash(c.s);
  const std::string sel = suite.empty() ? "all" : suite;
  if (!fresh && fs::exists(cached)) {
    try {
      const RunManifest old = verify::manifest_from_json(json::parse(scenario::read_file(cached.string())));
      if (old.scenario_hash == hash && old.parameters.value("suite", "") == sel &&
          old.parameters.value("seed", std::uint64_t{0}) == c.seed) {
        c.manifest.checks = old.checks;
        c.manifest.cached = true;
      }
    } catch (const std::exception&) {
      // unreadable cache: run afresh
    }
  }
  if (!c.manifest.cached) {
    verify::VerifyOptions o;
    o.seed = c.seed;
    o.jobs = c.jobs;
    c.manifest.checks = verify::run_verify(c.s, sel, o).checks;
  }
  c.manifest.parameters["suite"] = sel;
  write_output(c, "verify.csv", verify::checks_csv(c.manifest.checks));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elastoray: elastic ray geometry, interface operators, amplitudes and invariant checks"};
  app.require_subcommand(1);
  std::string scenario_path, out_dir, tol_list_unused;
  std::uint64_t seed = 1;
  int jobs = 0;
  std::vector<std::string> overrides;
  app.add_option("--scenario", scenario_path, "scenario JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (default: the scenario's output field)");
  app.add_option("--seed", seed, "seed for randomized checks and sweeps");
  app.add_option("--tol-override", overrides, "KEY=VAL tolerance override (repeatable)");
  app.add_option("--jobs", jobs, "worker threads (fallback: ELASTORAY_JOBS, then 1)");

  std::string launch, bundle, packet, tensor, probe, compare, suite;
  double ds = 0.05;
  bool fresh = false;
  auto* trace = app.add_subcommand("trace", "trace launch covectors through the medium");
  trace->add_option("--launch", launch, "only this launch");
  trace->add_option("--ds", ds, "arclength sampling step")->check(CLI::PositiveNumber);
  auto* lens = app.add_subcommand("lens", "travel time and lens relation on a covector sweep");
  auto* rt = app.add_subcommand("rt", "reflection/transmission sweep on a flat interface");
  auto* amp = app.add_subcommand("amp", "transport b0 and a_-1 along ray bundles");
  amp->add_option("--bundle", bundle, "only this bundle");
  auto* pkt = app.add_subcommand("packet", "propagate a Gaussian-beam packet");
  pkt->add_option("--packet", packet, "only this packet");
  auto* rtr = app.add_subcommand("rtransform", "ray transform of tensor fields along P launches");
  rtr->add_option("--tensor", tensor, "only this tensor");
  rtr->add_option("--launch", launch, "only this launch");
  auto* pde = app.add_subcommand("pde", "density PDE residual and ellipticity map");
  auto* lcheck = app.add_subcommand("lenscheck", "compare lens data of two scenarios");
  lcheck->add_option("--compare", compare, "second scenario")->check(CLI::ExistingFile);
  auto* prb = app.add_subcommand("probe", "Weinstein wave-packet probes");
  prb->add_option("--probe", probe, "only this probe");
  auto* ver = app.add_subcommand("verify", "run the invariant suites and print a verdict table");
  ver->add_option("--suite", suite, "all, or a comma-separated list of: medium, raytrace, interface, amplitude, tomography, weinstein, acceptance");
  ver->add_flag("--fresh", fresh, "ignore a cached manifest with the same scenario hash");
  auto* fmt = app.add_subcommand("format", "print the scenario in canonical form");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  Context c;
  c.seed = seed;
  c.jobs = resolve_jobs(jobs);
  c.scenario_path = scenario_path;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    scenario::LoadOptions lo;
    lo.seed = seed;
    lo.check_medium = cmd != "verify" && cmd != "format";  // verify reports the medium as rows
    c.s = scenario::load_scenario(scenario_path, lo);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--tol-override expects KEY=VAL, got '" + kv + "'");
      try {
        std::size_t used = 0;
        const double v = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
        c.s.tolerances[kv.substr(0, eq)] = v;
      } catch (const std::logic_error&) {
        throw UsageError("--tol-override value is not a number: '" + kv + "'");
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  if (fmt->parsed()) {
    std::cout << scenario::emit(c.s);
    return 0;
  }

  c.out = out_dir.empty() ? fs::path(c.s.output) : fs::path(out_dir);
  c.manifest.subcommand = cmd;
  c.manifest.scenario_hash = scenario::scenario_hash(c.s);
  c.manifest.parameters = {{"scenario", scenario_path}, {"seed", seed}, {"jobs", c.jobs}, {"tol_override", overrides}};
  try {
    if (trace->parsed()) cmd_trace(c, launch, ds);
    else if (lens->parsed()) cmd_lens(c);
    else if (rt->parsed()) cmd_rt(c);
    else if (amp->parsed()) cmd_amp(c, bundle);
    else if (pkt->parsed()) cmd_packet(c, packet);
    else if (rtr->parsed()) cmd_rtransform(c, tensor, launch);
    else if (pde->parsed()) cmd_pde(c);
    else if (lcheck->parsed()) cmd_lenscheck(c, compare);
    else if (prb->parsed()) cmd_probe(c, probe);
    else if (ver->parsed()) cmd_verify(c, suite, fresh);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::ValidationError) {
      std::cerr << e.what() << "\n";
      return kExitUsage;
    }
    c.manifest.checks.push_back({cmd, "run", "FAIL", 0.0, 0.0, e.what(), 0.0});
  } catch (const std::exception& e) {
    c.manifest.checks.push_back({cmd, "run", "FAIL", 0.0, 0.0, e.what(), 0.0});
  }
  c.manifest.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    fs::create_directories(c.out);
    std::ofstream(c.out / (cmd + ".manifest.json"), std::ios::binary) << verify::to_json(c.manifest).dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "cannot write manifest: " << e.what() << "\n";
    return 1;
  }
  std::cout << verify::checks_table(c.manifest.checks);
  int pass = 0, fail = 0, skip = 0;
  for (const auto& r : c.manifest.checks) (r.status == "PASS" ? pass : r.status == "FAIL" ? fail : skip)++;
  std::cout << pass << " passed, " << fail << " failed, " << skip << " skipped" << (c.manifest.cached ? " (cached)" : "")
            << "; outputs in " << c.out.string() << "\n";
  return c.manifest.exit_code();
}
