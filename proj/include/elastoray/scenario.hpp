#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "amplitude.hpp"
#include "medium.hpp"
#include "tomography.hpp"
#include "weinstein.hpp"

// Scenario files: JSON in, canonical JSON out (sorted keys, two-space indent).
namespace elastoray::scenario {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Spec types

struct LaunchSpec {
  Vec3 x = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  Mode mode = Mode::P;
  std::vector<BranchPolicy::Choice> policy;  // empty: purely transmitted
  double max_s = 10.0;
  int max_events = 8;
};

struct BundleSpec {
  BundleLaunch launch;
  double s_max = 3.0;
  double h = 1e-3;
  cplx a_minus1{0.0, 0.0};
};

struct PacketRunSpec {
  std::string bundle;
  double omega = 40.0, sigma = 0.1, t = 1.0;
  PacketOrder order = PacketOrder::Leading;
  int half_grid = 8;
  double extent = 3.0;
};

struct TensorSpec {
  bool potential = false;  // potential tensor of `vector`, else explicit entries
  std::array<AnalyticField, 6> entries;
  std::array<AnalyticField, 3> vector;

  TensorField2 build(const ElasticMedium& m) const {
    if (potential) return potential_tensor(m, VectorField{vector[0], vector[1], vector[2]});
    return TensorField2::from_entries(entries);
  }
};

struct OperatorSpec {
  std::string type = "identity";  // identity | abs_power | derivative | laplacian | half_wave | cutoff
  double a = 1.0;
  int axis = 0;
  double t = 0.0, c = 1.0;
  int sign = +1;
  double R = 1.0, width = 1.0;

  weinstein::Multiplier build() const {
    using weinstein::Multiplier;
    if (type == "identity") return Multiplier::identity();
    if (type == "abs_power") return Multiplier::abs_power(a);
    if (type == "derivative") return Multiplier::derivative(axis);
    if (type == "laplacian") return Multiplier::laplacian();
    if (type == "half_wave") return Multiplier::half_wave(t, c, sign);
    if (type == "cutoff") return Multiplier::smoothed_cutoff(R, width);
    throw Error(ErrorKind::ValidationError, "unknown operator type '" + type + "'");
  }
};

struct GridSpec {
  weinstein::Vec2 center = weinstein::Vec2::Zero();
  double length = 2.0;
  int points = 4096;
};

struct ProbeSpec {
  int dimension = 1;
  weinstein::Descriptor distribution;
  std::optional<GridSpec> grid;
  weinstein::WavePacket packet;
  std::optional<OperatorSpec> op;
  std::string law = "order";  // order | psido | fio | pullback
  std::vector<double> theta{0.0, 1.0};

  std::optional<weinstein::Grid> make_grid() const {
    if (!grid) return std::nullopt;
    return weinstein::Grid::centered(dimension, grid->center, grid->length,
                                     grid->points);
  }
  weinstein::SampledDistribution make_distribution() const {
    return weinstein::SampledDistribution::from_descriptor(dimension, distribution, make_grid());
  }
};

struct PdeSpec {
  AnalyticField rho_tilde;
  Grid3 grid;
  double near_D_tol = 1e-6;
};

struct LensSpec {
  double q = 0.0;
  int count = 16;
  Mode mode = Mode::P;
  double max_s = 100.0;
};

struct RTSpec {
  Params minus, plus;
  Vec3 normal = Vec3::UnitZ();
  Pol incident = Pol::P;
  int side = -1;
  double tau = 1.0;
  double angle_from = 0.0, angle_to = 80.0;  // degrees
  int count = 50;
};

struct Scenario {
  int version = 1;
  std::string name = "scenario";
  ElasticMedium medium;
  std::map<std::string, LaunchSpec> launches;
  std::map<std::string, BundleSpec> bundles;
  std::map<std::string, PacketRunSpec> packets;
  std::map<std::string, TensorSpec> tensors;
  std::map<std::string, ProbeSpec> probes;
  std::optional<PdeSpec> pde;
  std::optional<LensSpec> lens;
  std::optional<RTSpec> rt;
  std::map<std::string, double> tolerances;
  std::string output = "out";

  double tol(const std::string& key, double fallback) const {
    auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }
};

// ---------------------------------------------------------------------------
// JSON helpers

namespace detail {

[[noreturn]] inline void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ValidationError, path + ": " + what);
}

inline const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) invalid(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) invalid(path, "missing key '" + key + "'");
  return *it;
}

inline double num(const json& j, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) invalid(path, "expected an integer");
  return j.get<int>();
}

inline std::string str(const json& j, const std::string& path) {
  if (!j.is_string()) invalid(path, "expected a string");
  return j.get<std::string>();
}

inline double num_or(const json& j, const std::string& key, double dflt, const std::string& path) {
  auto it = j.find(key);
  return it == j.end() ? dflt : num(*it, path + "." + key);
}

inline int int_or(const json& j, const std::string& key, int dflt, const std::string& path) {
  auto it = j.find(key);
  return it == j.end() ? dflt : integer(*it, path + "." + key);
}

inline std::vector<double> num_list(const json& j, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(num(j[k], path + "[" + std::to_string(k) + "]"));
  return v;
}

inline Vec3 vec3(const json& j, const std::string& path) {
  const auto v = num_list(j, path);
  if (v.size() != 3) invalid(path, "expected 3 numbers");
  return Vec3(v[0], v[1], v[2]);
}

inline weinstein::Vec2 vec2(const json& j, const std::string& path) {
  const auto v = num_list(j, path);
  if (v.size() != 2) invalid(path, "expected 2 numbers");
  return weinstein::Vec2(v[0], v[1]);
}

inline cplx complex(const json& j, const std::string& path) {
  const auto v = num_list(j, path);
  if (v.size() != 2) invalid(path, "expected [re, im]");
  return cplx(v[0], v[1]);
}

inline json to_j(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json to_j(const weinstein::Vec2& v) { return json::array({v.x(), v.y()}); }
inline json to_j(const cplx& z) { return json::array({z.real(), z.imag()}); }
inline json to_j(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline Mode mode_of(const json& j, const std::string& path) {
  const std::string s = str(j, path);
  if (s == "P") return Mode::P;
  if (s == "S") return Mode::S;
  invalid(path, "mode must be \"P\" or \"S\"");
}

inline Pol pol_of(const json& j, const std::string& path) {
  const std::string s = str(j, path);
  if (s == "P") return Pol::P;
  if (s == "SV") return Pol::SV;
  if (s == "SH") return Pol::SH;
  invalid(path, "polarization must be P, SV or SH");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fields

inline json field_to_json(const AnalyticField& f) {
  using detail::to_j;
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        namespace ff = field_family;
        if constexpr (std::is_same_v<T, ff::Constant>) return {{"type", "constant"}, {"c", v.c}};
        else if constexpr (std::is_same_v<T, ff::Affine>)
          return {{"type", "affine"}, {"c0", v.c0}, {"gradient", to_j(v.gradient)}};
        else if constexpr (std::is_same_v<T, ff::GaussianBump>)
          return {{"type", "gaussian"}, {"center", to_j(v.center)}, {"amplitude", v.amplitude}, {"width", v.width}};
        else if constexpr (std::is_same_v<T, ff::Radial>)
          return {{"type", "radial"}, {"center", to_j(v.center)}, {"coeffs", to_j(v.coeffs)}};
        else if constexpr (std::is_same_v<T, ff::Axial>)
          return {{"type", "axial"}, {"origin", to_j(v.origin)}, {"direction", to_j(v.direction)}, {"coeffs", to_j(v.coeffs)}};
        else if constexpr (std::is_same_v<T, ff::CompactBump>)
          return {{"type", "compact_bump"}, {"center", to_j(v.center)}, {"amplitude", v.amplitude}, {"radius", v.radius}};
        else if constexpr (std::is_same_v<T, ff::Sum>) {
          json terms = json::array();
          for (const auto& t : v.terms) terms.push_back(field_to_json(*t));
          return {{"type", "sum"}, {"terms", terms}};
        } else if constexpr (std::is_same_v<T, ff::Product>)
          return {{"type", "product"}, {"lhs", field_to_json(*v.lhs)}, {"rhs", field_to_json(*v.rhs)}};
        else return {{"type", "exp"}, {"arg", field_to_json(*v.arg)}};
      },
      f.family());
}

inline AnalyticField field_from_json(const json& j, const std::string& path) {
  using namespace detail;
  if (j.is_number()) return AnalyticField::constant(j.get<double>());
  const std::string type = str(need(j, "type", path), path + ".type");
  if (type == "constant") return AnalyticField::constant(num(need(j, "c", path), path + ".c"));
  if (type == "affine")
    return AnalyticField::affine(num(need(j, "c0", path), path + ".c0"), vec3(need(j, "gradient", path), path + ".gradient"));
  if (type == "gaussian")
    return AnalyticField::gaussian(vec3(need(j, "center", path), path + ".center"),
                                   num(need(j, "amplitude", path), path + ".amplitude"),
                                   num(need(j, "width", path), path + ".width"));
  if (type == "radial")
    return AnalyticField::radial(vec3(need(j, "center", path), path + ".center"), num_list(need(j, "coeffs", path), path + ".coeffs"));
  if (type == "axial") {
    const Vec3 d = vec3(need(j, "direction", path), path + ".direction");
    if (!(d.norm() > 0.0)) invalid(path + ".direction", "must be nonzero");
    return AnalyticField::axial(vec3(need(j, "origin", path), path + ".origin"), d, num_list(need(j, "coeffs", path), path + ".coeffs"));
  }
  if (type == "compact_bump")
    return AnalyticField::compact_bump(vec3(need(j, "center", path), path + ".center"),
                                       num(need(j, "amplitude", path), path + ".amplitude"),
                                       num(need(j, "radius", path), path + ".radius"));
  if (type == "sum") {
    const json& t = need(j, "terms", path);
    if (!t.is_array()) invalid(path + ".terms", "expected an array");
    std::vector<AnalyticField> terms;
    for (std::size_t k = 0; k < t.size(); ++k) terms.push_back(field_from_json(t[k], path + ".terms[" + std::to_string(k) + "]"));
    return AnalyticField::sum(std::move(terms));
  }
  if (type == "product")
    return AnalyticField::product(field_from_json(need(j, "lhs", path), path + ".lhs"),
                                  field_from_json(need(j, "rhs", path), path + ".rhs"));
  if (type == "exp") return AnalyticField::exp(field_from_json(need(j, "arg", path), path + ".arg"));
  invalid(path + ".type", "unknown field family '" + type + "'");
}

// ---------------------------------------------------------------------------
// Medium

inline json medium_to_json(const ElasticMedium& m) {
  using detail::to_j;
  json j;
  json ifs = json::array();
  for (const auto& itf : m.interfaces) {
    json s = std::visit(
        [](const auto& v) -> json {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, shape::Plane>) return {{"type", "plane"}, {"point", to_j(v.point)}, {"normal", to_j(v.normal)}};
          else if constexpr (std::is_same_v<T, shape::Sphere>)
            return {{"type", "sphere"}, {"center", to_j(v.center)}, {"radius", v.radius}};
          else return {{"type", "level_set"}, {"field", field_to_json(v.field)}, {"iso", v.iso}};
        },
        itf.shape);
    ifs.push_back({{"name", itf.name}, {"shape", s}});
  }
  j["interfaces"] = ifs;
  json regs = json::array();
  for (const auto& r : m.regions) {
    json signs = json::array();
    for (int s : r.signs) signs.push_back(s);
    regs.push_back({{"name", r.name},
                    {"signs", signs},
                    {"lambda", field_to_json(r.lambda)},
                    {"mu", field_to_json(r.mu)},
                    {"rho", field_to_json(r.rho)}});
  }
  j["regions"] = regs;
  if (m.foliation) j["foliation"] = field_to_json(*m.foliation);
  if (m.domain) j["domain"] = {{"center", to_j(m.domain->first)}, {"radius", m.domain->second}};
  j["sample_box"] = {{"lo", to_j(m.sample_box.lo)}, {"hi", to_j(m.sample_box.hi)}};
  return j;
}

inline ElasticMedium medium_from_json(const json& j, const std::string& path) {
  using namespace detail;
  ElasticMedium m;
  if (auto it = j.find("interfaces"); it != j.end()) {
    if (!it->is_array()) invalid(path + ".interfaces", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string p = path + ".interfaces[" + std::to_string(k) + "]";
      const json& e = (*it)[k];
      Interface itf;
      itf.name = e.contains("name") ? str(e["name"], p + ".name") : "interface" + std::to_string(k);
      const json& s = need(e, "shape", p);
      const std::string type = str(need(s, "type", p + ".shape"), p + ".shape.type");
      if (type == "plane") {
        const Vec3 n = vec3(need(s, "normal", p + ".shape"), p + ".shape.normal");
        if (!(n.norm() > 0.0)) invalid(p + ".shape.normal", "must be nonzero");
        itf.shape = shape::Plane{vec3(need(s, "point", p + ".shape"), p + ".shape.point"), n.normalized()};
      } else if (type == "sphere") {
        const double r = num(need(s, "radius", p + ".shape"), p + ".shape.radius");
        if (!(r > 0.0)) invalid(p + ".shape.radius", "must be positive");
        itf.shape = shape::Sphere{vec3(need(s, "center", p + ".shape"), p + ".shape.center"), r};
      } else if (type == "level_set") {
        itf.shape = shape::LevelSet{field_from_json(need(s, "field", p + ".shape"), p + ".shape.field"),
                                    num_or(s, "iso", 0.0, p + ".shape")};
      } else {
        invalid(p + ".shape.type", "unknown shape '" + type + "'");
      }
      m.interfaces.push_back(std::move(itf));
    }
  }
  const json& regs = need(j, "regions", path);
  if (!regs.is_array() || regs.empty()) invalid(path + ".regions", "expected a non-empty array");
  for (std::size_t k = 0; k < regs.size(); ++k) {
    const std::string p = path + ".regions[" + std::to_string(k) + "]";
    const json& e = regs[k];
    Region r;
    r.name = e.contains("name") ? str(e["name"], p + ".name") : "region" + std::to_string(k);
    if (e.contains("signs")) {
      for (double s : num_list(e["signs"], p + ".signs")) {
        if (s != -1.0 && s != 0.0 && s != 1.0) invalid(p + ".signs", "entries must be -1, 0 or 1");
        r.signs.push_back(static_cast<int>(s));
      }
      if (r.signs.size() > m.interfaces.size()) invalid(p + ".signs", "more entries than interfaces");
    }
    r.lambda = field_from_json(need(e, "lambda", p), p + ".lambda");
    r.mu = field_from_json(need(e, "mu", p), p + ".mu");
    r.rho = field_from_json(need(e, "rho", p), p + ".rho");
    m.regions.push_back(std::move(r));
  }
  if (j.contains("foliation")) m.foliation = field_from_json(j["foliation"], path + ".foliation");
  if (j.contains("domain")) {
    const json& d = j["domain"];
    const double r = num(need(d, "radius", path + ".domain"), path + ".domain.radius");
    if (!(r > 0.0)) invalid(path + ".domain.radius", "must be positive");
    m.domain = std::make_pair(vec3(need(d, "center", path + ".domain"), path + ".domain.center"), r);
  }
  if (j.contains("sample_box")) {
    const json& b = j["sample_box"];
    m.sample_box.lo = vec3(need(b, "lo", path + ".sample_box"), path + ".sample_box.lo");
    m.sample_box.hi = vec3(need(b, "hi", path + ".sample_box"), path + ".sample_box.hi");
    if (!((m.sample_box.hi - m.sample_box.lo).minCoeff() >= 0.0)) invalid(path + ".sample_box", "hi must dominate lo");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Scenario

inline json to_json(const Scenario& s) {
  using detail::to_j;
  json j;
  j["version"] = s.version;
  j["name"] = s.name;
  j["medium"] = medium_to_json(s.medium);
  j["output"] = s.output;
  json tol = json::object();
  for (const auto& [k, v] : s.tolerances) tol[k] = v;
  j["tolerances"] = tol;

  json launches = json::object();
  for (const auto& [k, L] : s.launches) {
    json pol = json::array();
    for (const auto& c : L.policy) pol.push_back(json::array({to_string(c.kind), to_string(c.mode)}));
    launches[k] = {{"x", to_j(L.x)},           {"direction", to_j(L.direction)}, {"mode", to_string(L.mode)},
                   {"policy", pol},            {"max_s", L.max_s},               {"max_events", L.max_events}};
  }
  j["launches"] = launches;

  json bundles = json::object();
  for (const auto& [k, B] : s.bundles)
    bundles[k] = {{"kind", B.launch.kind == LaunchKind::PointSource ? "point_source" : "plane_wave"},
                  {"x0", to_j(B.launch.x0)},
                  {"direction", to_j(B.launch.direction)},
                  {"s_ref", B.launch.s_ref},
                  {"b0", to_j(B.launch.b0)},
                  {"profile", json::array({B.launch.profile_u, B.launch.profile_v})},
                  {"s_max", B.s_max},
                  {"h", B.h},
                  {"a_minus1", to_j(B.a_minus1)}};
  j["bundles"] = bundles;

  json packets = json::object();
  for (const auto& [k, P] : s.packets)
    packets[k] = {{"bundle", P.bundle}, {"omega", P.omega},         {"sigma", P.sigma},
                  {"t", P.t},           {"order", P.order == PacketOrder::TwoTerm ? "two_term" : "leading"},
                  {"half_grid", P.half_grid}, {"extent", P.extent}};
  j["packets"] = packets;

  static const char* names[6] = {"xx", "xy", "xz", "yy", "yz", "zz"};
  json tensors = json::object();
  for (const auto& [k, T] : s.tensors) {
    if (T.potential) {
      tensors[k] = {{"potential", json::array({field_to_json(T.vector[0]), field_to_json(T.vector[1]), field_to_json(T.vector[2])})}};
    } else {
      json e;
      for (int i = 0; i < 6; ++i) e[names[i]] = field_to_json(T.entries[static_cast<std::size_t>(i)]);
      tensors[k] = {{"entries", e}};
    }
  }
  j["tensors"] = tensors;

  json probes = json::object();
  for (const auto& [k, P] : s.probes) {
    const auto& d = P.distribution;
    json pj;
    pj["dimension"] = P.dimension;
    pj["distribution"] = {{"kind", weinstein::to_string(d.kind)}, {"amplitude", to_j(d.amplitude)},
                          {"position", to_j(d.position)},         {"zeta", to_j(d.zeta)},
                          {"width", d.width},                     {"axis", d.axis},
                          {"side", d.side}};
    if (P.grid) pj["grid"] = {{"center", to_j(P.grid->center)}, {"length", P.grid->length}, {"points", P.grid->points}};
    pj["packet"] = {{"x0", to_j(P.packet.x0)},       {"xi0", to_j(P.packet.xi0)},     {"sigma", P.packet.sigma},
                    {"shift", to_j(P.packet.shift)}, {"ladder", to_j(P.packet.ladder)}};
    if (P.op)
      pj["operator"] = {{"type", P.op->type}, {"a", P.op->a},         {"axis", P.op->axis}, {"t", P.op->t},
                        {"c", P.op->c},       {"sign", P.op->sign},   {"R", P.op->R},       {"width", P.op->width}};
    pj["law"] = P.law;
    pj["theta"] = to_j(P.theta);
    probes[k] = pj;
  }
  j["probes"] = probes;

  if (s.pde)
    j["pde"] = {{"rho_tilde", field_to_json(s.pde->rho_tilde)},
                {"grid", {{"lo", to_j(s.pde->grid.lo)}, {"hi", to_j(s.pde->grid.hi)},
                          {"n", json::array({s.pde->grid.n[0], s.pde->grid.n[1], s.pde->grid.n[2]})}}},
                {"near_D_tol", s.pde->near_D_tol}};
  if (s.lens) j["lens"] = {{"q", s.lens->q}, {"count", s.lens->count}, {"mode", to_string(s.lens->mode)}, {"max_s", s.lens->max_s}};
  if (s.rt) {
    auto par = [](const Params& p) { return json{{"lambda", p.lambda}, {"mu", p.mu}, {"rho", p.rho}}; };
    j["rt"] = {{"minus", par(s.rt->minus)}, {"plus", par(s.rt->plus)}, {"normal", to_j(s.rt->normal)},
               {"incident", to_string(s.rt->incident)}, {"side", s.rt->side}, {"tau", s.rt->tau},
               {"angles", {{"from", s.rt->angle_from}, {"to", s.rt->angle_to}, {"count", s.rt->count}}}};
  }
  return j;
}

/// Canonical text: sorted keys, two-space indent, trailing newline.
inline std::string emit(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

inline Scenario from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) invalid("$", "scenario must be a JSON object");
  Scenario s;
  s.version = int_or(j, "version", 1, "$");
  if (s.version != 1) invalid("$.version", "unsupported version " + std::to_string(s.version));
  if (j.contains("name")) s.name = str(j["name"], "$.name");
  s.medium = medium_from_json(need(j, "medium", "$"), "$.medium");
  if (j.contains("output")) s.output = str(j["output"], "$.output");
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) invalid("$.tolerances", "expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) s.tolerances[it.key()] = num(it.value(), "$.tolerances." + it.key());
  }
  auto each = [&](const char* key, auto&& fn) {
    if (!j.contains(key)) return;
    const json& o = j[key];
    if (!o.is_object()) invalid(std::string("$.") + key, "expected an object");
    for (auto it = o.begin(); it != o.end(); ++it) fn(it.key(), it.value(), std::string("$.") + key + "." + it.key());
  };
  each("launches", [&](const std::string& k, const json& e, const std::string& p) {
    LaunchSpec L;
    L.x = vec3(need(e, "x", p), p + ".x");
    L.direction = vec3(need(e, "direction", p), p + ".direction");
    if (!(L.direction.norm() > 0.0)) invalid(p + ".direction", "must be nonzero");
    if (e.contains("mode")) L.mode = mode_of(e["mode"], p + ".mode");
    if (e.contains("policy")) {
      const json& pol = e["policy"];
      if (!pol.is_array()) invalid(p + ".policy", "expected an array of [kind, mode] pairs");
      for (std::size_t i = 0; i < pol.size(); ++i) {
        const std::string pp = p + ".policy[" + std::to_string(i) + "]";
        if (!pol[i].is_array() || pol[i].size() != 2) invalid(pp, "expected [kind, mode]");
        const std::string kind = str(pol[i][0], pp);
        if (kind != "R" && kind != "T") invalid(pp, "kind must be \"R\" or \"T\"");
        L.policy.push_back({kind == "R" ? BranchKind::Reflect : BranchKind::Transmit, mode_of(pol[i][1], pp)});
      }
    }
    L.max_s = num_or(e, "max_s", 10.0, p);
    L.max_events = int_or(e, "max_events", 8, p);
    s.launches[k] = L;
  });
  each("bundles", [&](const std::string& k, const json& e, const std::string& p) {
    BundleSpec B;
    const std::string kind = e.contains("kind") ? str(e["kind"], p + ".kind") : "plane_wave";
    if (kind != "plane_wave" && kind != "point_source") invalid(p + ".kind", "must be plane_wave or point_source");
    B.launch.kind = kind == "point_source" ? LaunchKind::PointSource : LaunchKind::PlaneWave;
    if (e.contains("x0")) B.launch.x0 = vec3(e["x0"], p + ".x0");
    if (e.contains("direction")) B.launch.direction = vec3(e["direction"], p + ".direction");
    B.launch.s_ref = num_or(e, "s_ref", 0.0, p);
    if (e.contains("b0")) B.launch.b0 = complex(e["b0"], p + ".b0");
    if (e.contains("profile")) {
      const auto pr = num_list(e["profile"], p + ".profile");
      if (pr.size() != 2) invalid(p + ".profile", "expected [u, v]");
      B.launch.profile_u = pr[0];
      B.launch.profile_v = pr[1];
    }
    B.s_max = num_or(e, "s_max", 3.0, p);
    B.h = num_or(e, "h", 1e-3, p);
    if (!(B.h > 0.0)) invalid(p + ".h", "must be positive");
    if (e.contains("a_minus1")) B.a_minus1 = complex(e["a_minus1"], p + ".a_minus1");
    s.bundles[k] = B;
  });
  each("packets", [&](const std::string& k, const json& e, const std::string& p) {
    PacketRunSpec P;
    P.bundle = str(need(e, "bundle", p), p + ".bundle");
    P.omega = num_or(e, "omega", 40.0, p);
    P.sigma = num_or(e, "sigma", 0.1, p);
    P.t = num_or(e, "t", 1.0, p);
    const std::string order = e.contains("order") ? str(e["order"], p + ".order") : "leading";
    if (order != "leading" && order != "two_term") invalid(p + ".order", "must be leading or two_term");
    P.order = order == "two_term" ? PacketOrder::TwoTerm : PacketOrder::Leading;
    P.half_grid = int_or(e, "half_grid", 8, p);
    P.extent = num_or(e, "extent", 3.0, p);
    s.packets[k] = P;
  });
  each("tensors", [&](const std::string& k, const json& e, const std::string& p) {
    TensorSpec T;
    static const char* names[6] = {"xx", "xy", "xz", "yy", "yz", "zz"};
    if (e.contains("potential")) {
      const json& v = e["potential"];
      if (!v.is_array() || v.size() != 3) invalid(p + ".potential", "expected 3 fields");
      T.potential = true;
      for (std::size_t i = 0; i < 3; ++i) T.vector[i] = field_from_json(v[i], p + ".potential[" + std::to_string(i) + "]");
    } else {
      const json& en = need(e, "entries", p);
      for (std::size_t i = 0; i < 6; ++i)
        if (en.contains(names[i])) T.entries[i] = field_from_json(en[names[i]], p + ".entries." + names[i]);
    }
    s.tensors[k] = T;
  });
  each("probes", [&](const std::string& k, const json& e, const std::string& p) {
    ProbeSpec P;
    P.dimension = int_or(e, "dimension", 1, p);
    if (P.dimension != 1 && P.dimension != 2) invalid(p + ".dimension", "must be 1 or 2");
    const json& d = need(e, "distribution", p);
    const std::string kind = str(need(d, "kind", p + ".distribution"), p + ".distribution.kind");
    using weinstein::DescriptorKind;
    bool found = false;
    for (auto dk : {DescriptorKind::PointMass, DescriptorKind::PointMassDerivative, DescriptorKind::Gaussian,
                    DescriptorKind::PlaneWave, DescriptorKind::JumpProfile})
      if (kind == weinstein::to_string(dk)) {
        P.distribution.kind = dk;
        found = true;
      }
    if (!found) invalid(p + ".distribution.kind", "unknown distribution '" + kind + "'");
    const std::string dp = p + ".distribution";
    if (d.contains("amplitude")) P.distribution.amplitude = complex(d["amplitude"], dp + ".amplitude");
    if (d.contains("position")) P.distribution.position = vec2(d["position"], dp + ".position");
    if (d.contains("zeta")) P.distribution.zeta = vec2(d["zeta"], dp + ".zeta");
    P.distribution.width = num_or(d, "width", 1.0, dp);
    P.distribution.axis = int_or(d, "axis", 0, dp);
    P.distribution.side = int_or(d, "side", 1, dp);
    if (e.contains("grid")) {
      GridSpec G;
      const json& g = e["grid"];
      G.center = vec2(need(g, "center", p + ".grid"), p + ".grid.center");
      G.length = num(need(g, "length", p + ".grid"), p + ".grid.length");
      G.points = integer(need(g, "points", p + ".grid"), p + ".grid.points");
      if (!(G.length > 0.0) || G.points < 8) invalid(p + ".grid", "length must be positive and points >= 8");
      P.grid = G;
    }
    const json& pk = need(e, "packet", p);
    P.packet.n = P.dimension;
    P.packet.x0 = vec2(need(pk, "x0", p + ".packet"), p + ".packet.x0");
    P.packet.xi0 = vec2(need(pk, "xi0", p + ".packet"), p + ".packet.xi0");
    P.packet.sigma = num_or(pk, "sigma", 1.0, p + ".packet");
    if (pk.contains("shift")) P.packet.shift = vec2(pk["shift"], p + ".packet.shift");
    if (pk.contains("ladder")) P.packet.ladder = num_list(pk["ladder"], p + ".packet.ladder");
    if (e.contains("operator")) {
      OperatorSpec O;
      const json& o = e["operator"];
      const std::string op = p + ".operator";
      O.type = str(need(o, "type", op), op + ".type");
      O.a = num_or(o, "a", 1.0, op);
      O.axis = int_or(o, "axis", 0, op);
      O.t = num_or(o, "t", 0.0, op);
      O.c = num_or(o, "c", 1.0, op);
      O.sign = int_or(o, "sign", 1, op);
      O.R = num_or(o, "R", 1.0, op);
      O.width = num_or(o, "width", 1.0, op);
      (void)O.build();
      P.op = O;
    }
    if (e.contains("law")) P.law = str(e["law"], p + ".law");
    if (P.law != "order" && P.law != "psido" && P.law != "fio" && P.law != "pullback")
      invalid(p + ".law", "must be order, psido, fio or pullback");
    if ((P.law == "psido" || P.law == "fio") && !P.op) invalid(p + ".operator", "required for law " + P.law);
    if (P.law == "fio" && P.op->type != "half_wave") invalid(p + ".operator", "fio law needs a half_wave operator");
    if (e.contains("theta")) P.theta = num_list(e["theta"], p + ".theta");
    s.probes[k] = P;
  });
  if (j.contains("pde")) {
    const json& e = j["pde"];
    PdeSpec P;
    P.rho_tilde = field_from_json(need(e, "rho_tilde", "$.pde"), "$.pde.rho_tilde");
    const json& g = need(e, "grid", "$.pde");
    P.grid.lo = vec3(need(g, "lo", "$.pde.grid"), "$.pde.grid.lo");
    P.grid.hi = vec3(need(g, "hi", "$.pde.grid"), "$.pde.grid.hi");
    const auto n = num_list(need(g, "n", "$.pde.grid"), "$.pde.grid.n");
    if (n.size() != 3) invalid("$.pde.grid.n", "expected 3 counts");
    for (int i = 0; i < 3; ++i) P.grid.n[static_cast<std::size_t>(i)] = static_cast<int>(n[static_cast<std::size_t>(i)]);
    P.near_D_tol = num_or(e, "near_D_tol", 1e-6, "$.pde");
    s.pde = P;
  }
  if (j.contains("lens")) {
    const json& e = j["lens"];
    LensSpec L;
    L.q = num_or(e, "q", 0.0, "$.lens");
    L.count = int_or(e, "count", 16, "$.lens");
    if (e.contains("mode")) L.mode = mode_of(e["mode"], "$.lens.mode");
    L.max_s = num_or(e, "max_s", 100.0, "$.lens");
    s.lens = L;
  }
  if (j.contains("rt")) {
    const json& e = j["rt"];
    RTSpec R;
    auto par = [&](const char* key) {
      const std::string p = std::string("$.rt.") + key;
      const json& q = need(e, key, "$.rt");
      return Params{num(need(q, "lambda", p), p + ".lambda"), num(need(q, "mu", p), p + ".mu"), num(need(q, "rho", p), p + ".rho")};
    };
    R.minus = par("minus");
    R.plus = par("plus");
    if (e.contains("normal")) R.normal = vec3(e["normal"], "$.rt.normal");
    if (e.contains("incident")) R.incident = pol_of(e["incident"], "$.rt.incident");
    R.side = int_or(e, "side", -1, "$.rt");
    R.tau = num_or(e, "tau", 1.0, "$.rt");
    if (e.contains("angles")) {
      const json& a = e["angles"];
      R.angle_from = num_or(a, "from", 0.0, "$.rt.angles");
      R.angle_to = num_or(a, "to", 80.0, "$.rt.angles");
      R.count = int_or(a, "count", 50, "$.rt.angles");
    }
    s.rt = R;
  }
  return s;
}

/// Parses JSON text; syntax errors become ParseError with line and column.
inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < upto; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }
}

struct LoadOptions {
  bool check_medium = true;
  int samples_per_region = 10000;
  std::uint64_t seed = 1;
};

/// Sampled medium invariants as "what at x" strings (empty when admissible).
inline std::vector<std::string> medium_issues(const ElasticMedium& m, int samples, std::uint64_t seed) {
  std::vector<std::string> out;
  for (const auto& i : m.validate(samples, seed)) out.push_back(i.what + " at sample x = " + fmt_vec(i.at));
  return out;
}

inline Scenario parse_scenario(const std::string& text, const LoadOptions& opt = {}) {
  Scenario s = from_json(parse_text(text));
  if (opt.check_medium) {
    const auto issues = medium_issues(s.medium, opt.samples_per_region, opt.seed);
    if (!issues.empty()) throw Error(ErrorKind::ValidationError, issues.front());
  }
  return s;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario(const std::string& path, const LoadOptions& opt = {}) {
  return parse_scenario(read_file(path), opt);
}

/// FNV-1a over the canonical text, as 16 hex digits.
inline std::string scenario_hash(const Scenario& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : emit(s)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace elastoray::scenario
