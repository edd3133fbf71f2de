#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "elastoray/verify.hpp"

using namespace elastoray;
using namespace elastoray::scenario;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = ELASTORAY_SOURCE_DIR;
const std::string kCli = ELASTORAY_CLI;

std::string minimal(const std::string& mu) {
  return R"({
  "medium": {
    "regions": [{"name": "bulk", "lambda": 1.0, "mu": )" + mu + R"(, "rho": 1.0}]
  }
})";
}

/// Lower half-space is admissible; the upper one has lambda + mu < 0 (c_P < c_S).
const char* kTampered = R"({
  "medium": {
    "interfaces": [{"name": "plane", "shape": {"type": "plane", "point": [0, 0, 0], "normal": [0, 0, 1]}}],
    "regions": [
      {"name": "below", "signs": [-1], "lambda": 1.0, "mu": 1.0, "rho": 1.0},
      {"name": "above", "signs": [1], "lambda": -2.0, "mu": 1.0, "rho": 1.0}
    ]
  }
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("elastoray_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const int status = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST(Scenario, MinimalHomogeneousSpeeds) {
  const Scenario s = parse_scenario(minimal("1.0"));
  const Speeds c = s.medium.wave_speeds(Vec3(0.3, -0.2, 0.1));
  EXPECT_NEAR(c.cp, std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(c.cs, 1.0, 1e-15);
}

TEST(Scenario, NegativeShearModulusRejected) {
  try {
    parse_scenario(minimal("-1.0"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
    EXPECT_NE(std::string(e.what()).find("mu>0 and 3lambda+2mu>0"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("at sample x"), std::string::npos) << e.what();
  }
}

TEST(Scenario, MalformedJsonHasLocation) {
  try {
    parse_scenario("{\n  \"medium\": {\n    \"regions\": [,]\n  }\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3, column 17"), std::string::npos) << e.what();
  }
}

TEST(Scenario, SchemaErrorsNameThePath) {
  try {
    parse_scenario(R"({"medium": {"regions": [{"name": "a", "lambda": 1, "mu": 1}]}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
    EXPECT_NE(std::string(e.what()).find("$.medium.regions[0]: missing key 'rho'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_scenario(R"({"medium": {"regions": [{"lambda": 1, "mu": 1, "rho": {"type": "cubic"}}]}})"), Error);
  EXPECT_THROW(parse_scenario(minimal("1.0").insert(1, "\"version\": 2,")), Error);
}

TEST(Scenario, ShippedFilesAreCanonical) {
  int n = 0;
  for (const auto& f : fs::directory_iterator(kSource / "scenarios")) {
    if (f.path().extension() != ".json") continue;
    const std::string text = read_file(f.path().string());
    EXPECT_EQ(emit(parse_scenario(text)), text) << f.path();
    ++n;
  }
  EXPECT_GE(n, 3);
}

TEST(Scenario, RoundTripIsAFixedPoint) {
  const std::string once = emit(parse_scenario(minimal("1.0")));
  EXPECT_EQ(emit(parse_scenario(once)), once);
  const Scenario a = parse_scenario(once);
  Scenario b = a;
  EXPECT_EQ(scenario_hash(a), scenario_hash(b));
  b.tolerances["defect"] = 1e-3;
  EXPECT_NE(scenario_hash(a), scenario_hash(b));
}

TEST(Verify, DefaultScenarioPasses) {
  const Scenario s = load_scenario((kSource / "scenarios/homogeneous.json").string());
  const auto m = verify::run_verify(s, "all");
  EXPECT_EQ(m.exit_code(), 0) << verify::checks_table(m.checks);
  int acceptance = 0;
  for (const auto& r : m.checks) acceptance += r.suite == "acceptance" && r.status == "PASS";
  EXPECT_EQ(acceptance, 10);
}

TEST(Verify, TamperedMediumRowFails) {
  LoadOptions lo;
  lo.check_medium = false;
  const Scenario s = parse_scenario(kTampered, lo);
  const auto m = verify::run_verify(s, "medium");
  EXPECT_EQ(m.exit_code(), 1);
  bool ordering_failed = false, below_ok = false;
  for (const auto& r : m.checks) {
    if (r.name == "region above: c_P > c_S") ordering_failed = r.status == "FAIL";
    if (r.name == "region below: c_P > c_S") below_ok = r.status == "PASS";
  }
  EXPECT_TRUE(ordering_failed);
  EXPECT_TRUE(below_ok);
}

TEST(Verify, WeinsteinWithoutGridsIsSkipped) {
  Scenario s = load_scenario((kSource / "scenarios/homogeneous.json").string());
  for (auto& [name, p] : s.probes) p.grid.reset();
  const auto m = verify::run_verify(s, "weinstein");
  ASSERT_EQ(m.checks.size(), s.probes.size());
  for (const auto& r : m.checks) EXPECT_EQ(r.status, "SKIP") << r.name;
  EXPECT_EQ(m.exit_code(), 0);

  s.probes.clear();
  const auto none = verify::run_verify(s, "weinstein");
  ASSERT_EQ(none.checks.size(), 1u);
  EXPECT_EQ(none.checks[0].status, "SKIP");
}

TEST(Verify, UnknownSuiteRejected) { EXPECT_THROW(verify::parse_selector("medium,optics"), Error); }

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  const std::string scen = (kSource / "scenarios/homogeneous.json").string();
  EXPECT_EQ(run_cli("--scenario " + scen + " --out " + dir.string() + " verify --suite medium,raytrace"), 0);

  write(dir / "tampered.json", kTampered);
  EXPECT_EQ(run_cli("--scenario " + (dir / "tampered.json").string() + " --out " + dir.string() + " verify --suite medium"), 1);
  EXPECT_EQ(run_cli("--scenario " + (dir / "tampered.json").string() + " --out " + dir.string() + " trace"), 2);

  write(dir / "broken.json", "{\"medium\": ");
  EXPECT_EQ(run_cli("--scenario " + (dir / "broken.json").string() + " verify"), 2);
  EXPECT_EQ(run_cli("--scenario " + scen + " --tol-override defect verify"), 2);
  EXPECT_EQ(run_cli("--scenario " + scen + " bogus"), 2);
  EXPECT_EQ(run_cli("--scenario " + scen + " --out " + dir.string() + " rt"), 2);  // no rt block

  // a tightened tolerance turns a passing row into a check failure
  EXPECT_EQ(run_cli("--scenario " + scen + " --out " + dir.string() + " --tol-override defect=1e-12 amp"), 1);
}

TEST(Cli, DeterministicOutputs) {
  const std::string scen = (kSource / "scenarios/homogeneous.json").string();
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const fs::path& d : {a, b}) {
    for (const char* cmd : {"trace", "lens", "amp", "packet", "probe", "pde", "rtransform"})
      ASSERT_EQ(run_cli("--scenario " + scen + " --out " + d.string() + " --seed 7 --jobs 2 " + cmd), 0) << cmd;
    ASSERT_EQ(run_cli("--scenario " + scen + " --out " + d.string() + " --seed 7 --jobs 3 verify --suite medium,tomography"), 0);
  }
  int compared = 0;
  for (const auto& f : fs::directory_iterator(a)) {
    const std::string name = f.path().filename().string();
    if (name.find(".manifest.json") != std::string::npos) continue;
    EXPECT_EQ(read_file(f.path().string()), read_file((b / name).string())) << name;
    ++compared;
  }
  EXPECT_GE(compared, 10);
}

TEST(Cli, EveryOutputInExactlyOneManifest) {
  const std::string scen = (kSource / "scenarios/homogeneous.json").string();
  const fs::path d = scratch("manifest");
  for (const char* cmd : {"trace", "amp", "probe", "verify --suite medium"})
    ASSERT_EQ(run_cli("--scenario " + scen + " --out " + d.string() + " " + cmd), 0) << cmd;
  std::multiset<std::string> referenced;
  std::set<std::string> present;
  for (const auto& f : fs::directory_iterator(d)) {
    const std::string name = f.path().filename().string();
    if (name.find(".manifest.json") == std::string::npos) {
      present.insert(name);
      continue;
    }
    const auto m = verify::manifest_from_json(json::parse(read_file(f.path().string())));
    EXPECT_EQ(m.scenario_hash, scenario_hash(load_scenario(scen)));
    for (const auto& o : m.outputs) referenced.insert(o);
  }
  for (const auto& p : present) EXPECT_EQ(referenced.count(p), 1u) << p;
  EXPECT_EQ(referenced.size(), present.size());
}

TEST(Cli, VerifyReusesCachedManifest) {
  const std::string scen = (kSource / "scenarios/homogeneous.json").string();
  const fs::path d = scratch("cache");
  ASSERT_EQ(run_cli("--scenario " + scen + " --out " + d.string() + " verify --suite medium"), 0);
  const std::string first = read_file((d / "verify.csv").string());
  ASSERT_EQ(run_cli("--scenario " + scen + " --out " + d.string() + " verify --suite medium"), 0);
  auto m = verify::manifest_from_json(json::parse(read_file((d / "verify.manifest.json").string())));
  EXPECT_TRUE(m.cached);
  EXPECT_EQ(read_file((d / "verify.csv").string()), first);
  // a different seed is a different run
  ASSERT_EQ(run_cli("--scenario " + scen + " --out " + d.string() + " --seed 9 verify --suite medium"), 0);
  m = verify::manifest_from_json(json::parse(read_file((d / "verify.manifest.json").string())));
  EXPECT_FALSE(m.cached);
}
