#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "idslab/config.hpp"
#include "idslab/runner.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("idslab_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the installed CLI binary, captures stdout+stderr, returns the exit code.
int run_tool(const std::string& args, const fs::path& capture) {
  const std::string cmd = std::string(IDSLAB_TOOL_PATH) + " " + args + " > " +
                          capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

idslab::ExperimentConfig load_ok(const fs::path& p) {
  std::vector<idslab::ConfigError> errors;
  auto cfg = idslab::load_config(p.string(), errors);
  REQUIRE_MESSAGE(errors.empty(), idslab::format_errors(errors));
  return cfg;
}

const fs::path kVerifyCfg = fs::path(IDSLAB_CONFIG_DIR) / "verify_lemmas.cfg";

}  // namespace

TEST_CASE("bundled verification config yields four passing reports") {
  const fs::path dir = fresh_dir("verify");
  auto cfg = load_ok(kVerifyCfg);
  idslab::RunOptions opt;
  opt.out_dir = (dir / "out").string();
  const auto res = idslab::run_experiment(cfg, opt);
  CHECK(res.exit_code == 0);
  REQUIRE(res.reports.size() == 4);
  for (const auto& r : res.reports) CHECK(r.pass);
  CHECK(res.reports[0].id == "lemma21");
  CHECK(res.reports[1].id == "lemma22");
  CHECK(res.reports[2].id == "lemma23");
  CHECK(res.reports[3].id == "thm11");

  // Every listed artifact exists, and the required ones are present.
  for (const auto& a : res.artifacts) CHECK(fs::exists(dir / "out" / a));
  const auto js = nlohmann::json::parse(slurp(dir / "out" / "bounds.json"));
  REQUIRE(js.is_array());
  REQUIRE(js.size() == 4);
  for (const auto& r : js) CHECK(r["pass"] == true);

  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "run_manifest.json"));
  CHECK(manifest["version"] == idslab::kToolVersion);
  CHECK(manifest["reports"]["pass"] == 4);
  CHECK(manifest["reports"]["fail"] == 0);
  CHECK(manifest.contains("config_hash"));

  const std::string csv = slurp(dir / "out" / "bounds.csv");
  CHECK(csv.rfind("inequality,parameters,lhs,rhs,margin,tolerance,pass", 0) == 0);
}

TEST_CASE("artifacts are byte identical across worker counts and reruns") {
  auto cfg = load_ok(kVerifyCfg);
  const fs::path d1 = fresh_dir("det1"), d2 = fresh_dir("det2"), d3 = fresh_dir("det3");
  idslab::RunOptions o1, o2, o3;
  o1.out_dir = d1.string();
  o1.workers = 1;
  o2.out_dir = d2.string();
  o2.workers = 4;
  o3.out_dir = d3.string();
  o3.workers = 4;
  const auto r1 = idslab::run_experiment(cfg, o1);
  const auto r2 = idslab::run_experiment(cfg, o2);
  const auto r3 = idslab::run_experiment(cfg, o3);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  REQUIRE(r3.exit_code == 0);
  for (const auto& name : {"bounds.json", "bounds.csv", "check0_lemma21_sweep.csv",
                           "bound_margins.svg", "check0_lemma21_sweep.svg"}) {
    CHECK_MESSAGE(slurp(d1 / name) == slurp(d2 / name), name);
    CHECK_MESSAGE(slurp(d2 / name) == slurp(d3 / name), name);
  }
}

TEST_CASE("format selection controls which artifacts appear") {
  auto cfg = load_ok(kVerifyCfg);
  const fs::path dir = fresh_dir("formats");
  idslab::RunOptions opt;
  opt.out_dir = dir.string();
  opt.formats = idslab::FormatSet{true, false, false};  // csv only
  const auto res = idslab::run_experiment(cfg, opt);
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir / "bounds.csv"));
  CHECK_FALSE(fs::exists(dir / "bounds.json"));
  CHECK_FALSE(fs::exists(dir / "bound_margins.svg"));
  // The manifest is not an optional format; it always appears.
  CHECK(fs::exists(dir / "run_manifest.json"));
}

TEST_CASE("a failing check drives the exit code to one") {
  const fs::path dir = fresh_dir("fail");
  spit(dir / "bad.cfg",
       "[measures]\nd = point(0)\n"
       "[output]\ndirectory = out\n"
       "[checks]\ncheck = lemma22 mu=d alpha=0.5\n");
  auto cfg = load_ok(dir / "bad.cfg");
  idslab::RunOptions opt;
  opt.out_dir = (dir / "out").string();
  const auto res = idslab::run_experiment(cfg, opt);
  CHECK(res.exit_code == 1);
  REQUIRE(res.reports.size() == 1);
  CHECK_FALSE(res.reports[0].pass);
}

TEST_CASE("stage errors surface as exit code three") {
  auto cfg = load_ok(kVerifyCfg);
  idslab::RunOptions opt;
  opt.out_dir = "/proc/version/impossible";  // cannot create a directory here
  const auto res = idslab::run_experiment(cfg, opt);
  CHECK(res.exit_code == 3);
  CHECK_FALSE(res.error.empty());
}

TEST_CASE("worker resolution prefers the flag, then the environment") {
  unsetenv("IDSLAB_WORKERS");
  CHECK(idslab::resolve_workers(3) == 3);
  CHECK(idslab::resolve_workers(0) >= 1);
  setenv("IDSLAB_WORKERS", "7", 1);
  CHECK(idslab::resolve_workers(0) == 7);
  CHECK(idslab::resolve_workers(2) == 2);
  setenv("IDSLAB_WORKERS", "garbage", 1);
  CHECK(idslab::resolve_workers(0) >= 1);
  unsetenv("IDSLAB_WORKERS");
}

TEST_CASE("hash is stable for equal canonical text") {
  auto cfg = load_ok(kVerifyCfg);
  const auto h1 = idslab::fnv1a64(cfg.canonical_text());
  const auto h2 = idslab::fnv1a64(cfg.canonical_text());
  CHECK(h1 == h2);
  CHECK(idslab::fnv1a64("a") != idslab::fnv1a64("b"));
  // Reference value of the empty-string FNV-1a offset basis.
  CHECK(idslab::fnv1a64("") == 14695981039346656037ull);
}

TEST_CASE("cli run executes the bundled config") {
  const fs::path dir = fresh_dir("cli_run");
  const int code = run_tool("run " + kVerifyCfg.string() + " --out-dir " + (dir / "out").string(),
                            dir / "log.txt");
  CHECK(code == 0);
  const std::string log = slurp(dir / "log.txt");
  CHECK(log.find("4 of 4 checks passed") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "run_manifest.json"));
}

TEST_CASE("cli validate accepts good configs and enumerates problems in bad ones") {
  const fs::path dir = fresh_dir("cli_validate");
  CHECK(run_tool("validate " + kVerifyCfg.string(), dir / "ok.txt") == 0);
  CHECK(slurp(dir / "ok.txt").find("ok") != std::string::npos);

  spit(dir / "bad.cfg",
       "[measures]\nmu = uniform(1, 0)\n"
       "[checks]\ncheck = lemma22 mu=mu alpha=1.5\ncheck = wat mu=mu\n");
  const int code = run_tool("validate " + (dir / "bad.cfg").string(), dir / "bad.txt");
  CHECK(code == 2);
  const std::string log = slurp(dir / "bad.txt");
  // All three problems in one pass, each tagged with its line.
  CHECK(log.find("line 2") != std::string::npos);
  CHECK(log.find("line 4") != std::string::npos);
  CHECK(log.find("line 5") != std::string::npos);
}

TEST_CASE("cli list-checks names every bound id") {
  const fs::path dir = fresh_dir("cli_list");
  CHECK(run_tool("list-checks", dir / "log.txt") == 0);
  const std::string log = slurp(dir / "log.txt");
  for (const char* id : {"lemma21", "lemma22", "lemma23", "thm11", "thm12-scaling", "thm12-weighted"})
    CHECK_MESSAGE(log.find(id) != std::string::npos, id);
}

TEST_CASE("cli run of a small monte carlo config is reproducible across workers") {
  const fs::path dir = fresh_dir("cli_mc");
  spit(dir / "mc.cfg",
       "[measures]\nmu = uniform(0,1)\n"
       "[operator]\nside = 16\nsingle_site = mu\n"
       "[mc]\nrealizations = 8\nseed = 3\nenergies = range(-1, 1, 5)\n"
       "scales = 0.5, 1\nsites = center, 2\n"
       "[output]\ndirectory = out\nformats = csv\n");
  const int c1 = run_tool("run " + (dir / "mc.cfg").string() + " --out-dir " +
                              (dir / "o1").string() + " --workers 1",
                          dir / "l1.txt");
  const int c2 = run_tool("run " + (dir / "mc.cfg").string() + " --out-dir " +
                              (dir / "o2").string() + " --workers 3",
                          dir / "l2.txt");
  CHECK(c1 == 0);
  CHECK(c2 == 0);
  // center of a 16-site chain is site (16 - 1) / 2 = 7
  CHECK(slurp(dir / "o1" / "mc_site_7.csv") == slurp(dir / "o2" / "mc_site_7.csv"));
  CHECK(slurp(dir / "o1" / "mc_site_2.csv") == slurp(dir / "o2" / "mc_site_2.csv"));
}

TEST_CASE("cli seed override changes the monte carlo stream") {
  const fs::path dir = fresh_dir("cli_seed");
  spit(dir / "mc.cfg",
       "[measures]\nmu = uniform(0,1)\n"
       "[operator]\nside = 8\nsingle_site = mu\n"
       "[mc]\nrealizations = 6\nseed = 3\nenergies = 0\nscales = 1\nsites = center\n"
       "[output]\ndirectory = out\nformats = csv\n");
  REQUIRE(run_tool("run " + (dir / "mc.cfg").string() + " --out-dir " + (dir / "a").string(),
                   dir / "la.txt") == 0);
  REQUIRE(run_tool("run " + (dir / "mc.cfg").string() + " --out-dir " + (dir / "b").string() +
                       " --seed 99",
                   dir / "lb.txt") == 0);
  REQUIRE(run_tool("run " + (dir / "mc.cfg").string() + " --out-dir " + (dir / "c").string() +
                       " --seed 3",
                   dir / "lc.txt") == 0);
  const std::string a = slurp(dir / "a" / "mc_site_3.csv");
  CHECK(a != slurp(dir / "b" / "mc_site_3.csv"));
  CHECK(a == slurp(dir / "c" / "mc_site_3.csv"));
}
