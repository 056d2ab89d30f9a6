// Black-box checks of the batch front end. The binary path arrives via
// the STABLEMV_BIN environment variable set by the build.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* p = std::getenv("STABLEMV_BIN");
  REQUIRE(p != nullptr);
  return p;
}

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = bin() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path make_temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("stablemv-test-" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  REQUIRE(out.good());
  out << content;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> list_with_suffix(const fs::path& dir, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string name = e.path().filename().string();
    if (name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(e.path());
  }
  return out;
}

const char* kStudyConfig = R"({
  "noise": {"dim": 1, "alpha": 1.5, "mode": "isotropic", "scale": 1.0},
  "drift": {"kind": "holder_mean", "a": 1.0, "c": 0.5, "beta": 0.75},
  "system": {"seed": 11, "particles": 16, "step": 0.0625, "horizon": 0.25},
  "study": {"grid": [0.015625, 0.03125, 0.0625, 0.125], "p": 1.0,
            "replications": 4, "groups": 2}
})";

}  // namespace

TEST_CASE("validate accepts a well-posed config") {
  fs::path dir = make_temp_dir("validate-ok");
  write_text(dir / "cfg.json", kStudyConfig);
  RunResult r = run("validate --config " + (dir / "cfg.json").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("config ok") != std::string::npos);
  // validate must not leave artifacts behind
  CHECK(list_with_suffix(dir, ".csv").empty());
  CHECK(list_with_suffix(dir, ".manifest.json").empty());
}

TEST_CASE("validate rejects a drift too rough for the noise") {
  fs::path dir = make_temp_dir("validate-bad");
  write_text(dir / "cfg.json", kStudyConfig);
  RunResult r = run("validate --config " + (dir / "cfg.json").string() +
                    " --set noise.alpha=1.2 --set drift.beta=0.3");
  CHECK(r.code == 2);
  CHECK(r.out.find("(H2)") != std::string::npos);
}

TEST_CASE("missing seed is a config error") {
  RunResult r = run("validate");
  CHECK(r.code == 2);
  CHECK(r.out.find("seed") != std::string::npos);
}

TEST_CASE("unknown subcommand exits with usage error") {
  RunResult r = run("frobnicate");
  CHECK(r.code == 2);
}

TEST_CASE("wasserstein subcommand matches the 1-D closed form") {
  fs::path dir = make_temp_dir("wass");
  write_text(dir / "a.csv", "x\n0\n1\n");
  write_text(dir / "b.csv", "x\n2\n5\n");
  RunResult r = run("wasserstein " + (dir / "a.csv").string() + " " +
                    (dir / "b.csv").string() + " -p 1");
  CHECK(r.code == 0);
  CHECK(std::stod(r.out) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("study artifacts are identical across thread counts") {
  fs::path cfg_dir = make_temp_dir("det-cfg");
  write_text(cfg_dir / "cfg.json", kStudyConfig);
  fs::path d1 = make_temp_dir("det-t1");
  fs::path d4 = make_temp_dir("det-t4");

  RunResult r1 = run("study-moment --config " + (cfg_dir / "cfg.json").string() +
                     " --threads 1 --out-dir " + d1.string());
  RunResult r4 = run("study-moment --config " + (cfg_dir / "cfg.json").string() +
                     " --threads 4 --out-dir " + d4.string());
  CHECK(r1.code == r4.code);

  auto c1 = list_with_suffix(d1, ".csv");
  auto c4 = list_with_suffix(d4, ".csv");
  REQUIRE(c1.size() == 1);
  REQUIRE(c4.size() == 1);
  CHECK(slurp(c1[0]) == slurp(c4[0]));

  auto j1 = list_with_suffix(d1, ".json");
  auto j4 = list_with_suffix(d4, ".json");
  // drop the manifests, they carry wall-clock times
  auto keep_report = [](std::vector<fs::path>& v) {
    std::vector<fs::path> out;
    for (auto& p : v)
      if (p.filename().string().find("manifest") == std::string::npos) out.push_back(p);
    v = out;
  };
  keep_report(j1);
  keep_report(j4);
  REQUIRE(j1.size() == 1);
  REQUIRE(j4.size() == 1);
  CHECK(slurp(j1[0]) == slurp(j4[0]));
}

TEST_CASE("study run writes a manifest naming its artifacts") {
  fs::path cfg_dir = make_temp_dir("manifest-cfg");
  write_text(cfg_dir / "cfg.json", kStudyConfig);
  fs::path out = make_temp_dir("manifest-out");
  RunResult r = run("study-moment --config " + (cfg_dir / "cfg.json").string() +
                    " --out-dir " + out.string());
  auto manifests = list_with_suffix(out, ".manifest.json");
  REQUIRE(manifests.size() == 1);
  std::string m = slurp(manifests[0]);
  CHECK(m.find("\"command\"") != std::string::npos);
  CHECK(m.find("study-moment") != std::string::npos);
  CHECK(m.find(".csv") != std::string::npos);
  CHECK(m.find("\"version\"") != std::string::npos);
  CHECK((r.code == 0 || r.code == 1));
  CHECK(list_with_suffix(out, ".tmp").empty());
}

TEST_CASE("seed flag overrides the config seed") {
  fs::path cfg_dir = make_temp_dir("seed-cfg");
  write_text(cfg_dir / "cfg.json", kStudyConfig);
  fs::path out = make_temp_dir("seed-out");
  RunResult r = run("simulate --config " + (cfg_dir / "cfg.json").string() +
                    " --seed 777 --out-dir " + out.string());
  CHECK(r.code == 0);
  auto jsons = list_with_suffix(out, ".json");
  bool found = false;
  for (auto& p : jsons) found = found || slurp(p).find("777") != std::string::npos;
  CHECK(found);
}
