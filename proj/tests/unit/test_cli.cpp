#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"
#include "seqlr/cli.hpp"
#include "seqlr/grid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& scratch() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("seqlr_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  static const struct Cleanup {
    ~Cleanup() { fs::remove_all(root); }
  } cleanup;
  return root;
}

struct Result {
  int code;
  std::string out;
  std::string err;
  fs::path dir;
};

Result run(const std::string& command, const std::string& name, const std::string& ini, bool gnuplot = false,
           const std::string& run_keys = "") {
  const fs::path dir = scratch() / name;
  fs::create_directories(dir);
  std::ofstream(dir / "run.ini") << "[run]\noutput = out\n" << run_keys << ini;
  std::ostringstream out, err;
  const int code = seqlr::cli::run({command, dir / "run.ini", gnuplot}, out, err);
  return {code, out.str(), err.str(), dir / "out"};
}

json read_json(const fs::path& p) { return json::parse(std::ifstream(p)); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Every output file except the manifest, which records wall time.
std::map<std::string, std::string> outputs(const fs::path& dir) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      m[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return m;
}

std::string doubling(const std::string& experiment_keys = "") {
  return R"(
[grid]
n = 128

[experiment]
mode = deterministic
burn_in = 60
)" + experiment_keys + R"(
[reference]
degree = 2

[kick]
field = 1:0:0.15915494309189535
)";
}

std::string noisy(const std::string& experiment_keys = "") {
  return R"(
[grid]
n = 128

[experiment]
mode = noisy
eps_list = 1e-2, 3e-3, 1e-3
burn_in = 40
)" + experiment_keys + R"(
[reference]
degree = 2

[schedule]
kind = periodic
maps = doubling, bent

[map.doubling]
degree = 2

[map.bent]
degree = 2
terms = 1:0:0.05

[noise]
preset = bump:0.5,0.15,0.3

[drift]
dot = 2:0:1

[simulate]
samples = 200000
steps = 4
bins = 32
seed = 9
eps = 0.05
)";
}

}  // namespace

TEST_CASE("certify") {
  SUBCASE("doubling passes") {
    const Result r = run("certify", "certify_ok", doubling());
    CHECK(r.code == 0);
    const json c = read_json(r.dir / "certificate.json");
    CHECK(c["status"] == "numerically certified");
    CHECK(c["delta_star"]["value"].get<double>() > 0.0);
    const json m = read_json(r.dir / "manifest.json");
    CHECK(m["command"] == "certify");
    CHECK(m["exit_code"] == 0);
    CHECK(m["config_hash"].get<std::string>().size() == 16);
    CHECK(m.contains("versions"));
    CHECK(m.contains("wall_time_seconds"));
  }
  SUBCASE("non-expanding reference") {
    const Result r = run("certify", "certify_bad",
                         "[grid]\nn = 128\n[experiment]\nmode = deterministic\n"
                         "[reference]\ndegree = 2\nterms = 1:0:0.2\n[kick]\nfield = 1:0:0.1\n");
    CHECK(r.code == 2);
    CHECK(r.err.find("NotExpanding") != std::string::npos);
  }
  SUBCASE("missing field") {
    const Result r = run("certify", "certify_missing", "[experiment]\nmode = deterministic\n[reference]\ndegree = 2\n");
    CHECK(r.code == 1);
    CHECK(r.err.find("grid.n") != std::string::npos);
  }
  SUBCASE("unparsable field") {
    const Result r = run("certify", "certify_garbage", "[grid]\nn = many\n");
    CHECK(r.code == 1);
    CHECK(r.err.find("grid.n") != std::string::npos);
  }
}

TEST_CASE("unknown command") {
  const Result r = run("explode", "unknown", doubling());
  CHECK(r.code == 1);
  CHECK(r.err.find("explode") != std::string::npos);
}

TEST_CASE("equivariant") {
  SUBCASE("constant doubling schedule is uniform") {
    const Result r = run("equivariant", "equiv_uniform", doubling("two_seed = true\n"));
    REQUIRE(r.code == 0);
    const json j = read_json(r.dir / "equivariant.json");
    REQUIRE(j["indices"].size() > 0);
    for (const auto& e : j["indices"]) {
      const seqlr::DensityGrid mu = seqlr::read_density_csv(r.dir / e["file"].get<std::string>());
      CHECK(seqlr::norm_sup(mu - seqlr::DensityGrid::constant(128, 1.0)) <= 1e-8);
    }
    CHECK(j["uniqueness"]["agree"] == true);
  }
  SUBCASE("unconverged pullback exits 3") {
    const Result r = run("equivariant", "equiv_stuck",
                         "[grid]\nn = 128\n[experiment]\nmode = deterministic\nburn_in = 2\n"
                         "pullback_tolerance = 1e-15\n[reference]\ndegree = 2\n"
                         "[schedule]\nkind = periodic\nmaps = a, b\n[map.a]\ndegree = 2\n"
                         "[map.b]\ndegree = 2\nterms = 1:0:0.01\n[kick]\nfield = 1:0:0.1\n");
    CHECK(r.code == 3);
    CHECK(r.err.find("NotConverged") != std::string::npos);
    CHECK(read_json(r.dir / "manifest.json")["exit_code"] == 3);
  }
}

TEST_CASE("respond") {
  SUBCASE("closed-form doubling validates") {
    const Result r = run("respond", "respond_ok", doubling("eps_list = 1e-2, 1e-3\nreport = 2\n"));
    REQUIRE(r.code == 0);
    const json v = read_json(r.dir / "validation.json");
    CHECK(v["pass"] == true);
    for (const auto& e : v["entries"])
      if (e["eps"].get<double>() == 1e-3) CHECK(e["D"].get<double>() <= 1e-2);
    const json rj = read_json(r.dir / "response.json");
    CHECK(rj["mass_ok"] == true);
    const int first = rj["indices"][0]["n"].get<int>();
    const seqlr::DensityGrid eta = seqlr::read_density_csv(r.dir / ("eta/eta_" + std::to_string(first) + ".csv"));
    const auto minus_cos = seqlr::DensityGrid::sample(128, [](double x) { return -std::cos(2 * M_PI * x); });
    CHECK(seqlr::norm_l1(eta - minus_cos) <= 1e-5);
  }
  SUBCASE("zero perturbation") {
    const Result r = run("respond", "respond_zero",
                         "[grid]\nn = 128\n[experiment]\nmode = deterministic\nburn_in = 60\nreport = 2\n"
                         "[reference]\ndegree = 2\n[kick]\nfield = 0:0:0\n");
    REQUIRE(r.code == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(r.dir / "eta")) {
      CHECK(seqlr::norm_sup(seqlr::read_density_csv(e.path())) == 0.0);
      ++files;
    }
    CHECK(files > 0);
  }
  SUBCASE("tail too large") {
    const Result r = run("respond", "respond_tail", doubling("truncation = 5\ntolerance = 1e-7\n"));
    CHECK(r.code == 4);
    CHECK(r.err.find("required truncation order K = ") != std::string::npos);
  }
  SUBCASE("noisy system validates") {
    const Result r = run("respond", "respond_noisy", noisy());
    CHECK(r.code == 0);
    CHECK(read_json(r.dir / "validation.json")["pass"] == true);
  }
  SUBCASE("kick too large for the eps list") {
    const Result r = run("respond", "respond_big_eps", doubling("eps_list = 5\n"));
    CHECK(r.code == 2);
    CHECK(r.err.find("KickTooLarge") != std::string::npos);
  }
}

TEST_CASE("memory") {
  const Result r = run("memory", "memory",
                       "[grid]\nn = 128\n[experiment]\nmode = deterministic\n[reference]\ndegree = 2\n"
                       "[schedule]\nkind = random\nmaps = a, b\nseed = 3\n[map.a]\ndegree = 2\n"
                       "[map.b]\ndegree = 2\nterms = 1:0:0.001\n[kick]\nfield = 1:0:0.1\n"
                       "[memory]\nstart = 5\nk_max = 12\n");
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(r.dir / "memory.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "k,w11,l1");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 13);
  const json j = read_json(r.dir / "memory.json");
  CHECK(j["fitted_rate"].get<double>() <= j["certified_rate"].get<double>());
}

TEST_CASE("simulate") {
  const Result r = run("simulate", "simulate", noisy(), true);
  REQUIRE(r.code == 0);
  CHECK(read_json(r.dir / "simulate.json")["l1_distance"].get<double>() <= 0.05);
  CHECK(fs::exists(r.dir / "histogram.csv"));
  CHECK(fs::exists(r.dir / "operator_histogram.csv"));
  CHECK(fs::exists(r.dir / "simulate.gp"));
  CHECK(run("simulate", "simulate_deterministic", doubling()).code == 2);
}

TEST_CASE("reproducibility") {
  SUBCASE("identical config gives identical files") {
    const Result a = run("simulate", "repeat_a", noisy());
    const Result b = run("simulate", "repeat_b", noisy());
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(outputs(a.dir) == outputs(b.dir));
  }
  SUBCASE("thread count does not change outputs") {
    const std::string ini = noisy("report = 2\n");
    const Result one = run("respond", "threads_1", ini, false, "threads = 1\n");
    const Result four = run("respond", "threads_4", ini, false, "threads = 4\n");
    REQUIRE(one.code == 0);
    REQUIRE(four.code == 0);
    CHECK(read_json(one.dir / "manifest.json")["threads"] == 1);
    CHECK(read_json(four.dir / "manifest.json")["threads"] == 4);
    CHECK(outputs(one.dir) == outputs(four.dir));
  }
}
