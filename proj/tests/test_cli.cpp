#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hil/config.hpp"

namespace fs = std::filesystem;
using namespace hil;

namespace {

const fs::path kWork = fs::temp_directory_path() / "hil_cli_test";

int run(const std::string& args) {
  std::string cmd = std::string(HIL_CLI_PATH) + " " + args + " >" +
                    (kWork / "stdout.txt").string() + " 2>" +
                    (kWork / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

// The only output directory under root (runs use distinct --out roots).
fs::path only_dir(const fs::path& root) {
  for (const auto& e : fs::directory_iterator(root)) return e.path();
  throw std::runtime_error("no output directory under " + root.string());
}

struct Setup {
  Setup() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    write(kWork / "p_small.cfg",
          "[grid]\nn = 31\n[modality]\nkind = p-small\np = 0.5\n"
          "[boundary]\nf1 = x1\n");
    write(kWork / "aet.cfg",
          "[grid]\nn = 24\n[modality]\nkind = aet\np = 0.5\n"
          "[boundary]\nf1 = x1\nf2 = x2\n");
  }
};
const Setup setup;

}  // namespace

TEST_CASE("config parsing, defaults, and hash") {
  Scenario s = parse_scenario("");
  CHECK(s.n == 31);
  CHECK(s.modality == "aet");
  CHECK(s.hash == "cbf29ce484222325");  // FNV-1a offset basis for empty input

  Scenario t = parse_scenario(
      "[grid]\nn = 63\n[modality]\nkind = qpat  # comment\nlambda = 0.2\n"
      "[boundary]\nf1 = x1\nf2 = exp 0.1 1 0\n[random]\nseed = 9\n");
  CHECK(t.n == 63);
  CHECK(t.modality == "qpat");
  CHECK(t.lambda == 0.2);
  CHECK(t.boundary.size() == 2);
  CHECK(t.seed == 9);
  CHECK(t.hash != s.hash);
  CHECK(parse_scenario("[grid]\nn = 63\n").hash == parse_scenario("[grid]\nn = 63\n").hash);

  CHECK_THROWS_AS(parse_scenario("key value\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("[grid]\nn = banana\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("[modality]\nkind = nosuch\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("[modality]\nkind = aet\np = 0\n"), ConfigError);
}

TEST_CASE("recipe families") {
  Grid g = make_grid(31);
  DomainMasks m = make_masks(g);
  Rng rng(3);

  ScalarField c = coefficient_recipe(g, m, "constant 0.7", rng);
  CHECK(c.v[0] == cplx(0.7));
  CHECK(c.bd.has_value());
  CHECK(c.bd->bottom[0] == cplx(0.7));

  ScalarField b = coefficient_recipe(g, m, "gaussian-bump 0.5 0.5 60 1.0", rng);
  CHECK(std::abs(b.at(15, 15)) > 0.9);
  CHECK(std::abs(b.at(0, 0)) == 0.0);  // outside Omega'' the cutoff vanishes

  Rng ra(5), rb(5);
  ScalarField r1 = coefficient_recipe(g, m, "random-smooth 2 0.5", ra);
  ScalarField r2 = coefficient_recipe(g, m, "random-smooth 2 0.5", rb);
  for (int k = 0; k < g.count(); ++k) CHECK(r1.v[k] == r2.v[k]);

  Boundary f = boundary_recipe(g, "affine 1 0.5 0.25");
  CHECK(std::abs(f.bottom[0] - cplx(1.0 + 0.5 * g.x(0) + 0.25 * 0.0)) < 1e-15);
  CHECK_THROWS_AS(coefficient_recipe(g, m, "nosuch 1", rng), ConfigError);
  CHECK_THROWS_AS(coefficient_recipe(g, m, "gaussian-bump 0.5", rng), ConfigError);
  CHECK_THROWS_AS(boundary_recipe(g, "nosuch"), ConfigError);
}

TEST_CASE("symbol-audit demo returns elliptic with exit 0") {
  fs::path out = kWork / "out_audit";
  CHECK(run("--config " + (kWork / "p_small.cfg").string() + " --out " + out.string() +
            " symbol-audit") == 0);
  std::string csv = slurp(only_dir(out) / "audit.csv");
  CHECK(csv.find("# config ") == 0);
  CHECK(csv.find("ELLIPTIC") != std::string::npos);
}

TEST_CASE("spectrum demo reports empty kernel for the stacked pair") {
  fs::path out = kWork / "out_spec";
  CHECK(run("--config " + (kWork / "aet.cfg").string() + " --out " + out.string() +
            " spectrum") == 0);
  CHECK(slurp(kWork / "stdout.txt").find("kernel_dim 0") != std::string::npos);
  std::string csv = slurp(only_dir(out) / "spectrum.csv");
  CHECK(csv.find("index,sigma") != std::string::npos);
}

TEST_CASE("invalid config exits 1 and names the field") {
  write(kWork / "bad.cfg", "[modality]\nkind = aet\np = -1\n");
  CHECK(run("--config " + (kWork / "bad.cfg").string() + " forward") == 1);
  CHECK(slurp(kWork / "stderr.txt").find("modality.p") != std::string::npos);
  CHECK(run("--config " + (kWork / "missing.cfg").string() + " forward") == 1);
}

TEST_CASE("reruns are byte-identical") {
  fs::path a = kWork / "det_a", b = kWork / "det_b";
  std::string base = "--config " + (kWork / "aet.cfg").string();
  REQUIRE(run(base + " --out " + a.string() + " forward") == 0);
  REQUIRE(run(base + " --out " + b.string() + " forward") == 0);
  for (const char* f : {"forward_1.txt", "forward_1.bin", "forward_2.txt",
                        "forward_2.bin", "forward_1.meta"})
    CHECK(slurp(only_dir(a) / f) == slurp(only_dir(b) / f));

  REQUIRE(run(base + " --out " + a.string() + " linearize") == 0);
  REQUIRE(run(base + " --out " + b.string() + " linearize") == 0);
  CHECK(slurp(only_dir(a) / "frechet.csv") == slurp(only_dir(b) / "frechet.csv"));
  CHECK(slurp(only_dir(a) / "op.bin") == slurp(only_dir(b) / "op.bin"));
}

TEST_CASE("forward dumps load back through the binary format") {
  fs::path out = kWork / "out_fwd";
  REQUIRE(run("--config " + (kWork / "aet.cfg").string() + " --out " + out.string() +
              " forward") == 0);
  std::ifstream bin(only_dir(out) / "forward_1.bin", std::ios::binary);
  ScalarField f = load_grid_binary(bin);
  CHECK(f.grid.n == 24);
  CHECK(std::abs(f.v[f.grid.idx(12, 12)]) > 0.0);
}

TEST_CASE("grid override changes the emitted grid") {
  fs::path out = kWork / "out_n";
  REQUIRE(run("--config " + (kWork / "aet.cfg").string() + " --out " + out.string() +
              " --n 16 forward") == 0);
  std::ifstream bin(only_dir(out) / "forward_1.bin", std::ios::binary);
  CHECK(load_grid_binary(bin).grid.n == 16);
}
