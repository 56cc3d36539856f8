#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  if (const char* p = std::getenv("PHASEMIX_CLI_PATH")) return p;
#ifdef PHASEMIX_CLI_PATH
  return PHASEMIX_CLI_PATH;
#else
  FAIL("PHASEMIX_CLI_PATH must point at the binary");
  return "";
#endif
}

struct RunResult {
  int exit_code;
  std::string output;
};

/// Runs the binary with the given arguments, capturing stdout.
RunResult run(const std::string& args) {
  const fs::path cap = fs::temp_directory_path() / "phasemix_cli_capture.txt";
  const std::string cmd =
      cli_path() + " " + args + " > " + cap.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(cap);
  std::stringstream ss;
  ss << in.rdbuf();
  return RunResult{raw == -1 ? -1 : WEXITSTATUS(raw), ss.str()};
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "phasemix_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("the exponential example emits a correct density grid") {
  const fs::path dir = work_dir();
  const auto res = run("example exponential --out " + dir.string());
  REQUIRE(res.exit_code == 0);
  REQUIRE(fs::exists(dir / "exponential_model.json"));
  REQUIRE(fs::exists(dir / "exponential_grid.csv"));
  REQUIRE(fs::exists(dir / "exponential_marginal1.csv"));
  REQUIRE(fs::exists(dir / "exponential_marginal2.csv"));

  const auto lines = read_lines(dir / "exponential_grid.csv");
  REQUIRE(lines.size() > 2);
  CHECK(lines[0].rfind("# alpha,", 0) == 0);
  CHECK(lines[1] == "t1,t2,region,value");

  // independent exponential clocks: the joint density is the mixture of the
  // per-regime products with rates (1,2) and (3,4), equal weights
  std::size_t checked = 0;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto f = split_csv(lines[i]);
    REQUIRE(f.size() == 4);
    const double t1 = std::stod(f[0]), t2 = std::stod(f[1]);
    const double v = std::stod(f[3]);
    if (f[2] == "Atom" || f[2] == "Diagonal") {
      CHECK(std::fabs(v) < 1e-14);  // no ties, no initial atom
      continue;
    }
    const double exact = 0.5 * 1.0 * 2.0 * std::exp(-t1 - 2.0 * t2) +
                         0.5 * 3.0 * 4.0 * std::exp(-3.0 * t1 - 4.0 * t2);
    CHECK(std::fabs(v - exact) < 1e-12);
    ++checked;
  }
  CHECK(checked > 6000);  // 81x81 grid minus the diagonal
}

TEST_CASE("validate accepts the shipped model and rejects corrupt input") {
  const fs::path dir = work_dir();
  REQUIRE(run("example birth-death --out " + dir.string()).exit_code == 0);
  const fs::path model = dir / "birth-death_model.json";
  REQUIRE(fs::exists(model));

  const auto good = run("validate --model " + model.string());
  CHECK(good.exit_code == 0);
  CHECK(nlohmann::json::parse(good.output)["ok"] == true);

  const fs::path bad = dir / "corrupt.json";
  std::ofstream(bad) << "{ not json";
  const auto res = run("validate --model " + bad.string());
  CHECK(res.exit_code == 1);
  CHECK(nlohmann::json::parse(res.output).contains("error"));
}

TEST_CASE("grid output is byte-identical across reruns") {
  const fs::path dir = work_dir();
  REQUIRE(run("example birth-death --out " + dir.string()).exit_code == 0);
  const std::string model = (dir / "birth-death_model.json").string();
  const fs::path g1 = dir / "grid_a.csv", g2 = dir / "grid_b.csv";
  const std::string args =
      "bivariate-grid --model " + model + " --max 4 --step 0.25 --out ";
  REQUIRE(run(args + g1.string()).exit_code == 0);
  REQUIRE(run(args + g2.string()).exit_code == 0);
  const std::string a = read_all(g1), b = read_all(g2);
  CHECK(!a.empty());
  CHECK(a == b);
}

TEST_CASE("a grid that misses the conditioning point appends the atom row") {
  const fs::path dir = work_dir();
  REQUIRE(run("example birth-death --out " + dir.string()).exit_code == 0);
  const std::string model = (dir / "birth-death_model.json").string();
  const fs::path out = dir / "grid_offset.csv";
  REQUIRE(run("bivariate-grid --model " + model +
              " --min 1 --max 1.5 --step 0.5 --out " + out.string())
              .exit_code == 0);
  const auto lines = read_lines(out);
  REQUIRE(lines.size() == 6);  // header + 2x2 grid + atom row
  CHECK(lines[0] == "t1,t2,region,value");
  const auto atom = split_csv(lines.back());
  REQUIRE(atom.size() == 4);
  CHECK(std::stod(atom[0]) == 0.0);
  CHECK(std::stod(atom[1]) == 0.0);
  CHECK(atom[2] == "Atom");
  CHECK(std::fabs(std::stod(atom[3])) < 1e-12);  // alive at time zero
}

TEST_CASE("the density decomposition sums to one on a midpoint lattice") {
  const fs::path dir = work_dir();
  // shared-clock variant: the law carries both a diagonal and an AC part
  REQUIRE(run("example marshall-olkin --a3 0.5 --b3 1.0 --out " + dir.string())
              .exit_code == 0);
  const std::string model = (dir / "marshall-olkin_model.json").string();
  const fs::path out = dir / "mo_grid.csv";
  const double h = 0.05;
  REQUIRE(run("bivariate-grid --model " + model +
              " --state 1 --min 0.025 --max 12 --step 0.05 --out " +
              out.string())
              .exit_code == 0);

  const auto lines = read_lines(out);
  REQUIRE(lines.size() > 2);
  std::map<std::pair<int, int>, double> cell;
  std::map<int, double> diag;
  int n_cells = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv(lines[i]);
    REQUIRE(f.size() == 4);
    const int a = static_cast<int>(std::lround((std::stod(f[0]) - h / 2) / h));
    const int b = static_cast<int>(std::lround((std::stod(f[1]) - h / 2) / h));
    if (f[2] == "Atom") continue;
    if (f[2] == "Diagonal") {
      diag[a] = std::stod(f[3]);
    } else {
      cell[{a, b}] = std::stod(f[3]);
      n_cells = std::max(n_cells, a + 1);
    }
  }
  double total = 0.0;
  for (const auto& [ij, v] : cell) total += v * h * h;
  for (const auto& [i, f0] : diag) {
    total += f0 * h;  // line mass along the diagonal
    // the lattice has no AC sample at (i,i); average the two neighbours
    double acc = 0.0;
    int cnt = 0;
    for (const auto& nb : {std::pair{i, i + 1}, std::pair{i + 1, i},
                           std::pair{i, i - 1}, std::pair{i - 1, i}}) {
      const auto it = cell.find(nb);
      if (it != cell.end()) {
        acc += it->second;
        ++cnt;
      }
    }
    if (cnt > 0) total += (acc / cnt) * h * h;
  }
  CHECK(std::fabs(total - 1.0) < 0.02);
}

TEST_CASE("multivariate survival matches the independent-clock closed form") {
  const fs::path dir = work_dir();
  REQUIRE(run("example exponential --out " + dir.string()).exit_code == 0);
  const std::string model = (dir / "exponential_model.json").string();
  const auto res =
      run("multivariate --model " + model + " --state 1 --times 1,2");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.output);
  const double exact = 0.5 * std::exp(-(1.0 + 2.0 * 2.0)) +
                       0.5 * std::exp(-(3.0 + 4.0 * 2.0));
  CHECK(std::fabs(j["survival"].get<double>() - exact) < 1e-12);
}

TEST_CASE("simulation output is seed-deterministic") {
  const fs::path dir = work_dir();
  REQUIRE(run("example birth-death --out " + dir.string()).exit_code == 0);
  const std::string model = (dir / "birth-death_model.json").string();
  const std::string args = "simulate --model " + model +
                           " --kind surv --times 1,2 --paths 20000 --seed 77";
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.output == b.output);
  const auto c = run("simulate --model " + model +
                     " --kind surv --times 1,2 --paths 20000 --seed 78");
  REQUIRE(c.exit_code == 0);
  CHECK(nlohmann::json::parse(a.output)["estimate"] !=
        nlohmann::json::parse(c.output)["estimate"]);
}
