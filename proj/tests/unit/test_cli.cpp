// Black-box tests of the hmfem executable.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(HMFEM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int s = std::system(cmd.c_str());
  return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hmfem_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("cli: manufactured solve") {
  const fs::path d = scratch("solve");
  REQUIRE(run("solve --problem manufactured -q --out " + d.string()) == 0);
  const auto csv = lines(d / "trace.csv");
  REQUIRE(csv.size() == 2);
  CHECK(csv[0] == "iter,nt,n_sigma,n_u,n_lambda,eta,osc,bar_eta,err_A,marked,pcg_iters,wall_ms");
  CHECK(std::stod(split(csv[1])[8]) <= 1e-8);
  for (const char* f : {"mesh.txt", "indicators.csv", "summary.txt"}) CHECK(fs::exists(d / f));
  fs::remove_all(d);
}

TEST_CASE("cli: exit codes") {
  const fs::path d = scratch("codes");
  CHECK(run("solve --theta 1.5 --out " + d.string()) == 2);
  CHECK(run("solve --set colour=blue --out " + d.string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("solve --r notanumber") == 2);
  CHECK(run("adapt -q --set preconditioner=ic0 --set pcg_maxit=1 --max-elements 200 --out " + d.string()) == 3);
  CHECK(run("solve --problem from-files --mesh /nonexistent/m.txt --out " + d.string()) == 1);
  fs::remove_all(d);
}

TEST_CASE("cli: config file and overrides") {
  const fs::path d = scratch("cfg");
  fs::create_directories(d);
  {
    std::ofstream os(d / "run.cfg");
    os << "# test\nproblem = manufactured\nr = 1\n";
  }
  REQUIRE(run("solve -q --config " + (d / "run.cfg").string() + " --mu 2 --out " + (d / "o").string()) == 0);
  const auto sum = lines(d / "o" / "summary.txt");
  CHECK(std::find(sum.begin(), sum.end(), "r=1") != sum.end());
  CHECK(std::find(sum.begin(), sum.end(), "mu=2") != sum.end());
  fs::remove_all(d);
}

TEST_CASE("cli: uniform adapt quadruples and reruns are identical apart from wall time") {
  const fs::path a = scratch("ua"), b = scratch("ub");
  REQUIRE(run("adapt -q --uniform --max-elements 400 --out " + a.string()) == 0);
  REQUIRE(run("adapt -q --uniform --max-elements 400 --out " + b.string()) == 0);
  const auto ra = lines(a / "trace.csv"), rb = lines(b / "trace.csv");
  REQUIRE(ra.size() == rb.size());
  REQUIRE(ra.size() >= 4);
  for (std::size_t i = 2; i < ra.size(); ++i) CHECK(std::stoul(split(ra[i])[1]) == 4 * std::stoul(split(ra[i - 1])[1]));
  for (std::size_t i = 1; i < ra.size(); ++i) {
    auto fa = split(ra[i]), fb = split(rb[i]);
    fa.pop_back();
    fb.pop_back();
    CHECK(fa == fb);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("cli: adaptive reruns are identical apart from wall time") {
  const fs::path a = scratch("aa"), b = scratch("ab");
  REQUIRE(run("adapt -q --max-elements 300 --lambda 100 --out " + a.string()) == 0);
  REQUIRE(run("adapt -q --max-elements 300 --lambda 100 --out " + b.string()) == 0);
  const auto ra = lines(a / "trace.csv"), rb = lines(b / "trace.csv");
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 1; i < ra.size(); ++i) {
    auto fa = split(ra[i]), fb = split(rb[i]);
    fa.pop_back();
    fb.pop_back();
    CHECK(fa == fb);
  }
  CHECK(lines(a / "indicators.csv") == lines(b / "indicators.csv"));
  CHECK(lines(a / "mesh.txt") == lines(b / "mesh.txt"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("cli: mesh export") {
  const fs::path d = scratch("export");
  REQUIRE(run("mesh-export --out " + d.string()) == 0);
  const auto m = lines(d / "mesh.txt");
  REQUIRE(!m.empty());
  CHECK(m[0] == "8 6 8");
  CHECK(m.size() == 1 + 8 + 6 + 8);
  fs::remove_all(d);
}
