#include "catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "deriloss/cli.hpp"
#include "deriloss/csv.hpp"
#include "deriloss/svg.hpp"

using namespace deriloss;
namespace fs = std::filesystem;

namespace {
struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "deriloss");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  return {code, o.str(), e.str()};
}

std::string scratch(const std::string& name) {
  const auto d = fs::current_path() / "cli_test_out" / name;
  fs::create_directories(d);
  return d.string();
}
}  // namespace

TEST_CASE("classify examples") {
  const auto out = scratch("classify");
  auto r = run({"classify", "--omega", "holder:0.5", "--theta", "power:1:1", "--out", out});
  CHECK(r.code == 0);
  CHECK(r.out.find("regime=Finite") != std::string::npos);
  CHECK(fs::exists(out + "/classify.csv"));
  r = run({"classify", "--omega", "linear", "--theta", "bounded:1", "--out", out});
  CHECK(r.out.find("regime=NoLoss") != std::string::npos);
}

TEST_CASE("table5 reports four finite rows and four flips") {
  const auto r = run({"table5", "--out", scratch("t5")});
  CHECK(r.code == 0);
  std::size_t finite = 0, flipped = 0, pos = 0;
  while ((pos = r.out.find("verdict=Finite", pos)) != std::string::npos) ++finite, ++pos;
  pos = 0;
  while ((pos = r.out.find("verdict=not-Finite", pos)) != std::string::npos) ++flipped, ++pos;
  CHECK(finite == 4);
  CHECK(flipped == 4);
}

TEST_CASE("config file with flag overrides") {
  const auto dir = scratch("cfg");
  {
    std::ofstream f(dir + "/run.cfg");
    f << "# comment\nomega = linear\ntheta=bounded:1\nmu2=3\n";
  }
  cli::RunConfig cfg;
  cli::apply_config(cfg, cli::read_config_file(dir + "/run.cfg"));
  CHECK(cfg.omega == "linear");
  CHECK(cfg.mu2 == 3.0);
  // flag wins over the file
  const auto r = run({"classify", "--config", dir + "/run.cfg", "--omega", "holder:0.5", "--theta", "power:1:1",
                      "--out", dir});
  CHECK(r.out.find("omega=holder:0.5") != std::string::npos);
  CHECK(r.out.find("regime=Finite") != std::string::npos);
}

TEST_CASE("config errors exit 2") {
  const auto dir = scratch("bad");
  {
    std::ofstream f(dir + "/bad.cfg");
    f << "colour=blue\n";
  }
  CHECK(run({"classify", "--config", dir + "/bad.cfg", "--out", dir}).code == 2);
  CHECK(run({"classify", "--mu1", "3", "--mu2", "2", "--out", dir}).code == 2);
  CHECK(run({"classify", "--omega", "nosuch", "--out", dir}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("construct writes its files and maps hypothesis failures to 3") {
  const auto dir = scratch("construct");
  auto r = run({"construct", "--lambda", "1000", "--membership-samples", "20000", "--out", dir});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir + "/coefficient.csv"));
  CHECK(fs::exists(dir + "/membership.txt"));
  CHECK(fs::exists(dir + "/guarantee.txt"));
  r = run({"construct", "--omega", "holder:0.25", "--theta", "power:2:1", "--lambda", "3", "--out", dir});
  CHECK(r.code == 3);
}

TEST_CASE("verify: default pair, NoLoss pair, self-test") {
  const auto dir = scratch("verify");
  auto r = run({"verify", "--samples", "500", "--out", dir});
  CHECK(r.code == 0);
  CHECK(r.out.find("result PASS") != std::string::npos);
  r = run({"verify", "--omega", "linear", "--theta", "bounded:1", "--samples", "500", "--out", dir});
  CHECK(r.code == 0);
  CHECK(r.out.find("lower bound not applicable") != std::string::npos);
  r = run({"verify", "--self-test", "--omega", "holder:0.25", "--theta", "power:2:1", "--lambda-min", "1e5",
           "--lambda-max", "1e7", "--lambda-points", "3", "--samples", "500", "--out", dir});
  CHECK(r.code == 1);
}

TEST_CASE("plot is deterministic and handles bad input") {
  const auto dir = scratch("plot");
  run({"classify", "--out", dir});
  auto r = run({"plot", "--input", dir + "/classify.csv", "--out", dir});
  REQUIRE(r.code == 0);
  const auto first = io::read_file(dir + "/classify.svg");
  run({"plot", "--input", dir + "/classify.csv", "--out", dir});
  CHECK(io::read_file(dir + "/classify.svg") == first);
  CHECK(first.find("lambda (log)") != std::string::npos);  // semi-log: log x, linear m
  CHECK(first.find("m (log)") == std::string::npos);

  {
    std::ofstream f(dir + "/empty.csv");
  }
  CHECK(run({"plot", "--input", dir + "/empty.csv", "--out", dir}).code == 2);
  CHECK(run({"plot", "--input", dir + "/missing.csv", "--out", dir}).code == 2);
}

TEST_CASE("energy trace csv plots E") {
  const std::string csv = "t,u,u_prime,E,F\n0,0,1,1,1.5\n0.5,0.1,2,10,12\n1,0,3,1000,1500\n";
  const auto svg = svg::plot_csv(csv);
  CHECK(svg.find("E (log)") != std::string::npos);
  CHECK(svg.rfind("<svg", 0) == 0);
}
