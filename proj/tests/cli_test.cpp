#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coc/cli.hpp"
#include "oracles.hpp"

using namespace coc;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "coc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "coc-cli-test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const std::string iris = oracle::data_path("iris.csv");

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("plot writes the iris svg") {
  const auto out = scratch("iris.svg");
  const auto r = run({"plot", iris, "--out", out.string()});
  CHECK(r.code == 0);
  const auto svg = slurp(out);
  CHECK(oracle::count_elements(svg, "circle", "ring") == 4);
  CHECK(oracle::count_elements(svg, "polyline", "case") == 150);
  CHECK(r.out.find("150 polylines") != std::string::npos);
}

TEST_CASE("plot to stdout and as a drawlist") {
  const auto svg = run({"plot", iris, "--hulls", "--highlight", "1,2"});
  CHECK(svg.code == 0);
  CHECK(oracle::count_elements(svg.out, "polygon", "hull") == 3);
  const auto drawlist = run({"plot", iris, "--drawlist", "--closed"});
  const auto j = nlohmann::json::parse(drawlist.out);
  CHECK(j["polylines"][0]["closed"] == true);
}

TEST_CASE("plot honors a config file and rejects unknown fields") {
  const auto good = scratch("config.json");
  std::ofstream(good) << R"({"schema_version": 1,
    "axes": {"axes": [{"attr": 3, "position": 0, "radius": 1},
                      {"attr": 2, "position": 1, "radius": 2}]},
    "style": {"ring_color": "#101010"}})";
  const auto r = run({"plot", iris, "--config", good.string()});
  CHECK(r.code == 0);
  CHECK(oracle::count_elements(r.out, "circle", "ring") == 2);
  CHECK(r.out.find("#101010") != std::string::npos);

  const auto bad = scratch("bad.json");
  std::ofstream(bad) << R"({"schema_version": 1, "colour": "red"})";
  const auto e = run({"plot", iris, "--config", bad.string()});
  CHECK(e.code == 2);
  CHECK(nlohmann::json::parse(e.err)["error"].get<std::string>().find("colour") != std::string::npos);

  const auto old = scratch("old.json");
  std::ofstream(old) << R"({"schema_version": 0})";
  CHECK(run({"plot", iris, "--config", old.string()}).code == 2);
}

TEST_CASE("knne output is deterministic for a seed") {
  const auto a = run({"knne", iris, "--K", "21", "--seed", "7"});
  const auto b = run({"knne", iris, "--K", "21", "--seed", "7"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("ensemble accuracy") != std::string::npos);
}

TEST_CASE("knn prints fold accuracies") {
  const auto r = run({"knn", iris, "--k", "5", "--seed", "2", "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["cv"]["folds"].size() == 10);
  CHECK(j["k"] == 5);
}

TEST_CASE("sac prints the residual overlap percentage") {
  const auto r = run({"sac", oracle::data_path("wbc9.csv"), "--drop-missing", "--rho", "1.0", "--min-region", "0"});
  CHECK(r.code == 0);
  CHECK(r.out.find("residual overlap:") != std::string::npos);
  const auto j = nlohmann::json::parse(
      run({"sac", oracle::data_path("wbc9.csv"), "--drop-missing", "--min-region", "0", "--json"}).out);
  CHECK(j.contains("residual_percent"));
}

TEST_CASE("linear and gic subcommands") {
  const auto lin = run({"linear", iris, "--min-region", "0", "--json"});
  REQUIRE(lin.code == 0);
  CHECK(nlohmann::json::parse(lin.out)["residual"].size() == 0);
  const auto gic = run({"gic", iris, "--kinds", "sac,linear", "--max-iter", "3"});
  CHECK(gic.code == 0);
  CHECK(gic.out.find("iterations: 3") != std::string::npos);
  CHECK(run({"gic", iris, "--kinds", "tree"}).code == 1);
}

TEST_CASE("straighten reports the residual and maps errors to exit 2") {
  const auto r = run({"straighten", iris, "--case", "0", "--json"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["residual"].get<double>() < 1e-9);
  const auto d = load_csv(iris, std::string("class"));
  std::size_t zero = 0;
  for (const auto& c : d.cases()) {
    if (c.norm[0] == 0.0) zero = c.id;
  }
  const auto e = run({"straighten", iris, "--case", std::to_string(zero), "--method", "radius"});
  CHECK(e.code == 2);
  const auto err = nlohmann::json::parse(e.err);
  CHECK(err["hint"].get<std::string>().find("rotation") != std::string::npos);
  CHECK(e.err.find('\n') == e.err.size() - 1);
}

TEST_CASE("or-reduce prints the metric and writes an svg") {
  const auto out = scratch("or.svg");
  const auto r = run({"or-reduce", iris, "--bins", "100", "--tau", "3", "--out", out.string(), "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["total_after"].get<std::size_t>() < j["total_before"].get<std::size_t>());
  const auto svg = slurp(out);
  CHECK(oracle::count_elements(svg, "polyline", "case") == 150 - j["suppressed_cases"].size());
}

TEST_CASE("gen is deterministic and loadable") {
  const auto a = run({"gen", "--per-class", "5", "--attributes", "3", "--seed", "4"});
  const auto b = run({"gen", "--per-class", "5", "--attributes", "3", "--seed", "4"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const auto d = parse_csv(a.out, kLastColumn);
  CHECK(d.size() == 10);
  CHECK(d.dimension() == 3);
}

TEST_CASE("usage and data errors use fixed exit codes") {
  const auto none = run({});
  CHECK(none.code == 1);
  CHECK(nlohmann::json::parse(none.err)["kind"] == "usage");
  CHECK(run({"plot"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"knn", iris, "--k", "many"}).code == 1);
  CHECK(run({"plot", "/definitely/missing.csv"}).code == 2);
  CHECK(run({"knn", iris, "--label", "species"}).code == 2);
  CHECK(run({"knn", iris, "--k", "0"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

}
