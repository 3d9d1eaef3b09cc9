#include <doctest.h>

#include <cmath>
#include <set>

#include "coc/dataset.hpp"
#include "coc/error.hpp"
#include "coc/random.hpp"
#include "oracles.hpp"

using namespace coc;

TEST_SUITE("dataset") {

TEST_CASE("iris loads with four attributes and three classes") {
  const auto d = load_csv(oracle::data_path("iris.csv"), std::string("class"));
  CHECK(d.dimension() == 4);
  CHECK(d.size() == 150);
  REQUIRE(d.classes().size() == 3);
  CHECK(d.classes()[0].name == "setosa");
  CHECK(d.classes()[1].name == "versicolor");
  CHECK(d.classes()[2].name == "virginica");
  CHECK(d.class_counts() == std::vector<std::size_t>{50, 50, 50});
  for (const auto& c : d.cases()) {
    for (double v : c.norm) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("single row normalizes constant attributes to one half") {
  const auto d = parse_csv("a,b,label\n1,2,X\n", std::string("label"));
  REQUIRE(d.size() == 1);
  CHECK(d.cases()[0].norm == std::vector<double>{0.5, 0.5});
  CHECK(d.attributes()[0].constant());
}

TEST_CASE("wbc 30-d class counts") {
  const auto d = load_csv(oracle::data_path("wbc30.csv"), std::string("class"));
  CHECK(d.size() == 569);
  CHECK(d.dimension() == 30);
  CHECK(d.class_counts()[d.class_index("benign")] == 357);
  CHECK(d.class_counts()[d.class_index("malignant")] == 212);
}

TEST_CASE("wbc 9-d keeps complete cases when asked") {
  CHECK_THROWS_AS(load_csv(oracle::data_path("wbc9.csv"), std::string("class")), DataError);
  const auto d = load_csv(oracle::data_path("wbc9.csv"), std::string("class"), CsvOptions{true});
  CHECK(d.size() == 683);
  CHECK(d.dimension() == 9);
}

TEST_CASE("label column by index and the last-column default") {
  const std::string text = "label,x,y\nA,1,2\nB,3,4\n";
  const auto by_index = parse_csv(text, std::size_t{0});
  CHECK(by_index.dimension() == 2);
  CHECK(by_index.attributes()[0].name == "x");
  const auto last = parse_csv("x,y,label\n1,2,A\n3,4,B\n", kLastColumn);
  CHECK(last.classes().size() == 2);
}

TEST_CASE("csv errors name the row and column") {
  try {
    parse_csv("x,y,c\n1,2,A\n3,oops,B\n", std::string("c"));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("row 3") != std::string::npos);
    CHECK(what.find("y") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_csv("", std::string("c")), DataError);
  CHECK_THROWS_AS(parse_csv("x,c\n", std::string("c")), DataError);
  CHECK_THROWS_AS(parse_csv("x,y\n1,A\n", std::string("c")), DataError);
  CHECK_THROWS_AS(parse_csv("x,x,c\n1,2,A\n", std::string("c")), DataError);
}

TEST_CASE("normalize and denormalize invert each other") {
  const auto d = load_csv(oracle::data_path("iris.csv"), std::string("class"));
  for (const auto& c : d.cases()) {
    const auto back = d.denormalize(c.norm);
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == doctest::Approx(c.raw[i]).epsilon(1e-12));
    const auto again = d.normalize(c.raw);
    for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i] == doctest::Approx(c.norm[i]).epsilon(1e-12));
  }
}

TEST_CASE("synthetic generator shape") {
  const double means[] = {0.25, 0.75};
  const auto d = gen_synthetic(100, 10, means, 1.0, 3);
  CHECK(d.size() == 200);
  CHECK(d.dimension() == 10);
  CHECK(d.classes().size() == 2);
  CHECK(d.class_counts() == std::vector<std::size_t>{100, 100});
}

TEST_CASE("one-sample synthetic dataset normalizes to one half") {
  const double means[] = {0.0};
  const auto d = gen_synthetic(1, 1, means, 1.0, 9);
  REQUIRE(d.size() == 1);
  CHECK(d.cases()[0].norm[0] == 0.5);
}

TEST_CASE("synthetic generator is deterministic per seed") {
  const double means[] = {0.25, 0.75};
  CHECK(to_csv(gen_synthetic(20, 4, means, 1.0, 42)) == to_csv(gen_synthetic(20, 4, means, 1.0, 42)));
  CHECK(to_csv(gen_synthetic(20, 4, means, 1.0, 42)) != to_csv(gen_synthetic(20, 4, means, 1.0, 43)));
}

TEST_CASE("synthetic mean of a symmetric class") {
  const Dataset d({"x", "y"}, {{0, 0}, {1, 1}, {5, 5}}, {"A", "A", "B"});
  const auto m = synth_mean(d, 0);
  CHECK(m.synthetic);
  CHECK(m.id == d.size());
  CHECK(m.raw == std::vector<double>{0.5, 0.5});
  const auto single = synth_mean(d, 1);
  CHECK(single.raw == std::vector<double>{5, 5});
  CHECK(single.norm == d.cases()[2].norm);
}

TEST_CASE("setosa mean matches a one-pass column sum") {
  const auto d = load_csv(oracle::data_path("iris.csv"), std::string("class"));
  const auto m = synth_mean(d, d.class_index("setosa"));
  std::vector<double> sum(4, 0.0);
  int n = 0;
  for (const auto& c : d.cases()) {
    if (d.classes()[c.label].name != "setosa") continue;
    for (int i = 0; i < 4; ++i) sum[i] += c.raw[i];
    ++n;
  }
  for (int i = 0; i < 4; ++i) CHECK(m.raw[i] == doctest::Approx(sum[i] / n).epsilon(1e-12));
}

TEST_CASE("subset renumbers ids and recomputes normalization") {
  const Dataset d({"x"}, {{0}, {5}, {10}}, {"A", "B", "A"});
  const std::size_t keep[] = {1, 2};
  const auto s = d.subset(keep);
  CHECK(s.size() == 2);
  CHECK(s.cases()[0].id == 0);
  CHECK(s.cases()[0].norm[0] == 0.0);
  CHECK(s.cases()[1].norm[0] == 1.0);
}

TEST_CASE("unknown class and case ids") {
  const Dataset d({"x"}, {{0}, {1}}, {"A", "B"});
  CHECK_THROWS_AS(d.class_index("C"), NotFoundError);
  CHECK_THROWS_AS(d.at(7), NotFoundError);
}

TEST_CASE("rng draws stay in range and are reproducible") {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    CHECK(u == b.uniform());
    CHECK(a.below(7) < 7);
    b.below(7);
  }
}

}
