#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "coc/error.hpp"
#include "coc/iterative.hpp"
#include "coc/random.hpp"
#include "oracles.hpp"

using namespace coc;

namespace {

GICConfig exact(std::vector<ClassifierKind> kinds = {ClassifierKind::sac}) {
  GICConfig c;
  c.kinds = std::move(kinds);
  c.min_region = 0.0;
  return c;
}

Dataset one_d(std::vector<double> values, std::vector<std::string> labels) {
  std::vector<std::vector<double>> rows;
  for (double v : values) rows.push_back({v});
  return Dataset({"x"}, rows, labels);
}

double raw_threshold(const Dataset& d, double norm) { return d.denormalize(std::vector<double>{norm})[0]; }

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_SUITE("iterative") {

TEST_CASE("overlapping pair leaves the shared value in the residual") {
  const auto d = one_d({0.1, 0.2, 0.2, 0.3}, {"A", "A", "B", "B"});
  const auto m = sac_train(d, exact());
  REQUIRE(m.iterations.size() == 2);
  REQUIRE(m.iterations[0].rule_ids.size() == 2);
  const auto& low = m.rules[m.iterations[0].rule_ids[0]].label == 0 ? m.rules[m.iterations[0].rule_ids[0]]
                                                                    : m.rules[m.iterations[0].rule_ids[1]];
  const auto& high = m.rules[m.iterations[0].rule_ids[0]].label == 1 ? m.rules[m.iterations[0].rule_ids[0]]
                                                                     : m.rules[m.iterations[0].rule_ids[1]];
  CHECK(low.form == RuleForm::upper);
  CHECK(raw_threshold(d, low.t2) == doctest::Approx(0.15));
  CHECK(high.form == RuleForm::lower);
  CHECK(raw_threshold(d, high.t1) == doctest::Approx(0.25));
  CHECK(m.iterations[1].rule_ids.empty());
  CHECK(sorted(m.residual) == std::vector<std::size_t>{1, 2});
  CHECK(m.converged);
}

TEST_CASE("excluding a classified point frees its overlap partner") {
  // a = (2, 4) class 1, b = (2, 1) class 2, c = (3, 1) class 1
  const Dataset d({"x1", "x2"}, {{2, 4}, {2, 1}, {3, 1}}, {"c1", "c2", "c1"});
  const auto m = sac_train(d, exact());
  REQUIRE(m.iterations.size() >= 2);
  CHECK(sorted(m.iterations[0].classified) == std::vector<std::size_t>{0, 2});
  CHECK(m.iterations[1].classified == std::vector<std::size_t>{1});
  CHECK(m.residual.empty());
  CHECK(m.converged);
}

TEST_CASE("fully overlapped data yields no rules") {
  const Dataset d({"x", "y"}, {{1, 1}, {1, 1}, {2, 2}, {2, 2}}, {"A", "B", "A", "B"});
  const auto m = sac_train(d, exact());
  CHECK(m.rules.empty());
  CHECK(m.residual.size() == 4);
  CHECK(m.iterations_used == 1);
  CHECK(m.converged);
}

TEST_CASE("interleaved values peel from both ends") {
  const auto d = one_d({1, 3, 2, 4}, {"A", "A", "B", "B"});
  const auto m = linear_iter_train(d, exact({ClassifierKind::linear}));
  REQUIRE(m.iterations.size() >= 2);
  CHECK(sorted(m.iterations[0].classified) == std::vector<std::size_t>{0, 3});
  CHECK(sorted(m.iterations[1].classified) == std::vector<std::size_t>{1, 2});
  CHECK(m.residual.empty());
  CHECK(m.iterations_used == 2);
  for (auto id : {0u, 1u}) CHECK(m.rules[*m.assignment[id]].label == 0);
  for (auto id : {2u, 3u}) CHECK(m.rules[*m.assignment[id]].label == 1);
}

TEST_CASE("separable blobs need one linear iteration") {
  Rng rng(21);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({rng.normal(0.25, 0.05), rng.normal(0.3, 0.05)});
    labels.push_back("A");
    rows.push_back({rng.normal(0.75, 0.05), rng.normal(0.7, 0.05)});
    labels.push_back("B");
  }
  const Dataset d({"x", "y"}, rows, labels);
  const auto m = linear_iter_train(d, exact({ClassifierKind::linear}));
  CHECK(m.residual.empty());
  CHECK(m.iterations[0].classified.size() == 80);
}

TEST_CASE("cross-class duplicates go to the residual and still converge") {
  const Dataset d({"x", "y"}, {{0.5, 0.5}, {0.5, 0.5}, {0, 0}, {1, 1}}, {"A", "B", "A", "B"});
  const auto m = linear_iter_train(d, exact({ClassifierKind::linear}));
  CHECK(sorted(m.residual) == std::vector<std::size_t>{0, 1});
  CHECK(m.converged);
  CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("driver delegation matches the named trainers") {
  const auto d = one_d({0.1, 0.2, 0.2, 0.3}, {"A", "A", "B", "B"});
  auto sac_cfg = exact();
  sac_cfg.max_iterations = 3;
  CHECK(to_json(gic_run(d, sac_cfg), d) == to_json(sac_train(d, sac_cfg), d));
  const auto iris = load_csv(oracle::data_path("iris.csv"), std::string("class"));
  auto lin_cfg = exact({ClassifierKind::linear});
  lin_cfg.max_iterations = 5;
  CHECK(to_json(gic_run(iris, lin_cfg), iris) == to_json(linear_iter_train(iris, lin_cfg), iris));
}

TEST_CASE("alternating kinds cover at least as much as SAC alone") {
  const auto iris = load_csv(oracle::data_path("iris.csv"), std::string("class"));
  auto sac_cfg = exact();
  sac_cfg.max_iterations = 4;
  auto mixed_cfg = exact({ClassifierKind::sac, ClassifierKind::linear});
  mixed_cfg.max_iterations = 4;
  const auto alone = gic_run(iris, sac_cfg);
  const auto mixed = gic_run(iris, mixed_cfg);
  CHECK(iris.size() - mixed.residual.size() >= iris.size() - alone.residual.size());
  CHECK(mixed.iterations[1].kind == ClassifierKind::linear);
}

TEST_CASE("iteration cap stops early without convergence") {
  const auto d = one_d({1, 3, 2, 4}, {"A", "A", "B", "B"});
  auto cfg = exact({ClassifierKind::linear});
  cfg.max_iterations = 1;
  const auto m = linear_iter_train(d, cfg);
  CHECK(m.iterations_used == 1);
  CHECK_FALSE(m.converged);
  CHECK(m.residual.size() == 2);
}

TEST_CASE("purity below one admits mixed runs") {
  const auto d = one_d({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {"A", "A", "A", "A", "B", "A", "B", "B", "B", "B"});
  const auto strict = sac_train(d, exact());
  auto loose_cfg = exact();
  loose_cfg.rho = {0.8};
  const auto loose = sac_train(d, loose_cfg);
  CHECK(loose.iterations[0].classified.size() >= strict.iterations[0].classified.size());
}

TEST_CASE("config validation") {
  GICConfig c;
  c.rho = {0.0};
  CHECK_THROWS_AS(c.validate(), DataError);
  c.rho = {1.0};
  c.min_region = 1.0;
  CHECK_THROWS_AS(c.validate(), DataError);
  c.min_region = 0.0;
  c.kinds.clear();
  CHECK_THROWS_AS(c.validate(), DataError);
  CHECK_THROWS_AS(classifier_kind("tree"), DataError);
}

TEST_CASE("prediction follows rule precedence and falls back to k-NN") {
  const auto d = one_d({1, 3, 2, 4}, {"A", "A", "B", "B"});
  const auto m = linear_iter_train(d, exact({ClassifierKind::linear}));
  const double first[] = {0.0};
  const auto p = predict(m, first);
  REQUIRE(p.label);
  CHECK(*p.label == 0);
  CHECK(m.rules[*p.rule].iteration == 1);
  // The value of case 1 is matched by an iteration-2 rule; with the first
  // iteration's low rule extended it would be matched twice, and the
  // earlier rule must win. Check the first match in rule order is returned.
  for (const auto& c : d.cases()) {
    const auto q = predict(m, c.norm);
    REQUIRE(q.rule);
    for (std::size_t r = 0; r < *q.rule; ++r) CHECK_FALSE(m.rules[r].matches(c.norm));
  }

  const auto overlap = one_d({0.1, 0.2, 0.2, 0.3, 0.2, 0.2}, {"A", "A", "B", "B", "A", "A"});
  const auto om = sac_train(overlap, exact());
  CHECK(om.residual.size() == 4);
  const double miss[] = {0.5};
  CHECK_FALSE(predict(om, miss).label);
  const auto fb = predict_with_fallback(om, overlap, miss, 3);
  REQUIRE(fb.label);
  // brute force: 3 nearest residual cases by |x - q|, then majority
  std::vector<std::pair<double, std::size_t>> dist;
  for (auto id : om.residual) dist.emplace_back(std::abs(overlap.at(id).norm[0] - 0.5), id);
  std::sort(dist.begin(), dist.end());
  std::vector<std::size_t> ranked;
  for (const auto& [_, id] : dist) ranked.push_back(id);
  CHECK(*fb.label == oracle::vote(ranked, 3, oracle::labels_of(overlap)));
}

TEST_CASE("model json reports the residual percentage") {
  const auto d = one_d({0.1, 0.2, 0.2, 0.3}, {"A", "A", "B", "B"});
  const auto j = to_json(sac_train(d, exact()), d);
  CHECK(j["residual_percent"].get<double>() == 50.0);
  CHECK(j["converged"].get<bool>());
}

}
