#include <doctest.h>

#include <cmath>
#include <set>

#include "coc/document.hpp"
#include "coc/error.hpp"
#include "coc/knn.hpp"
#include "coc/render.hpp"
#include "oracles.hpp"

using namespace coc;

namespace {

Dataset iris() { return load_csv(oracle::data_path("iris.csv"), std::string("class")); }

std::string iris_svg() {
  const auto d = iris();
  const auto doc = make_document(d, AxisSet::defaults(4), {});
  return render_svg(doc, {}, Viewport::fit(doc));
}

// Inward/outward per tick, judged by distance from the plot center.
std::vector<bool> inward_ticks(const std::string& svg, Point center_px) {
  std::vector<bool> out;
  for (const std::string cls : {"tick-correct", "tick-wrong"}) {
    const auto x1 = oracle::attribute_values(svg, "line", cls, "x1");
    const auto y1 = oracle::attribute_values(svg, "line", cls, "y1");
    const auto x2 = oracle::attribute_values(svg, "line", cls, "x2");
    const auto y2 = oracle::attribute_values(svg, "line", cls, "y2");
    for (std::size_t i = 0; i < x1.size(); ++i) {
      const double r1 = std::hypot(std::stod(x1[i]) - center_px.x, std::stod(y1[i]) - center_px.y);
      const double r2 = std::hypot(std::stod(x2[i]) - center_px.x, std::stod(y2[i]) - center_px.y);
      out.push_back(r2 < r1);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("minimal document draws one ring and one dot") {
  const Dataset d({"x"}, {{1.0}}, {"A"});
  const auto doc = make_document(d, AxisSet::defaults(1), {});
  const auto svg = render_svg(doc, {}, Viewport::fit(doc));
  CHECK(oracle::count_elements(svg, "circle", "ring") == 1);
  CHECK(oracle::count_elements(svg, "circle", "vertex") == 1);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("rendering is byte-identical across runs") { CHECK(iris_svg() == iris_svg()); }

TEST_CASE("iris plot element census") {
  const auto svg = iris_svg();
  CHECK(oracle::count_elements(svg, "circle", "ring") == 4);
  CHECK(oracle::count_elements(svg, "polyline", "case") == 150);
  CHECK(oracle::count_elements(svg, "circle", "vertex") == 600);
  const auto strokes = oracle::attribute_values(svg, "polyline", "case", "stroke");
  CHECK(std::set<std::string>(strokes.begin(), strokes.end()).size() == 3);
}

TEST_CASE("highlighted cases are drawn after the others") {
  const auto d = iris();
  DocumentOptions opts;
  opts.highlight = {3};
  const auto doc = make_document(d, AxisSet::defaults(4), {}, opts);
  const auto svg = render_svg(doc, {}, Viewport::fit(doc));
  const auto pos = svg.find("class=\"case highlight\" data-case=\"3\"");
  REQUIRE(pos != std::string::npos);
  CHECK(svg.find("class=\"case\"", pos) == std::string::npos);
  CHECK(oracle::count_elements(svg, "polyline", "case") == 149);
}

TEST_CASE("frequency styling renders per-segment lines") {
  const auto d = iris();
  DocumentOptions opts;
  opts.frequency_bins = 10;
  const auto doc = make_document(d, AxisSet::defaults(4), {}, opts);
  const auto svg = render_svg(doc, {}, Viewport::fit(doc));
  CHECK(oracle::count_elements(svg, "line", "segment") == 450);
}

TEST_CASE("hulls and envelope bands appear when requested") {
  const auto d = iris();
  const auto axes = AxisSet::defaults(4);
  const auto r = or_reduce(d, axes, 100, NodeThreshold{3});
  const auto envs = build_envelopes(d, axes, r.selected, 100, NodeThreshold{3});
  DocumentOptions opts;
  opts.hulls = true;
  opts.reduction = &r;
  opts.envelopes = &envs;
  const auto doc = make_document(d, axes, {}, opts);
  const auto svg = render_svg(doc, {}, Viewport::fit(doc));
  CHECK(oracle::count_elements(svg, "polygon", "hull") == 3);
  CHECK(oracle::count_elements(svg, "circle", "marked-node") == r.selected.size());
  CHECK(oracle::count_elements(svg, "polyline", "case") == 150 - r.suppressed_cases.size());
}

TEST_CASE("validation ticks point inward when right and outward when wrong") {
  const auto d = iris();
  const auto doc = make_document(d, AxisSet::defaults(4), {});
  const auto vp = Viewport::fit(doc);
  const Point center = vp.to_pixels(doc.center);
  std::vector<ClassIndex> right, wrong;
  for (const auto& line : doc.polylines) {
    right.push_back(line.geom.label);
    wrong.push_back((line.geom.label + 1) % 3);
  }
  const auto all_right = render_knn_validation(doc, right, {}, vp);
  CHECK(oracle::count_elements(all_right, "line", "tick-correct") == 150);
  for (bool in : inward_ticks(all_right, center)) CHECK(in);
  const auto all_wrong = render_knn_validation(doc, wrong, {}, vp);
  CHECK(oracle::count_elements(all_wrong, "line", "tick-wrong") == 150);
  for (bool in : inward_ticks(all_wrong, center)) CHECK_FALSE(in);
  CHECK_THROWS_AS(render_knn_validation(doc, std::vector<ClassIndex>(3, 0), {}, vp), DataError);
}

TEST_CASE("3-NN ticks agree with the confusion of predictions and labels") {
  const auto d = iris();
  const auto doc = make_document(d, AxisSet::defaults(4), {});
  const auto vp = Viewport::fit(doc);
  const KnnModel model(3, reference_points(d));
  std::vector<ClassIndex> predictions;
  for (const auto& c : d.cases()) {
    predictions.push_back(vote(model.ranked(c.norm, c.id), 3, [&](std::size_t id) { return d.at(id).label; }));
  }
  // oracle confusion from the brute-force distance matrix
  const auto m = oracle::distance_matrix(d);
  const auto labels = oracle::labels_of(d);
  std::size_t diagonal = 0;
  for (std::size_t i = 0; i < d.size(); ++i) diagonal += oracle::vote(oracle::loo_ranking(m, i), 3, labels) == labels[i];
  const auto svg = render_knn_validation(doc, predictions, {}, vp);
  CHECK(oracle::count_elements(svg, "line", "tick-correct") == diagonal);
  CHECK(oracle::count_elements(svg, "line", "tick-wrong") == d.size() - diagonal);
  const auto inward = inward_ticks(svg, vp.to_pixels(doc.center));
  CHECK(static_cast<std::size_t>(std::count(inward.begin(), inward.end(), true)) == diagonal);

  ValidationOptions focus;
  focus.focus_class = 0;
  const auto only = render_knn_validation(doc, predictions, {}, vp, focus);
  CHECK(oracle::count_elements(only, "polyline", "case") == 50);
}

TEST_CASE("drawlist json round trip renders identically") {
  const auto d = iris();
  const auto doc = make_document(d, AxisSet::defaults(4), {});
  const auto j = to_json(doc);
  const auto back = document_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(render_svg(j, {}, Viewport::fit(doc)) == render_svg(doc, {}, Viewport::fit(doc)));
}

TEST_CASE("drawlist schema violations are rejected") {
  const auto d = iris();
  auto j = to_json(make_document(d, AxisSet::defaults(4), {}));
  auto missing = j;
  missing.erase("rings");
  CHECK_THROWS_AS(document_from_json(missing), SchemaError);
  auto bad_label = j;
  bad_label["polylines"][0]["label"] = 9;
  CHECK_THROWS_AS(document_from_json(bad_label), SchemaError);
  auto unsorted = j;
  std::swap(unsorted["polylines"][0], unsorted["polylines"][1]);
  CHECK_THROWS_AS(document_from_json(unsorted), SchemaError);
}

TEST_CASE("style validation and viewport mapping") {
  StyleSheet s;
  s.ring_color = "grey";
  CHECK_THROWS_AS(s.validate(), DataError);
  Viewport vp{-1, -1, 2, 2, 100, 100};
  const auto p = vp.to_pixels({0, 0});
  CHECK(p.x == 50.0);
  CHECK(p.y == 50.0);
  const auto w = vp.to_world({100, 0});
  CHECK(w.x == 1.0);
  CHECK(w.y == -1.0);
}

}
