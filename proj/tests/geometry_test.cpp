#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coc/error.hpp"
#include "coc/geometry.hpp"
#include "coc/random.hpp"
#include "oracles.hpp"

using namespace coc;

namespace {

constexpr double pi = std::numbers::pi;

Case make_case(std::vector<double> norm, std::size_t id = 0) {
  Case c;
  c.id = id;
  c.norm = norm;
  c.raw = std::move(norm);
  return c;
}

void check_point(Point p, double x, double y, double tol = 1e-12) {
  CHECK(std::abs(p.x - x) < tol);
  CHECK(std::abs(p.y - y) < tol);
}

AxisSet with_axis(const AxisSet& axes, std::size_t attr, auto edit) {
  auto configs = axes.axes();
  for (auto& a : configs) {
    if (a.attr == attr) edit(a);
  }
  return AxisSet(configs, axes.mapping());
}

Dataset iris() { return load_csv(oracle::data_path("iris.csv"), std::string("class")); }

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("quarter turns land on the compass points") {
  const auto axes = AxisSet::defaults(4);
  const auto g = map_case(make_case({0, 0.25, 0.5, 0.75}), axes, {});
  REQUIRE(g.vertices.size() == 4);
  const double expected_theta[] = {0, pi / 2, pi, 3 * pi / 2};
  for (int i = 0; i < 4; ++i) CHECK(g.vertices[i].theta == doctest::Approx(expected_theta[i]).epsilon(1e-15));
  check_point(g.vertices[0].p, 0, -1);
  check_point(g.vertices[1].p, 2, 0);
  check_point(g.vertices[2].p, 0, 3);
  check_point(g.vertices[3].p, -4, 0);
}

TEST_CASE("zero values sit at the north points") {
  const auto g = map_case(make_case({0, 0, 0}), AxisSet::defaults(3), {});
  for (const auto& v : g.vertices) {
    CHECK(v.theta == 0.0);
    CHECK(v.p.x == 0.0);
    CHECK(v.p.y == -static_cast<double>(v.position + 1));
  }
}

TEST_CASE("reversing one axis reflects only that vertex") {
  const auto base = AxisSet::defaults(4);
  const auto reversed = with_axis(base, 1, [](AxisConfig& a) { a.direction = -1; });
  const auto c = make_case({0, 0.25, 0.5, 0.75});
  const auto g0 = map_case(c, base, {});
  const auto g1 = map_case(c, reversed, {});
  CHECK(g1.vertices[1].theta == doctest::Approx(-pi / 2));
  check_point(g1.vertices[1].p, -2, 0);
  for (int i : {0, 2, 3}) CHECK(g1.vertices[i].theta == g0.vertices[i].theta);
}

TEST_CASE("round trip recovers the values") {
  const auto axes = AxisSet::defaults(4);
  const std::vector<double> v{0, 0.25, 0.5, 0.75};
  const auto back = invert_case(map_case(make_case(v), axes, {}), axes);
  for (int i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-15));
}

TEST_CASE("rotation cancels on inversion") {
  const auto axes = with_axis(AxisSet::defaults(4), 2, [](AxisConfig& a) { a.rotation = pi / 2; });
  const std::vector<double> v{0.1, 0.6, 0.9, 1.0};
  const auto back = invert_case(map_case(make_case(v), axes, {}), axes);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(back[i] - v[i]) < 1e-12);
}

TEST_CASE("randomized round trips stay lossless") {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<AxisConfig> configs;
    double radius = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      radius += 0.1 + 3.0 * rng.uniform();
      configs.push_back({order[p], p, radius, (rng.uniform() - 0.5) * 40.0, rng.below(2) == 0 ? 1 : -1,
                         std::max(0.05, rng.uniform())});
    }
    const AxisSet axes(configs);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.below(10) == 0 ? static_cast<double>(rng.below(2)) : rng.uniform();
    PlotLayout layout;
    layout.center = {rng.uniform() * 10, rng.uniform() * 10};
    const auto back = invert_case(map_case(make_case(v), axes, layout), axes);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i] - v[i]));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("rotation straightening cancels each angle") {
  const auto axes = AxisSet::defaults(2);
  const auto straight = straighten_rotation(make_case({0.25, 0.5}), axes, 0.0);
  CHECK(straight.for_attr(0).rotation == doctest::Approx(-pi / 2));
  CHECK(straight.for_attr(1).rotation == doctest::Approx(-pi));
  const auto g = map_case(make_case({0.25, 0.5}), straight, {});
  for (const auto& v : g.vertices) CHECK(std::abs(v.theta) < 1e-12);
}

TEST_CASE("a case already on target leaves rotations alone") {
  const auto axes = AxisSet::defaults(3);
  const auto straight = straighten_rotation(make_case({0, 0, 0}), axes, 0.0);
  for (const auto& a : straight.axes()) CHECK(a.rotation == 0.0);
}

TEST_CASE("setosa mean straightens to a collinear polyline") {
  const auto d = iris();
  const auto mean = synth_mean(d, d.class_index("setosa"));
  const auto axes = straighten_rotation(mean, AxisSet::defaults(4), 0.7);
  const auto g = map_case(mean, axes, {});
  CHECK(collinearity_residual(g, {0, 0}) < 1e-9);
  // Every vertex on the ray at angle 0.7: the perpendicular offset from
  // the ray's direction vector, computed directly.
  for (const auto& v : g.vertices) {
    const double off = std::abs(v.p.x * std::cos(0.7) + v.p.y * std::sin(0.7));
    CHECK(off < 1e-9);
  }
}

TEST_CASE("radius straightening computes R_k = x_k / a") {
  const std::vector<double> x{0.2, 0.4, 0.6, 0.8};
  const auto straight = straighten_radius(make_case(x), 1.0, AxisSet::defaults(4));
  CHECK(straight.mapping() == ValueMapping::arc_length);
  const double a = x[0] / 1.0;
  CHECK(a == 0.2);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(straight.for_attr(k).radius == x[k] / a);
    CHECK(std::abs(straight.for_attr(k).radius - static_cast<double>(k + 1)) < 1e-12);
  }
  const auto g = map_case(make_case(x), straight, {});
  CHECK(collinearity_residual(g, {0, 0}) < 1e-9);
  const auto back = invert_case(g, straight);
  for (std::size_t k = 0; k < 4; ++k) CHECK(back[k] == doctest::Approx(x[k]));
}

TEST_CASE("equal values give equal radii") {
  const auto straight = straighten_radius(make_case({0.5, 0.5}), 1.0, AxisSet::defaults(2));
  CHECK(straight.for_attr(1).radius == 1.0);
  CHECK(straight.radii_monotone_suspended());
}

TEST_CASE("radius straightening rejects a zero first value") {
  try {
    straighten_radius(make_case({0.0, 0.5}), 1.0, AxisSet::defaults(2));
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.hint().find("rotation") != std::string::npos);
  }
}

TEST_CASE("manual reorder reverses positions and keeps radii increasing") {
  const auto axes = AxisSet::defaults(4);
  const std::size_t order[] = {3, 2, 1, 0};
  const auto r = reorder_axes(axes, order);
  for (std::size_t p = 0; p < 4; ++p) CHECK(r.for_attr(3 - p).position == p);
  const auto ordered = r.by_position();
  for (std::size_t i = 1; i < ordered.size(); ++i) CHECK(ordered[i].radius > ordered[i - 1].radius);
  CHECK_THROWS_AS(reorder_axes(axes, std::vector<std::size_t>{0, 0, 1, 2}), DataError);
}

TEST_CASE("importance order puts the separating attribute innermost") {
  // attribute 0 is noise, attribute 1 splits the classes at 0.5
  Rng rng(11);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < 10; ++i) {
    const bool a = i < 5;
    rows.push_back({rng.uniform(), a ? 0.1 * i : 0.6 + 0.05 * i});
    labels.push_back(a ? "A" : "B");
  }
  const Dataset d({"noise", "signal"}, rows, labels);
  const auto importance = gini_importance(d);
  const auto y = oracle::labels_of(d);
  for (std::size_t attr = 0; attr < 2; ++attr) {
    std::vector<double> column;
    for (const auto& c : d.cases()) column.push_back(c.norm[attr]);
    CHECK(importance[attr] == doctest::Approx(oracle::gini_decrease(column, y)).epsilon(1e-12));
  }
  CHECK(importance[1] == doctest::Approx(0.5));
  const auto r = reorder_axes(AxisSet::defaults(2), OrderStrategy::importance, d);
  CHECK(r.for_attr(1).position == 0);
}

TEST_CASE("hamiltonian order on three nodes matches path enumeration") {
  const std::vector<std::vector<double>> dist{{0, 1, 5}, {1, 0, 1}, {5, 1, 0}};
  const auto order = hamiltonian_order(dist);
  std::vector<std::size_t> perm{0, 1, 2};
  double best = 1e300;
  do {
    best = std::min(best, dist[perm[0]][perm[1]] + dist[perm[1]][perm[2]]);
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(dist[order[0]][order[1]] + dist[order[1]][order[2]] == best);
  CHECK(order == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("hamiltonian heuristic returns a permutation for larger inputs") {
  Rng rng(3);
  const std::size_t n = 14;
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) dist[i][j] = dist[j][i] = rng.uniform();
  }
  auto order = hamiltonian_order(dist);
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < n; ++i) CHECK(order[i] == i);
}

TEST_CASE("span scaling is proportional with a floor") {
  const auto a = scale_spans(AxisSet::defaults(2), std::vector<double>{2, 1});
  CHECK(a.for_attr(0).span == 1.0);
  CHECK(a.for_attr(1).span == 0.5);
  const auto b = scale_spans(AxisSet::defaults(3), std::vector<double>{1, 1, 1});
  for (const auto& axis : b.axes()) CHECK(axis.span == 1.0);
  const auto c = scale_spans(AxisSet::defaults(2), std::vector<double>{0, -3});
  CHECK(c.for_attr(0).span == kMinSpan);
  CHECK(c.for_attr(1).span == 1.0);
  const auto back = invert_case(map_case(make_case({0.7, 0.3}), c, {}), c);
  CHECK(back[0] == doctest::Approx(0.7));
}

TEST_CASE("hull of a triangle and of a square with its center") {
  const auto tri = convex_hull({{0, 0}, {1, 0}, {0, 1}});
  CHECK(tri.points.size() == 3);
  CHECK_FALSE(tri.degenerate);
  const auto sq = convex_hull({{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}});
  CHECK(sq.points.size() == 4);
  for (const auto& p : sq.points) CHECK_FALSE((p.x == 1 && p.y == 1));
  CHECK(convex_hull({{0, 0}, {1, 1}, {2, 2}}).degenerate);
}

TEST_CASE("setosa hull contains every setosa vertex") {
  const auto d = iris();
  const auto axes = AxisSet::defaults(4);
  const auto setosa = d.class_index("setosa");
  const auto hull = class_hull(d, setosa, axes, {});
  std::vector<std::pair<double, double>> poly;
  for (const auto& p : hull.points) poly.emplace_back(p.x, p.y);
  std::size_t inside = 0, total = 0;
  for (const auto& g : map_dataset(d, axes, {})) {
    if (g.label != setosa) continue;
    for (const auto& v : g.vertices) {
      ++total;
      inside += oracle::inside_polygon(poly, v.p.x, v.p.y) ? 1 : 0;
    }
  }
  CHECK(total == 200);
  CHECK(inside == total);
}

TEST_CASE("frequency styling extremes and linear interpolation") {
  const Dataset same({"x", "y", "z"}, {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}}, {"A", "A", "B"});
  for (const auto& styles : frequency_style(same, AxisSet::defaults(3), 10)) {
    REQUIRE(styles.size() == 2);
    for (const auto& s : styles) {
      CHECK(s.width == 6.0);
      CHECK(s.opacity == 0.25);
    }
  }
  const Dataset distinct({"x", "y"}, {{0, 0}, {1, 1}, {2, 2}}, {"A", "A", "B"});
  for (const auto& styles : frequency_style(distinct, AxisSet::defaults(2), 10)) {
    CHECK(styles.front().width == 0.5);
    CHECK(styles.front().opacity == 0.9);
  }
  // w(f) = w_min + (f - 1) / (f_max - 1) * (w_max - w_min)
  const FrequencyStyleParams p;
  for (std::size_t f : {1u, 2u, 4u}) {
    const double expected = p.min_width + (static_cast<double>(f) - 1) / 3.0 * (p.max_width - p.min_width);
    CHECK(frequency_to_style(f, 4).width == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(frequency_to_style(2, 4).width == doctest::Approx(2.33).epsilon(0.01));
}

TEST_CASE("closed contours add one styled segment per case") {
  const auto d = iris();
  const auto open = frequency_style(d, AxisSet::defaults(4), 10, false);
  const auto closed = frequency_style(d, AxisSet::defaults(4), 10, true);
  CHECK(open.front().size() == 3);
  CHECK(closed.front().size() == 4);
}

TEST_CASE("stacked layouts: cylinder and shrinking stack") {
  const auto axes = AxisSet::defaults(3, 2.0);
  const auto cylinder = spread_layout({}, LayoutMode::stacked, 3, {5.0, 1.0, 1.0});
  const auto r = rings(axes, cylinder);
  for (std::size_t p = 0; p < 3; ++p) {
    CHECK(r[p].z == static_cast<double>(p));
    CHECK(r[p].radius == 2.0);
  }
  const auto shrink = rings(axes, spread_layout({}, LayoutMode::stacked, 3, {5.0, 1.0, 0.5}));
  CHECK(shrink[0].radius == 2.0);
  CHECK(shrink[1].radius == 1.0);
  CHECK(shrink[2].radius == 0.5);
  const auto pts = export_stacked(iris(), AxisSet::defaults(4), spread_layout({}, LayoutMode::stacked, 4));
  CHECK(pts.size() == 150);
  CHECK(pts[0][3].z == 3.0);
  CHECK_THROWS_AS(spread_layout({}, LayoutMode::stacked, 3, {5.0, 0.0, 1.0}), DataError);
}

TEST_CASE("planar layout spaces centers evenly") {
  const auto layout = spread_layout({}, LayoutMode::planar, 4, {5.0, 1.0, 1.0});
  for (std::size_t p = 0; p < 4; ++p) {
    CHECK(layout.center_at(p).x == 5.0 * static_cast<double>(p));
    CHECK(layout.center_at(p).y == 0.0);
  }
  const auto axes = AxisSet::defaults(4);
  const auto back = invert_case(map_case(make_case({0.1, 0.2, 0.3, 0.4}), axes, layout), axes);
  CHECK(back[3] == doctest::Approx(0.4));
}

TEST_CASE("axis validation") {
  CHECK_THROWS_AS(AxisSet({{0, 0, 2.0, 0, 1, 1}, {1, 1, 1.0, 0, 1, 1}}), DataError);
  CHECK_THROWS_AS(AxisSet({{0, 0, 1.0, 0, 1, 1}, {1, 0, 2.0, 0, 1, 1}}), DataError);
  CHECK_THROWS_AS(AxisSet({{0, 0, 1.0, 0, 2, 1}}), DataError);
  CHECK_THROWS_AS(AxisSet({{0, 0, 1.0, 0, 1, 0}}), DataError);
  CHECK_THROWS_AS(AxisSet({{0, 0, -1.0, 0, 1, 1}}), DataError);
}

TEST_CASE("axis and layout json round trip and reject unknown fields") {
  const auto axes = with_axis(AxisSet::defaults(3), 1, [](AxisConfig& a) {
    a.rotation = 0.3;
    a.direction = -1;
    a.span = 0.5;
  });
  const auto back = axes_from_json(to_json(axes));
  CHECK(to_json(back) == to_json(axes));
  auto j = to_json(axes);
  j["extra"] = 1;
  CHECK_THROWS_AS(axes_from_json(j), SchemaError);
  const auto layout = spread_layout({}, LayoutMode::planar, 3);
  CHECK(to_json(layout_from_json(to_json(layout))) == to_json(layout));
}

}
