#include "coc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "coc/error.hpp"

namespace coc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t bin_of(double v, std::size_t bins) {
  if (!(v > 0.0)) return 0;
  const auto b = static_cast<std::size_t>(std::floor(v * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const char* what) {
  if (!j.is_object()) throw SchemaError(fmt::format("{}: expected an object", what));
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw SchemaError(fmt::format("{}: unknown field '{}'", what, key));
    }
  }
}

}  // namespace

AxisSet::AxisSet(std::vector<AxisConfig> axes, ValueMapping mapping)
    : axes_(std::move(axes)), mapping_(mapping) {
  if (axes_.empty()) throw DataError("axis set is empty");
  std::vector<bool> seen_position(axes_.size(), false);
  std::set<std::size_t> seen_attr;
  for (const auto& a : axes_) {
    if (a.position >= axes_.size() || seen_position[a.position]) {
      throw DataError("axis positions must be a permutation of 0..n-1");
    }
    seen_position[a.position] = true;
    if (!seen_attr.insert(a.attr).second) {
      throw DataError(fmt::format("attribute {} appears on two axes", a.attr));
    }
    if (!(a.radius > 0.0) || !std::isfinite(a.radius)) {
      throw DataError(fmt::format("axis for attribute {}: radius must be positive", a.attr));
    }
    if (!(a.span > 0.0 && a.span <= 1.0)) {
      throw DataError(fmt::format("axis for attribute {}: span must be in (0, 1]", a.attr));
    }
    if (a.direction != 1 && a.direction != -1) {
      throw DataError(fmt::format("axis for attribute {}: direction must be +1 or -1", a.attr));
    }
    if (!std::isfinite(a.rotation)) {
      throw DataError(fmt::format("axis for attribute {}: rotation must be finite", a.attr));
    }
  }
  if (mapping_ == ValueMapping::angle) {
    const auto ordered = by_position();
    for (std::size_t i = 1; i < ordered.size(); ++i) {
      if (!(ordered[i].radius > ordered[i - 1].radius)) {
        throw DataError("radii must increase strictly with position");
      }
    }
  }
}

AxisSet AxisSet::defaults(std::size_t attributes, double base_radius, double step) {
  std::vector<AxisConfig> axes;
  for (std::size_t i = 0; i < attributes; ++i) {
    axes.push_back({i, i, base_radius + static_cast<double>(i) * step, 0.0, 1, 1.0});
  }
  return AxisSet(std::move(axes));
}

std::vector<AxisConfig> AxisSet::by_position() const {
  auto ordered = axes_;
  std::sort(ordered.begin(), ordered.end(),
            [](const AxisConfig& a, const AxisConfig& b) { return a.position < b.position; });
  return ordered;
}

const AxisConfig& AxisSet::for_attr(std::size_t attr) const {
  for (const auto& a : axes_) {
    if (a.attr == attr) return a;
  }
  throw NotFoundError(fmt::format("no axis for attribute {}", attr));
}

double AxisSet::angle_of(const AxisConfig& axis, double value) const {
  if (mapping_ == ValueMapping::arc_length) {
    return axis.rotation + axis.direction * value / axis.radius;
  }
  return axis.rotation + axis.direction * kTwoPi * axis.span * value;
}

double AxisSet::value_of(const AxisConfig& axis, double theta) const {
  if (mapping_ == ValueMapping::arc_length) {
    return (theta - axis.rotation) * axis.direction * axis.radius;
  }
  const double w = (theta - axis.rotation) * axis.direction / (kTwoPi * axis.span);
  constexpr double kSlack = 1e-12;
  if (w >= -kSlack && w <= 1.0 + kSlack) return std::clamp(w, 0.0, 1.0);
  return w - std::floor(w);
}

Point PlotLayout::center_at(std::size_t position) const {
  if (mode == LayoutMode::planar && position < centers.size()) return centers[position];
  return center;
}

double PlotLayout::z_at(std::size_t position) const {
  if (mode == LayoutMode::stacked && position < z.size()) return z[position];
  return 0.0;
}

double PlotLayout::scale_at(std::size_t position) const {
  if (mode == LayoutMode::stacked && position < radius_scale.size()) return radius_scale[position];
  return 1.0;
}

std::size_t PolylineGeom::segment_count() const {
  if (vertices.size() < 2) return 0;
  return vertices.size() - 1 + ((closed && vertices.size() >= 3) ? 1 : 0);
}

double ring_radius(const AxisSet& axes, const AxisConfig& axis, const PlotLayout& layout) {
  if (layout.mode == LayoutMode::stacked) {
    return axes.by_position().front().radius * layout.scale_at(axis.position);
  }
  return axis.radius * layout.scale_at(axis.position);
}

PolylineGeom map_case(const Case& c, const AxisSet& axes, const PlotLayout& layout) {
  PolylineGeom geom;
  geom.case_id = c.id;
  geom.label = c.label;
  geom.closed = layout.closed;
  for (const auto& axis : axes.by_position()) {
    if (axis.attr >= c.norm.size()) {
      throw DataError(fmt::format("axis refers to missing attribute {}", axis.attr));
    }
    Vertex v;
    v.position = axis.position;
    v.attr = axis.attr;
    v.theta = axes.angle_of(axis, c.norm[axis.attr]);
    const Point center = layout.center_at(axis.position);
    const double r = ring_radius(axes, axis, layout);
    v.p = {center.x + r * std::sin(v.theta), center.y - r * std::cos(v.theta)};
    v.z = layout.z_at(axis.position);
    geom.vertices.push_back(v);
  }
  return geom;
}

std::vector<PolylineGeom> map_dataset(const Dataset& dataset, const AxisSet& axes,
                                      const PlotLayout& layout) {
  std::vector<PolylineGeom> out;
  out.reserve(dataset.size());
  for (const auto& c : dataset.cases()) out.push_back(map_case(c, axes, layout));
  return out;
}

std::vector<Ring> rings(const AxisSet& axes, const PlotLayout& layout) {
  std::vector<Ring> out;
  for (const auto& axis : axes.by_position()) {
    out.push_back({axis.position, axis.attr, layout.center_at(axis.position),
                   ring_radius(axes, axis, layout), layout.z_at(axis.position)});
  }
  return out;
}

std::vector<double> invert_case(const PolylineGeom& geom, const AxisSet& axes) {
  std::size_t width = 0;
  for (const auto& v : geom.vertices) width = std::max(width, v.attr + 1);
  std::vector<double> values(width, std::numeric_limits<double>::quiet_NaN());
  for (const auto& v : geom.vertices) values[v.attr] = axes.value_of(axes.for_attr(v.attr), v.theta);
  return values;
}

AxisSet straighten_rotation(const Case& c, const AxisSet& axes, double target) {
  auto updated = axes.axes();
  for (auto& axis : updated) {
    if (axis.attr >= c.norm.size()) {
      throw DataError(fmt::format("axis refers to missing attribute {}", axis.attr));
    }
    auto unrotated = axis;
    unrotated.rotation = 0.0;
    axis.rotation = target - axes.angle_of(unrotated, c.norm[axis.attr]);
  }
  return AxisSet(std::move(updated), axes.mapping());
}

AxisSet straighten_radius(const Case& c, double first_radius, const AxisSet& axes,
                          double epsilon) {
  if (!(first_radius > 0.0)) throw DataError("first radius must be positive");
  auto ordered = axes.by_position();
  for (const auto& axis : ordered) {
    if (axis.attr >= c.norm.size()) {
      throw DataError(fmt::format("axis refers to missing attribute {}", axis.attr));
    }
    if (!(c.norm[axis.attr] > epsilon)) {
      throw DomainError(
          fmt::format("cannot straighten case {} by radius: value on attribute {} is {} (<= {})",
                      c.id, axis.attr, c.norm[axis.attr], epsilon),
          "use the rotation method instead");
    }
  }
  const double angle = c.norm[ordered.front().attr] / first_radius;
  for (auto& axis : ordered) {
    axis.radius = axis.position == 0 ? first_radius : c.norm[axis.attr] / angle;
    axis.rotation = 0.0;
    axis.direction = 1;
  }
  return AxisSet(std::move(ordered), ValueMapping::arc_length);
}

double collinearity_residual(const PolylineGeom& geom, Point center) {
  const Vertex* far = nullptr;
  double far_dist = 0.0;
  for (const auto& v : geom.vertices) {
    const double d = std::hypot(v.p.x - center.x, v.p.y - center.y);
    if (d > far_dist) {
      far_dist = d;
      far = &v;
    }
  }
  if (far == nullptr) return 0.0;
  const double ux = (far->p.x - center.x) / far_dist;
  const double uy = (far->p.y - center.y) / far_dist;
  double residual = 0.0;
  for (const auto& v : geom.vertices) {
    residual = std::max(residual, std::abs((v.p.x - center.x) * uy - (v.p.y - center.y) * ux));
  }
  return residual;
}

AxisSet reorder_axes(const AxisSet& axes, std::span<const std::size_t> order) {
  if (order.size() != axes.size()) throw DataError("order must name every axis exactly once");
  std::set<std::size_t> named(order.begin(), order.end());
  if (named.size() != order.size()) throw DataError("order contains a repeated attribute");
  std::vector<double> radii;
  for (const auto& a : axes.by_position()) radii.push_back(a.radius);
  std::sort(radii.begin(), radii.end());

  std::vector<AxisConfig> updated;
  for (std::size_t p = 0; p < order.size(); ++p) {
    AxisConfig axis;
    try {
      axis = axes.for_attr(order[p]);
    } catch (const NotFoundError&) {
      throw DataError(fmt::format("order names attribute {} which has no axis", order[p]));
    }
    axis.position = p;
    if (axes.mapping() == ValueMapping::angle) axis.radius = radii[p];
    updated.push_back(axis);
  }
  return AxisSet(std::move(updated), axes.mapping());
}

std::vector<double> gini_importance(const Dataset& dataset) {
  const std::size_t k = dataset.classes().size();
  const auto gini = [](const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double g = 1.0;
    for (double c : counts) g -= (c / total) * (c / total);
    return g;
  };
  std::vector<double> total_counts(k, 0.0);
  for (const auto& c : dataset.cases()) total_counts[c.label] += 1.0;
  const double n = static_cast<double>(dataset.size());
  const double parent = gini(total_counts, n);

  std::vector<double> importance(dataset.dimension(), 0.0);
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t attr = 0; attr < dataset.dimension(); ++attr) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dataset.cases()[a].norm[attr] < dataset.cases()[b].norm[attr];
    });
    std::vector<double> left(k, 0.0);
    double best = parent;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const auto& c = dataset.cases()[order[i]];
      left[c.label] += 1.0;
      if (c.norm[attr] == dataset.cases()[order[i + 1]].norm[attr]) continue;
      std::vector<double> right(k);
      for (std::size_t j = 0; j < k; ++j) right[j] = total_counts[j] - left[j];
      const double nl = static_cast<double>(i + 1);
      const double weighted = (nl * gini(left, nl) + (n - nl) * gini(right, n - nl)) / n;
      best = std::min(best, weighted);
    }
    importance[attr] = parent - best;
  }
  return importance;
}

std::vector<std::vector<double>> correlation_distance(const Dataset& dataset) {
  const std::size_t n = dataset.dimension();
  const double count = static_cast<double>(dataset.size());
  std::vector<double> mean(n, 0.0);
  for (const auto& c : dataset.cases()) {
    for (std::size_t i = 0; i < n; ++i) mean[i] += c.norm[i] / count;
  }
  std::vector<std::vector<double>> cov(n, std::vector<double>(n, 0.0));
  for (const auto& c : dataset.cases()) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) cov[i][j] += (c.norm[i] - mean[i]) * (c.norm[j] - mean[j]);
    }
  }
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double denom = std::sqrt(cov[i][i] * cov[j][j]);
      const double r = denom > 0.0 ? cov[i][j] / denom : 0.0;
      dist[i][j] = 1.0 - std::min(1.0, std::abs(r));
    }
  }
  return dist;
}

std::vector<std::size_t> hamiltonian_order(const std::vector<std::vector<double>>& distance) {
  const std::size_t n = distance.size();
  for (const auto& row : distance) {
    if (row.size() != n) throw DataError("distance matrix must be square");
  }
  std::vector<std::size_t> path;
  if (n == 0) return path;
  if (n == 1) return {0};

  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (n <= 10) {
    const std::size_t full = (std::size_t{1} << n) - 1;
    std::vector<std::vector<double>> cost(full + 1, std::vector<double>(n, kInf));
    std::vector<std::vector<std::size_t>> prev(full + 1, std::vector<std::size_t>(n, n));
    for (std::size_t i = 0; i < n; ++i) cost[std::size_t{1} << i][i] = 0.0;
    for (std::size_t mask = 1; mask <= full; ++mask) {
      for (std::size_t last = 0; last < n; ++last) {
        if (!(mask & (std::size_t{1} << last)) || cost[mask][last] == kInf) continue;
        for (std::size_t next = 0; next < n; ++next) {
          if (mask & (std::size_t{1} << next)) continue;
          const std::size_t m2 = mask | (std::size_t{1} << next);
          const double c = cost[mask][last] + distance[last][next];
          if (c < cost[m2][next]) {
            cost[m2][next] = c;
            prev[m2][next] = last;
          }
        }
      }
    }
    std::size_t last = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (cost[full][i] < cost[full][last]) last = i;
    }
    std::size_t mask = full;
    while (last != n) {
      path.push_back(last);
      const std::size_t p = prev[mask][last];
      mask &= ~(std::size_t{1} << last);
      last = p;
    }
    std::reverse(path.begin(), path.end());
  } else {
    double best = kInf;
    for (std::size_t start = 0; start < n; ++start) {
      std::vector<bool> used(n, false);
      std::vector<std::size_t> candidate{start};
      used[start] = true;
      double total = 0.0;
      while (candidate.size() < n) {
        const std::size_t at = candidate.back();
        std::size_t pick = n;
        for (std::size_t j = 0; j < n; ++j) {
          if (!used[j] && (pick == n || distance[at][j] < distance[at][pick])) pick = j;
        }
        total += distance[at][pick];
        used[pick] = true;
        candidate.push_back(pick);
      }
      if (total < best) {
        best = total;
        path = std::move(candidate);
      }
    }
  }
  if (path.front() > path.back()) std::reverse(path.begin(), path.end());
  return path;
}

AxisSet reorder_axes(const AxisSet& axes, OrderStrategy strategy, const Dataset& dataset) {
  std::vector<std::size_t> attrs;
  for (const auto& a : axes.by_position()) attrs.push_back(a.attr);
  for (auto a : attrs) {
    if (a >= dataset.dimension()) throw DataError(fmt::format("axis refers to missing attribute {}", a));
  }
  std::vector<std::size_t> order;
  switch (strategy) {
    case OrderStrategy::manual:
      return axes;
    case OrderStrategy::importance: {
      const auto importance = gini_importance(dataset);
      order = attrs;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (importance[a] != importance[b]) return importance[a] > importance[b];
        return a < b;
      });
      break;
    }
    case OrderStrategy::hamiltonian: {
      const auto full = correlation_distance(dataset);
      std::vector<std::vector<double>> sub(attrs.size(), std::vector<double>(attrs.size()));
      for (std::size_t i = 0; i < attrs.size(); ++i) {
        for (std::size_t j = 0; j < attrs.size(); ++j) sub[i][j] = full[attrs[i]][attrs[j]];
      }
      for (auto idx : hamiltonian_order(sub)) order.push_back(attrs[idx]);
      break;
    }
  }
  return reorder_axes(axes, order);
}

AxisSet scale_spans(const AxisSet& axes, std::span<const double> coefficients) {
  double largest = 0.0;
  for (const auto& a : axes.axes()) {
    if (a.attr >= coefficients.size()) {
      throw DataError(fmt::format("no coefficient for attribute {}", a.attr));
    }
    largest = std::max(largest, std::abs(coefficients[a.attr]));
  }
  if (!(largest > 0.0)) throw DataError("span coefficients are all zero");
  auto updated = axes.axes();
  for (auto& a : updated) a.span = std::max(kMinSpan, std::abs(coefficients[a.attr]) / largest);
  return AxisSet(std::move(updated), axes.mapping());
}

Hull convex_hull(std::vector<Point> points) {
  std::sort(points.begin(), points.end(), [](Point a, Point b) {
    return std::tie(a.x, a.y) < std::tie(b.x, b.y);
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](Point a, Point b) { return a.x == b.x && a.y == b.y; }),
               points.end());
  Hull hull;
  if (points.size() <= 2) {
    hull.points = std::move(points);
    hull.degenerate = true;
    return hull;
  }
  std::vector<Point> chain(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(chain[k - 2], chain[k - 1], p) <= 0.0) --k;
    chain[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(chain[k - 2], chain[k - 1], points[i]) <= 0.0) --k;
    chain[k++] = points[i];
  }
  chain.resize(k - 1);
  hull.points = std::move(chain);
  hull.degenerate = hull.points.size() <= 2;
  return hull;
}

Hull class_hull(const Dataset& dataset, ClassIndex label, const AxisSet& axes,
                const PlotLayout& layout) {
  if (layout.mode == LayoutMode::stacked) throw DataError("hulls need a planar or concentric layout");
  std::vector<Point> points;
  for (const auto& c : dataset.cases()) {
    if (c.label != label) continue;
    for (const auto& v : map_case(c, axes, layout).vertices) points.push_back(v.p);
  }
  if (points.empty()) throw DataError(fmt::format("class {} has no cases", label));
  return convex_hull(std::move(points));
}

SegmentStyle frequency_to_style(std::size_t frequency, std::size_t max_frequency,
                                const FrequencyStyleParams& params) {
  if (max_frequency <= 1) return {params.min_width, params.max_opacity};
  const double t = static_cast<double>(frequency - 1) / static_cast<double>(max_frequency - 1);
  return {params.min_width + t * (params.max_width - params.min_width),
          params.max_opacity - t * (params.max_opacity - params.min_opacity)};
}

std::vector<std::vector<SegmentStyle>> frequency_style(const Dataset& dataset, const AxisSet& axes,
                                                       std::size_t bins, bool closed,
                                                       const FrequencyStyleParams& params) {
  if (bins == 0) throw DataError("frequency bins must be >= 1");
  const auto ordered = axes.by_position();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k + 1 < ordered.size(); ++k) pairs.emplace_back(k, k + 1);
  if (closed && ordered.size() >= 3) pairs.emplace_back(ordered.size() - 1, 0);

  using Key = std::tuple<std::size_t, std::size_t, std::size_t>;
  std::map<Key, std::size_t> counts;
  const auto key_for = [&](const Case& c, std::size_t s) {
    const auto& a = ordered[pairs[s].first];
    const auto& b = ordered[pairs[s].second];
    return Key{s, bin_of(c.norm.at(a.attr), bins), bin_of(c.norm.at(b.attr), bins)};
  };
  for (const auto& c : dataset.cases()) {
    for (std::size_t s = 0; s < pairs.size(); ++s) ++counts[key_for(c, s)];
  }
  std::size_t max_frequency = 0;
  for (const auto& [_, n] : counts) max_frequency = std::max(max_frequency, n);

  std::vector<std::vector<SegmentStyle>> styles;
  styles.reserve(dataset.size());
  for (const auto& c : dataset.cases()) {
    std::vector<SegmentStyle> row;
    for (std::size_t s = 0; s < pairs.size(); ++s) {
      row.push_back(frequency_to_style(counts[key_for(c, s)], max_frequency, params));
    }
    styles.push_back(std::move(row));
  }
  return styles;
}

PlotLayout spread_layout(const PlotLayout& layout, LayoutMode mode, std::size_t axis_count,
                         const SpreadParams& params) {
  PlotLayout out = layout;
  out.mode = mode;
  out.centers.clear();
  out.z.clear();
  out.radius_scale.clear();
  if (mode == LayoutMode::planar) {
    for (std::size_t p = 0; p < axis_count; ++p) {
      out.centers.push_back({layout.center.x + static_cast<double>(p) * params.spacing, layout.center.y});
    }
  } else if (mode == LayoutMode::stacked) {
    if (!(params.z_step > 0.0)) throw DataError("stacked layout needs a positive z step");
    if (!(params.radius_factor > 0.0)) throw DataError("stacked layout needs a positive radius factor");
    for (std::size_t p = 0; p < axis_count; ++p) {
      out.z.push_back(static_cast<double>(p) * params.z_step);
      out.radius_scale.push_back(std::pow(params.radius_factor, static_cast<double>(p)));
    }
  }
  return out;
}

std::vector<std::vector<Point3>> export_stacked(const Dataset& dataset, const AxisSet& axes,
                                                const PlotLayout& layout) {
  std::vector<std::vector<Point3>> out;
  for (const auto& geom : map_dataset(dataset, axes, layout)) {
    std::vector<Point3> row;
    for (const auto& v : geom.vertices) row.push_back({v.p.x, v.p.y, v.z});
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::json to_json(const AxisSet& axes) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& a : axes.by_position()) {
    list.push_back({{"attr", a.attr},
                    {"position", a.position},
                    {"radius", a.radius},
                    {"rotation", a.rotation},
                    {"direction", a.direction},
                    {"span", a.span}});
  }
  return {{"mapping", axes.mapping() == ValueMapping::angle ? "angle" : "arc_length"},
          {"radii_monotone_suspended", axes.radii_monotone_suspended()},
          {"axes", list}};
}

AxisSet axes_from_json(const nlohmann::json& j) {
  require_keys(j, {"mapping", "radii_monotone_suspended", "axes"}, "axes");
  ValueMapping mapping = ValueMapping::angle;
  if (j.contains("mapping")) {
    const auto m = j.at("mapping").get<std::string>();
    if (m == "arc_length") {
      mapping = ValueMapping::arc_length;
    } else if (m != "angle") {
      throw DataError(fmt::format("axes: unknown mapping '{}'", m));
    }
  }
  std::vector<AxisConfig> list;
  for (const auto& item : j.at("axes")) {
    require_keys(item, {"attr", "position", "radius", "rotation", "direction", "span"}, "axis");
    AxisConfig a;
    a.attr = item.at("attr").get<std::size_t>();
    a.position = item.value("position", a.attr);
    a.radius = item.value("radius", 1.0 + static_cast<double>(a.position));
    a.rotation = item.value("rotation", 0.0);
    a.direction = item.value("direction", 1);
    a.span = item.value("span", 1.0);
    list.push_back(a);
  }
  return AxisSet(std::move(list), mapping);
}

namespace {

const char* mode_name(LayoutMode m) {
  switch (m) {
    case LayoutMode::concentric: return "concentric";
    case LayoutMode::planar: return "planar";
    case LayoutMode::stacked: return "stacked";
  }
  return "concentric";
}

}  // namespace

nlohmann::json to_json(const PlotLayout& layout) {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : layout.centers) centers.push_back({c.x, c.y});
  return {{"center", {layout.center.x, layout.center.y}},
          {"mode", mode_name(layout.mode)},
          {"centers", centers},
          {"z", layout.z},
          {"radius_scale", layout.radius_scale},
          {"closed", layout.closed}};
}

PlotLayout layout_from_json(const nlohmann::json& j) {
  require_keys(j, {"center", "mode", "centers", "z", "radius_scale", "closed"}, "layout");
  PlotLayout layout;
  if (j.contains("center")) {
    const auto& c = j.at("center");
    layout.center = {c.at(0).get<double>(), c.at(1).get<double>()};
  }
  if (j.contains("mode")) {
    const auto m = j.at("mode").get<std::string>();
    if (m == "concentric") {
      layout.mode = LayoutMode::concentric;
    } else if (m == "planar") {
      layout.mode = LayoutMode::planar;
    } else if (m == "stacked") {
      layout.mode = LayoutMode::stacked;
    } else {
      throw DataError(fmt::format("layout: unknown mode '{}'", m));
    }
  }
  if (j.contains("centers")) {
    for (const auto& c : j.at("centers")) layout.centers.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  }
  if (j.contains("z")) layout.z = j.at("z").get<std::vector<double>>();
  if (j.contains("radius_scale")) layout.radius_scale = j.at("radius_scale").get<std::vector<double>>();
  layout.closed = j.value("closed", false);
  return layout;
}

nlohmann::json to_json(const PolylineGeom& geom) {
  nlohmann::json vertices = nlohmann::json::array();
  for (const auto& v : geom.vertices) {
    vertices.push_back({{"position", v.position},
                        {"attr", v.attr},
                        {"theta", v.theta},
                        {"x", v.p.x},
                        {"y", v.p.y},
                        {"z", v.z}});
  }
  return {{"case", geom.case_id},
          {"label", geom.label},
          {"closed", geom.closed},
          {"width", geom.style.width},
          {"opacity", geom.style.opacity},
          {"vertices", vertices}};
}

}  // namespace coc
