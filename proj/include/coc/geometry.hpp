#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "coc/dataset.hpp"

namespace coc {

// Plane coordinates with y growing downward: the north point of a ring of
// radius R around c is (c.x, c.y - R).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

// How a normalized value becomes an angle on its ring.
enum class ValueMapping {
  angle,       // theta = delta + d * 2 pi * span * v
  arc_length,  // theta = delta + d * v / R (set by straighten_radius)
};

struct AxisConfig {
  std::size_t attr = 0;
  std::size_t position = 0;  // 0 = innermost ring
  double radius = 1.0;
  double rotation = 0.0;  // radians, clockwise
  int direction = 1;      // +1 clockwise, -1 counterclockwise
  double span = 1.0;      // fraction of the circumference, (0, 1]
};

class AxisSet {
 public:
  AxisSet() = default;
  // Validates: positions form a permutation, radii > 0 and (for the angle
  // mapping) strictly increasing with position, spans in (0, 1].
  explicit AxisSet(std::vector<AxisConfig> axes, ValueMapping mapping = ValueMapping::angle);

  // Equidistant rings R = 1 + position, attribute i at position i.
  static AxisSet defaults(std::size_t attributes, double base_radius = 1.0, double step = 1.0);

  std::size_t size() const { return axes_.size(); }
  const std::vector<AxisConfig>& axes() const { return axes_; }
  // Axes sorted by position.
  std::vector<AxisConfig> by_position() const;
  const AxisConfig& for_attr(std::size_t attr) const;
  ValueMapping mapping() const { return mapping_; }
  bool radii_monotone_suspended() const { return mapping_ == ValueMapping::arc_length; }

  double angle_of(const AxisConfig& axis, double value) const;
  double value_of(const AxisConfig& axis, double theta) const;

 private:
  std::vector<AxisConfig> axes_;
  ValueMapping mapping_ = ValueMapping::angle;
};

enum class LayoutMode { concentric, planar, stacked };

struct PlotLayout {
  Point center;
  LayoutMode mode = LayoutMode::concentric;
  std::vector<Point> centers;          // planar: one per position
  std::vector<double> z;               // stacked: one per position
  std::vector<double> radius_scale;    // stacked: one per position
  bool closed = false;

  Point center_at(std::size_t position) const;
  double z_at(std::size_t position) const;
  double scale_at(std::size_t position) const;
};

struct SegmentStyle {
  double width = 1.0;
  double opacity = 1.0;
};

struct Vertex {
  std::size_t position = 0;
  std::size_t attr = 0;
  double theta = 0.0;
  Point p;
  double z = 0.0;
};

struct PolylineGeom {
  std::size_t case_id = 0;
  ClassIndex label = 0;
  std::vector<Vertex> vertices;  // ordered by position
  bool closed = false;
  SegmentStyle style;

  // Open: n-1 segments; closed: n (n >= 3) segments.
  std::size_t segment_count() const;
};

struct Ring {
  std::size_t position = 0;
  std::size_t attr = 0;
  Point center;
  double radius = 0.0;
  double z = 0.0;
};

// Drawn radius of an axis. Stacked mode replaces the concentric radii with
// the innermost radius times the per-position scale.
double ring_radius(const AxisSet& axes, const AxisConfig& axis, const PlotLayout& layout);

PolylineGeom map_case(const Case& c, const AxisSet& axes, const PlotLayout& layout);
std::vector<PolylineGeom> map_dataset(const Dataset& dataset, const AxisSet& axes,
                                      const PlotLayout& layout);
std::vector<Ring> rings(const AxisSet& axes, const PlotLayout& layout);

// Normalized values recovered from vertex angles, indexed by attribute.
std::vector<double> invert_case(const PolylineGeom& geom, const AxisSet& axes);

// Rotations that put every vertex of `c` at angle `target`.
AxisSet straighten_rotation(const Case& c, const AxisSet& axes, double target = 0.0);

// Arc-length construction: a = x_1 / R_1, R_k = x_k / a. Switches the axis
// set to the arc-length mapping with zero rotations and clockwise direction.
AxisSet straighten_radius(const Case& c, double first_radius, const AxisSet& axes,
                          double epsilon = 1e-6);

// Largest distance of a vertex from the line through `center` and the
// vertex farthest from it.
double collinearity_residual(const PolylineGeom& geom, Point center);

enum class OrderStrategy { manual, importance, hamiltonian };

// `order[p]` is the attribute placed at position p. Radii are re-dealt in
// increasing order of position; rotation/direction/span travel with the attribute.
AxisSet reorder_axes(const AxisSet& axes, std::span<const std::size_t> order);
AxisSet reorder_axes(const AxisSet& axes, OrderStrategy strategy, const Dataset& dataset);

// Best single-threshold Gini decrease per attribute.
std::vector<double> gini_importance(const Dataset& dataset);
// 1 - |Pearson r| between attribute columns of normalized values.
std::vector<std::vector<double>> correlation_distance(const Dataset& dataset);
// Minimum-total-weight open path over all nodes. Exact for n <= 10,
// nearest-neighbor from every start otherwise. The path is oriented so
// its first node is below its last.
std::vector<std::size_t> hamiltonian_order(const std::vector<std::vector<double>>& distance);

inline constexpr double kMinSpan = 0.05;

// s_k = max(kMinSpan, |a_k| / max |a|); coefficients are indexed by attribute.
AxisSet scale_spans(const AxisSet& axes, std::span<const double> coefficients);

struct Hull {
  std::vector<Point> points;  // counterclockwise in a y-up frame, no collinear points
  bool degenerate = false;    // point or segment
};

Hull convex_hull(std::vector<Point> points);
Hull class_hull(const Dataset& dataset, ClassIndex label, const AxisSet& axes,
                const PlotLayout& layout);

struct FrequencyStyleParams {
  double min_width = 0.5;
  double max_width = 6.0;
  double max_opacity = 0.9;
  double min_opacity = 0.25;
};

// Style for one segment given its frequency and the maximum frequency.
SegmentStyle frequency_to_style(std::size_t frequency, std::size_t max_frequency,
                                const FrequencyStyleParams& params = {});

// Per case, one style per segment between consecutive positions (plus the
// closing segment when `closed` and there are >= 3 axes). Frequency is the
// number of cases sharing the (source bin, target bin) pair.
std::vector<std::vector<SegmentStyle>> frequency_style(const Dataset& dataset, const AxisSet& axes,
                                                       std::size_t bins, bool closed = false,
                                                       const FrequencyStyleParams& params = {});

struct SpreadParams {
  double spacing = 5.0;       // planar
  double z_step = 1.0;        // stacked
  double radius_factor = 1.0; // stacked
};

PlotLayout spread_layout(const PlotLayout& layout, LayoutMode mode, std::size_t axis_count,
                         const SpreadParams& params = {});

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Stacked-mode export: per case, one (x, y, z) per axis in position order.
std::vector<std::vector<Point3>> export_stacked(const Dataset& dataset, const AxisSet& axes,
                                                const PlotLayout& layout);

nlohmann::json to_json(const AxisSet& axes);
AxisSet axes_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlotLayout& layout);
PlotLayout layout_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PolylineGeom& geom);

}  // namespace coc
