#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "coc/dataset.hpp"
#include "coc/document.hpp"

namespace coc {

struct StyleSheet {
  std::vector<std::string> class_colors;  // empty = document class colors
  std::string ring_color = "#808080";
  double ring_width = 1.0;
  double case_width = 1.0;
  double case_opacity = 0.8;
  std::string highlight_color = "#ffff00";
  std::string background = "#ffffff";
  std::string hull_color = "#000000";
  double vertex_radius = 1.5;
  double marked_factor = 3.0;  // marked-node glyph radius / vertex radius
  double north_tick = 6.0;     // pixels

  void validate() const;
  std::string color_for(const GeometryDocument& doc, ClassIndex label) const;
};

// World-space window onto the plot and the pixel size it maps to.
struct Viewport {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
  double pixel_width = 800.0;
  double pixel_height = 800.0;

  Point to_pixels(Point world) const;
  Point to_world(Point pixel) const;
  // Square window around all rings with a relative margin.
  static Viewport fit(const GeometryDocument& doc, double margin = 0.08, double pixels = 800.0);
};

// Fixed 6-decimal coordinates; element order is rings by position, hulls,
// cases by id, marked nodes, highlighted cases.
std::string render_svg(const GeometryDocument& doc, const StyleSheet& style, const Viewport& viewport);
std::string render_svg(const nlohmann::json& doc, const StyleSheet& style, const Viewport& viewport);

struct ValidationOptions {
  std::optional<ClassIndex> focus_class;  // suppress the other classes
  double tick_length = 0.25;              // world units
};

// One radial tick per case at its outermost vertex: inward when the
// prediction matches the label, outward otherwise. `predictions` follows the
// document's polyline order.
std::string render_knn_validation(const GeometryDocument& doc, const std::vector<ClassIndex>& predictions,
                                  const StyleSheet& style, const Viewport& viewport,
                                  const ValidationOptions& options = {});

}  // namespace coc
