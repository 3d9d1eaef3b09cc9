#include "coc/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "coc/error.hpp"

namespace coc {

namespace {

bool is_hex_color(const std::string& c) {
  return c.size() == 7 && c[0] == '#' &&
         std::all_of(c.begin() + 1, c.end(), [](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)); });
}

std::string num(double v) {
  auto s = fmt::format("{:.6f}", v);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

class SvgWriter {
 public:
  SvgWriter(const Viewport& vp, const StyleSheet& style) : vp_(vp), style_(style) {
    out_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\">\n",
        num(vp.pixel_width), num(vp.pixel_height), num(vp.pixel_width), num(vp.pixel_height));
    out_ += fmt::format("<rect class=\"background\" x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                        num(vp.pixel_width), num(vp.pixel_height), style.background);
  }

  double scale() const { return vp_.pixel_width / vp_.width; }

  void ring(const Ring& r) {
    const Point c = vp_.to_pixels(r.center);
    const double radius = r.radius * scale();
    out_ += fmt::format(
        "<circle class=\"ring\" data-position=\"{}\" data-attr=\"{}\" cx=\"{}\" cy=\"{}\" r=\"{}\" "
        "fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
        r.position, r.attr, num(c.x), num(c.y), num(radius), style_.ring_color, num(style_.ring_width));
    out_ += fmt::format(
        "<line class=\"north-tick\" data-position=\"{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" "
        "stroke=\"{}\" stroke-width=\"{}\"/>\n",
        r.position, num(c.x), num(c.y - radius - style_.north_tick / 2.0), num(c.x),
        num(c.y - radius + style_.north_tick / 2.0), style_.ring_color, num(style_.ring_width));
  }

  void band(const EnvelopeBand& b, const std::string& color) {
    for (const auto& a : b.arcs) {
      const Point c = vp_.to_pixels(a.center);
      const double r = a.radius * scale();
      const auto at = [&](double theta) { return Point{c.x + r * std::sin(theta), c.y - r * std::cos(theta)}; };
      const Point p0 = at(a.theta_from);
      const Point p1 = at(a.theta_to);
      const double sweep = a.theta_to - a.theta_from;
      out_ += fmt::format(
          "<path class=\"envelope\" data-envelope=\"{}\" d=\"M {} {} A {} {} 0 {} {} {} {}\" fill=\"none\" "
          "stroke=\"{}\" stroke-width=\"{}\" stroke-opacity=\"0.35\"/>\n",
          b.envelope, num(p0.x), num(p0.y), num(r), num(r), std::abs(sweep) > std::numbers::pi ? 1 : 0,
          sweep >= 0 ? 1 : 0, num(p1.x), num(p1.y), color, num(4.0 * style_.ring_width));
    }
  }

  void hull(const ClassHull& h, const std::string& color) {
    out_ += fmt::format("<polygon class=\"hull\" data-label=\"{}\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.08\" "
                        "stroke=\"{}\" stroke-width=\"{}\"/>\n",
                        h.label, points(h.hull.points, false), color, color, num(style_.case_width));
  }

  void polyline(const CasePolyline& line, const std::string& color, bool highlight) {
    std::vector<Point> pts;
    for (const auto& v : line.geom.vertices) pts.push_back(v.p);
    const bool close = line.geom.closed && pts.size() >= 3;
    const char* cls = highlight ? "case highlight" : "case";
    if (line.segment_styles.empty()) {
      const double width = highlight ? 2.0 * style_.case_width : style_.case_width;
      out_ += fmt::format(
          "<polyline class=\"{}\" data-case=\"{}\" data-label=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" "
          "stroke-width=\"{}\" stroke-opacity=\"{}\"/>\n",
          cls, line.geom.case_id, line.geom.label, points(pts, close), color, num(width),
          num(highlight ? 1.0 : style_.case_opacity));
    } else {
      out_ += fmt::format("<g class=\"{}\" data-case=\"{}\" data-label=\"{}\" stroke=\"{}\">\n", cls,
                          line.geom.case_id, line.geom.label, color);
      for (std::size_t s = 0; s < line.segment_styles.size(); ++s) {
        const Point a = vp_.to_pixels(pts[s]);
        const Point b = vp_.to_pixels(pts[(s + 1) % pts.size()]);
        out_ += fmt::format(
            "<line class=\"segment\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke-width=\"{}\" "
            "stroke-opacity=\"{}\"/>\n",
            num(a.x), num(a.y), num(b.x), num(b.y), num(line.segment_styles[s].width),
            num(line.segment_styles[s].opacity));
      }
      out_ += "</g>\n";
    }
  }

  void vertices(const CasePolyline& line, const std::string& color) {
    for (const auto& v : line.geom.vertices) {
      const Point p = vp_.to_pixels(v.p);
      out_ += fmt::format("<circle class=\"vertex\" data-case=\"{}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>\n",
                          line.geom.case_id, num(p.x), num(p.y), num(style_.vertex_radius), color);
    }
  }

  void marked(const MarkedNode& m, const std::string& color) {
    const Point p = vp_.to_pixels(m.p);
    out_ += fmt::format(
        "<circle class=\"marked-node\" data-position=\"{}\" data-bin=\"{}\" data-count=\"{}\" cx=\"{}\" cy=\"{}\" "
        "r=\"{}\" fill=\"{}\" fill-opacity=\"0.6\" stroke=\"#000000\" stroke-width=\"0.5\"/>\n",
        m.position, m.bin, m.count, num(p.x), num(p.y), num(style_.vertex_radius * style_.marked_factor), color);
  }

  void tick(std::size_t case_id, bool correct, Point from, Point to) {
    const Point a = vp_.to_pixels(from);
    const Point b = vp_.to_pixels(to);
    out_ += fmt::format(
        "<line class=\"{}\" data-case=\"{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" "
        "stroke-width=\"1.500000\"/>\n",
        correct ? "tick-correct" : "tick-wrong", case_id, num(a.x), num(a.y), num(b.x), num(b.y));
  }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string points(const std::vector<Point>& pts, bool close) const {
    std::string s;
    for (std::size_t i = 0; i < pts.size() + (close ? 1 : 0); ++i) {
      const Point p = vp_.to_pixels(pts[i % pts.size()]);
      if (!s.empty()) s += ' ';
      s += num(p.x) + "," + num(p.y);
    }
    return s;
  }

  const Viewport& vp_;
  const StyleSheet& style_;
  std::string out_;
};

void check_viewport(const Viewport& vp) {
  if (!(vp.width > 0.0 && vp.height > 0.0 && vp.pixel_width > 0.0 && vp.pixel_height > 0.0)) {
    throw DataError("viewport is empty");
  }
}

std::string render(const GeometryDocument& doc, const StyleSheet& style, const Viewport& vp,
                   const std::vector<ClassIndex>* predictions, const ValidationOptions& options) {
  style.validate();
  check_viewport(vp);
  SvgWriter svg(vp, style);

  auto ring_list = doc.rings;
  std::stable_sort(ring_list.begin(), ring_list.end(),
                   [](const Ring& a, const Ring& b) { return a.position < b.position; });
  for (const auto& r : ring_list) svg.ring(r);
  for (const auto& b : doc.bands) svg.band(b, style.color_for(doc, b.label));
  for (const auto& h : doc.hulls) svg.hull(h, style.color_for(doc, h.label));

  const std::set<std::size_t> highlighted(doc.highlighted.begin(), doc.highlighted.end());
  const std::set<std::size_t> suppressed(doc.suppressed.begin(), doc.suppressed.end());
  const auto visible = [&](const CasePolyline& line) {
    return !options.focus_class || line.geom.label == *options.focus_class;
  };
  for (const auto& line : doc.polylines) {
    if (highlighted.count(line.geom.case_id) || suppressed.count(line.geom.case_id) || !visible(line)) continue;
    const auto color = style.color_for(doc, line.geom.label);
    svg.polyline(line, color, false);
    svg.vertices(line, color);
  }
  for (const auto& m : doc.marked) svg.marked(m, style.color_for(doc, m.label));
  for (const auto& line : doc.polylines) {
    if (!highlighted.count(line.geom.case_id) || !visible(line)) continue;
    svg.polyline(line, style.highlight_color, true);
    svg.vertices(line, style.highlight_color);
  }

  if (predictions != nullptr) {
    for (std::size_t i = 0; i < doc.polylines.size(); ++i) {
      const auto& line = doc.polylines[i];
      if (!visible(line) || line.geom.vertices.empty()) continue;
      const auto outer = std::max_element(line.geom.vertices.begin(), line.geom.vertices.end(),
                                          [](const Vertex& a, const Vertex& b) { return a.position < b.position; });
      Point center = doc.center;
      for (const auto& r : doc.rings) {
        if (r.position == outer->position) center = r.center;
      }
      const double dx = outer->p.x - center.x;
      const double dy = outer->p.y - center.y;
      const double len = std::hypot(dx, dy);
      if (!(len > 0.0)) continue;
      const bool correct = (*predictions)[i] == line.geom.label;
      const double sign = correct ? -1.0 : 1.0;
      const Point end{outer->p.x + sign * options.tick_length * dx / len,
                      outer->p.y + sign * options.tick_length * dy / len};
      svg.tick(line.geom.case_id, correct, outer->p, end);
    }
  }
  return svg.finish();
}

}  // namespace

void StyleSheet::validate() const {
  for (const auto& c : class_colors) {
    if (!is_hex_color(c)) throw DataError(fmt::format("invalid color '{}'", c));
  }
  for (const auto* c : {&ring_color, &highlight_color, &background, &hull_color}) {
    if (!is_hex_color(*c)) throw DataError(fmt::format("invalid color '{}'", *c));
  }
  if (!(ring_width > 0.0 && case_width > 0.0 && vertex_radius > 0.0 && marked_factor > 0.0)) {
    throw DataError("style widths and radii must be positive");
  }
}

std::string StyleSheet::color_for(const GeometryDocument& doc, ClassIndex label) const {
  if (label < class_colors.size()) return class_colors[label];
  if (label < doc.classes.size() && is_hex_color(doc.classes[label].color)) return doc.classes[label].color;
  return default_class_color(label);
}

Point Viewport::to_pixels(Point world) const {
  return {(world.x - x) * pixel_width / width, (world.y - y) * pixel_height / height};
}

Point Viewport::to_world(Point pixel) const {
  return {x + pixel.x * width / pixel_width, y + pixel.y * height / pixel_height};
}

Viewport Viewport::fit(const GeometryDocument& doc, double margin, double pixels) {
  double lo_x = std::numeric_limits<double>::infinity();
  double lo_y = lo_x;
  double hi_x = -lo_x;
  double hi_y = -lo_x;
  const auto grow = [&](Point p, double r) {
    lo_x = std::min(lo_x, p.x - r);
    lo_y = std::min(lo_y, p.y - r);
    hi_x = std::max(hi_x, p.x + r);
    hi_y = std::max(hi_y, p.y + r);
  };
  for (const auto& r : doc.rings) grow(r.center, r.radius);
  for (const auto& line : doc.polylines) {
    for (const auto& v : line.geom.vertices) grow(v.p, 0.0);
  }
  if (!std::isfinite(lo_x)) grow(doc.center, 1.0);
  const double side = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9}) * (1.0 + 2.0 * margin);
  const double cx = (lo_x + hi_x) / 2.0;
  const double cy = (lo_y + hi_y) / 2.0;
  return {cx - side / 2.0, cy - side / 2.0, side, side, pixels, pixels};
}

std::string render_svg(const GeometryDocument& doc, const StyleSheet& style, const Viewport& viewport) {
  return render(doc, style, viewport, nullptr, {});
}

std::string render_svg(const nlohmann::json& doc, const StyleSheet& style, const Viewport& viewport) {
  return render_svg(document_from_json(doc), style, viewport);
}

std::string render_knn_validation(const GeometryDocument& doc, const std::vector<ClassIndex>& predictions,
                                  const StyleSheet& style, const Viewport& viewport,
                                  const ValidationOptions& options) {
  if (predictions.size() != doc.polylines.size()) {
    throw DataError(fmt::format("{} predictions for {} cases", predictions.size(), doc.polylines.size()));
  }
  return render(doc, style, viewport, &predictions, options);
}

}  // namespace coc
