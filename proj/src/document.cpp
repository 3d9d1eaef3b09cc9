#include "coc/document.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "coc/error.hpp"

namespace coc {

namespace {

Point on_ring(const AxisSet& axes, const AxisConfig& axis, const PlotLayout& layout, double value) {
  const double theta = axes.angle_of(axis, value);
  const Point c = layout.center_at(axis.position);
  const double r = ring_radius(axes, axis, layout);
  return {c.x + r * std::sin(theta), c.y - r * std::cos(theta)};
}

nlohmann::json point_json(Point p) { return nlohmann::json::array({p.x, p.y}); }

Point point_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw SchemaError("schema violation: point must be [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

GeometryDocument make_document(const Dataset& dataset, const AxisSet& axes, const PlotLayout& layout,
                               const DocumentOptions& options) {
  GeometryDocument doc;
  doc.center = layout.center;
  doc.classes = dataset.classes();
  doc.axes = to_json(axes);
  doc.rings = rings(axes, layout);
  doc.highlighted = options.highlight;
  std::sort(doc.highlighted.begin(), doc.highlighted.end());

  std::vector<std::vector<SegmentStyle>> freq;
  if (options.frequency_bins) {
    freq = frequency_style(dataset, axes, *options.frequency_bins, layout.closed);
  }
  const auto keep = [&](ClassIndex label) { return !options.only_class || *options.only_class == label; };
  for (const auto& c : dataset.cases()) {
    if (!keep(c.label)) continue;
    CasePolyline line;
    line.geom = map_case(c, axes, layout);
    if (!freq.empty()) line.segment_styles = freq[c.id];
    doc.polylines.push_back(std::move(line));
  }
  for (const auto& c : options.extra_cases) {
    if (!keep(c.label)) continue;
    doc.polylines.push_back({map_case(c, axes, layout), {}, c.synthetic});
  }
  std::stable_sort(doc.polylines.begin(), doc.polylines.end(), [](const CasePolyline& a, const CasePolyline& b) {
    return a.geom.case_id < b.geom.case_id;
  });

  if (options.hulls) {
    for (ClassIndex label = 0; label < dataset.classes().size(); ++label) {
      if (!keep(label)) continue;
      doc.hulls.push_back({label, class_hull(dataset, label, axes, layout)});
    }
  }
  if (options.reduction != nullptr) {
    for (const auto& node : options.reduction->selected) {
      if (!keep(node.classes.front())) continue;
      const auto& axis = axes.for_attr(node.attr);
      const double mid = (static_cast<double>(node.bin) + 0.5) / static_cast<double>(options.reduction->bins);
      doc.marked.push_back({node.position, node.attr, node.bin, node.classes.front(), node.case_ids.size(),
                            on_ring(axes, axis, layout, mid)});
    }
    doc.suppressed = options.reduction->suppressed_cases;
  }
  if (options.envelopes != nullptr) {
    for (const auto& env : *options.envelopes) {
      EnvelopeBand band{env.id, env.label, {}};
      for (const auto& axis : axes.by_position()) {
        const auto& iv = env.intervals.at(axis.attr);
        if (iv.lo <= 0.0 && iv.hi >= 1.0) continue;
        band.arcs.push_back({axis.position, layout.center_at(axis.position),
                             ring_radius(axes, axis, layout), axes.angle_of(axis, iv.lo),
                             axes.angle_of(axis, iv.hi)});
      }
      doc.bands.push_back(std::move(band));
    }
  }
  return doc;
}

nlohmann::json to_json(const GeometryDocument& doc) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : doc.classes) classes.push_back({{"name", c.name}, {"color", c.color}});
  nlohmann::json rings = nlohmann::json::array();
  for (const auto& r : doc.rings) {
    rings.push_back({{"position", r.position}, {"attr", r.attr}, {"center", point_json(r.center)},
                     {"radius", r.radius}, {"z", r.z}});
  }
  nlohmann::json polylines = nlohmann::json::array();
  for (const auto& line : doc.polylines) {
    auto j = to_json(line.geom);
    j["synthetic"] = line.synthetic;
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : line.segment_styles) segs.push_back({{"width", s.width}, {"opacity", s.opacity}});
    j["segments"] = segs;
    polylines.push_back(std::move(j));
  }
  nlohmann::json hulls = nlohmann::json::array();
  for (const auto& h : doc.hulls) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : h.hull.points) pts.push_back(point_json(p));
    hulls.push_back({{"label", h.label}, {"degenerate", h.hull.degenerate}, {"points", pts}});
  }
  nlohmann::json marked = nlohmann::json::array();
  for (const auto& m : doc.marked) {
    marked.push_back({{"position", m.position}, {"attr", m.attr}, {"bin", m.bin}, {"label", m.label},
                      {"count", m.count}, {"point", point_json(m.p)}});
  }
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : doc.bands) {
    nlohmann::json arcs = nlohmann::json::array();
    for (const auto& a : b.arcs) {
      arcs.push_back({{"position", a.position}, {"center", point_json(a.center)}, {"radius", a.radius},
                      {"from", a.theta_from}, {"to", a.theta_to}});
    }
    bands.push_back({{"envelope", b.envelope}, {"label", b.label}, {"arcs", arcs}});
  }
  return {{"revision", doc.revision},
          {"center", point_json(doc.center)},
          {"classes", classes},
          {"axes", doc.axes},
          {"rings", rings},
          {"polylines", polylines},
          {"highlighted", doc.highlighted},
          {"hulls", hulls},
          {"marked", marked},
          {"suppressed", doc.suppressed},
          {"bands", bands}};
}

GeometryDocument document_from_json(const nlohmann::json& j) {
  GeometryDocument doc;
  try {
    if (!j.is_object()) throw SchemaError("schema violation: document must be an object");
    doc.revision = j.value("revision", std::size_t{0});
    doc.center = point_from(j.at("center"));
    for (const auto& c : j.at("classes")) {
      doc.classes.push_back({c.at("name").get<std::string>(), c.at("color").get<std::string>()});
    }
    doc.axes = j.value("axes", nlohmann::json::object());
    for (const auto& r : j.at("rings")) {
      Ring ring{r.at("position").get<std::size_t>(), r.at("attr").get<std::size_t>(),
                point_from(r.at("center")), r.at("radius").get<double>(), r.value("z", 0.0)};
      if (!(ring.radius > 0.0)) throw SchemaError("schema violation: ring radius must be positive");
      doc.rings.push_back(ring);
    }
    for (const auto& p : j.at("polylines")) {
      CasePolyline line;
      line.geom.case_id = p.at("case").get<std::size_t>();
      line.geom.label = p.at("label").get<ClassIndex>();
      if (line.geom.label >= doc.classes.size()) {
        throw SchemaError(fmt::format("schema violation: case {} has unknown label", line.geom.case_id));
      }
      line.geom.closed = p.value("closed", false);
      line.geom.style = {p.value("width", 1.0), p.value("opacity", 1.0)};
      line.synthetic = p.value("synthetic", false);
      for (const auto& v : p.at("vertices")) {
        line.geom.vertices.push_back({v.at("position").get<std::size_t>(), v.at("attr").get<std::size_t>(),
                                      v.at("theta").get<double>(),
                                      {v.at("x").get<double>(), v.at("y").get<double>()},
                                      v.value("z", 0.0)});
      }
      if (p.contains("segments")) {
        for (const auto& s : p.at("segments")) {
          line.segment_styles.push_back({s.at("width").get<double>(), s.at("opacity").get<double>()});
        }
      }
      doc.polylines.push_back(std::move(line));
    }
    doc.highlighted = j.value("highlighted", std::vector<std::size_t>{});
    if (j.contains("hulls")) {
      for (const auto& h : j.at("hulls")) {
        ClassHull hull;
        hull.label = h.at("label").get<ClassIndex>();
        hull.hull.degenerate = h.value("degenerate", false);
        for (const auto& pt : h.at("points")) hull.hull.points.push_back(point_from(pt));
        doc.hulls.push_back(std::move(hull));
      }
    }
    if (j.contains("marked")) {
      for (const auto& m : j.at("marked")) {
        doc.marked.push_back({m.at("position").get<std::size_t>(), m.at("attr").get<std::size_t>(),
                              m.at("bin").get<std::size_t>(), m.at("label").get<ClassIndex>(),
                              m.at("count").get<std::size_t>(), point_from(m.at("point"))});
      }
    }
    doc.suppressed = j.value("suppressed", std::vector<std::size_t>{});
    if (j.contains("bands")) {
      for (const auto& b : j.at("bands")) {
        EnvelopeBand band{b.at("envelope").get<std::size_t>(), b.at("label").get<ClassIndex>(), {}};
        for (const auto& a : b.at("arcs")) {
          band.arcs.push_back({a.at("position").get<std::size_t>(), point_from(a.at("center")),
                               a.at("radius").get<double>(), a.at("from").get<double>(), a.at("to").get<double>()});
        }
        doc.bands.push_back(std::move(band));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(fmt::format("schema violation: {}", e.what()));
  }
  for (std::size_t i = 1; i < doc.polylines.size(); ++i) {
    if (doc.polylines[i].geom.case_id < doc.polylines[i - 1].geom.case_id) {
      throw SchemaError("schema violation: polylines must be sorted by case id");
    }
  }
  return doc;
}

}  // namespace coc
