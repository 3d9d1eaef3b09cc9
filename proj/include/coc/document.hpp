#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "coc/dataset.hpp"
#include "coc/geometry.hpp"
#include "coc/occlusion.hpp"

namespace coc {

struct ClassHull {
  ClassIndex label = 0;
  Hull hull;
};

// Enlarged glyph for a selected pure node, drawn at the bin's center value.
struct MarkedNode {
  std::size_t position = 0;
  std::size_t attr = 0;
  std::size_t bin = 0;
  ClassIndex label = 0;
  std::size_t count = 0;
  Point p;
};

struct Arc {
  std::size_t position = 0;
  Point center;
  double radius = 0.0;
  double theta_from = 0.0;
  double theta_to = 0.0;
};

struct EnvelopeBand {
  std::size_t envelope = 0;
  ClassIndex label = 0;
  std::vector<Arc> arcs;
};

struct CasePolyline {
  PolylineGeom geom;
  std::vector<SegmentStyle> segment_styles;  // empty = uniform geom.style
  bool synthetic = false;
};

// Everything a renderer needs; the JSON form is the drawlist served to the UI.
struct GeometryDocument {
  std::size_t revision = 0;
  Point center;
  std::vector<ClassInfo> classes;
  nlohmann::json axes;  // echo of the axis configuration
  std::vector<Ring> rings;
  std::vector<CasePolyline> polylines;  // sorted by case id
  std::vector<std::size_t> highlighted;
  std::vector<ClassHull> hulls;
  std::vector<MarkedNode> marked;
  std::vector<std::size_t> suppressed;
  std::vector<EnvelopeBand> bands;
};

struct DocumentOptions {
  std::vector<std::size_t> highlight;
  std::vector<Case> extra_cases;  // e.g. synthetic means, drawn after dataset cases
  bool hulls = false;
  std::optional<std::size_t> frequency_bins;
  const OrResult* reduction = nullptr;
  const std::vector<Envelope>* envelopes = nullptr;
  std::optional<ClassIndex> only_class;  // other classes omitted
};

GeometryDocument make_document(const Dataset& dataset, const AxisSet& axes, const PlotLayout& layout,
                               const DocumentOptions& options = {});

nlohmann::json to_json(const GeometryDocument& doc);
// Validates the drawlist schema; throws DataError on violations.
GeometryDocument document_from_json(const nlohmann::json& j);

}  // namespace coc
