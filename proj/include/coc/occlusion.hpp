#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "coc/dataset.hpp"
#include "coc/geometry.hpp"

namespace coc {

// A quantized point on one ring: cases whose value on the axis falls in
// [bin/B, (bin+1)/B), with v = 1 folded into the last bin.
struct NodeBin {
  std::size_t position = 0;
  std::size_t attr = 0;
  std::size_t bin = 0;
  std::vector<std::size_t> case_ids;
  std::vector<ClassIndex> classes;  // sorted, distinct
  double purity = 0.0;              // majority-class fraction

  bool pure() const { return classes.size() == 1; }
};

std::size_t node_bin_index(double value, std::size_t bins);

// Non-empty bins per axis, ordered by (position, bin). Only `subset` cases
// are binned when given.
std::vector<NodeBin> bin_nodes(const Dataset& dataset, const AxisSet& axes, std::size_t bins,
                               std::optional<std::span<const std::size_t>> subset = std::nullopt);

// Per-class node threshold; unset classes use max(2, ceil(1% of class size)).
struct NodeThreshold {
  std::optional<std::size_t> tau;

  std::size_t for_class(std::size_t class_size) const;
};

struct OrResult {
  std::size_t bins = 0;
  std::vector<NodeBin> selected;            // pure nodes with count >= tau, count descending
  std::vector<std::size_t> suppressed_cases;  // all segments of these cases are hidden
  std::vector<std::size_t> segments_before;   // per class
  std::vector<std::size_t> segments_after;    // per class
  std::size_t total_before = 0;
  std::size_t total_after = 0;
};

// A case is suppressed when at least one of its vertices sits in a selected
// pure node and none sits in an overlap node.
OrResult or_reduce(const Dataset& dataset, const AxisSet& axes, std::size_t bins,
                   const NodeThreshold& threshold = {}, bool closed = false);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;  // half-open, except hi == 1 which is inclusive

  bool contains(double v) const { return v >= lo && (v < hi || (hi >= 1.0 && v <= hi)); }
};

struct Envelope {
  std::size_t id = 0;
  ClassIndex label = 0;
  std::vector<Interval> intervals;  // indexed by attribute
  std::size_t support = 0;          // class cases inside
  std::size_t bins = 0;             // resolution the envelope was built at

  bool contains(std::span<const double> x) const;
};

// One axis-aligned band per class from the interval hull of its selected
// nodes. Bands holding a case of another class are rebuilt at 2B (up to
// three times) and dropped if still impure.
std::vector<Envelope> build_envelopes(const Dataset& dataset, const AxisSet& axes,
                                      std::span<const NodeBin> selected, std::size_t bins,
                                      const NodeThreshold& threshold = {},
                                      std::optional<std::span<const std::size_t>> subset = std::nullopt);

// First containing envelope wins; nullopt = outside.
std::optional<ClassIndex> envelope_classify(std::span<const Envelope> envelopes,
                                            std::span<const double> query);

struct DtLayer {
  std::size_t iteration = 0;
  std::vector<Envelope> envelopes;
  std::vector<std::size_t> covered;  // cases removed at this layer
};

struct GeneralizedDT {
  std::vector<DtLayer> layers;
  std::vector<std::size_t> fallback;  // residue for a separate classifier

  std::size_t depth() const { return layers.size(); }
  std::optional<ClassIndex> classify(std::span<const double> query) const;
};

GeneralizedDT generalized_dt(const Dataset& dataset, const AxisSet& axes, std::size_t bins,
                             const NodeThreshold& threshold, std::size_t max_iterations);

nlohmann::json to_json(const NodeBin& node);
nlohmann::json to_json(const OrResult& result);
nlohmann::json to_json(const Envelope& envelope);
nlohmann::json to_json(const GeneralizedDT& tree);

}  // namespace coc
