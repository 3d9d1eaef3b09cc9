#include "coc/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "coc/error.hpp"

namespace coc {

namespace {

constexpr std::size_t kMaxRefinements = 3;

std::vector<std::size_t> all_ids(const Dataset& dataset) {
  std::vector<std::size_t> ids(dataset.size());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

std::size_t node_bin_index(double value, std::size_t bins) {
  if (!(value > 0.0)) return 0;
  const auto b = static_cast<std::size_t>(std::floor(value * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

std::vector<NodeBin> bin_nodes(const Dataset& dataset, const AxisSet& axes, std::size_t bins,
                               std::optional<std::span<const std::size_t>> subset) {
  if (bins < 2) throw DataError("bin count must be >= 2");
  const auto ids = subset ? std::vector<std::size_t>(subset->begin(), subset->end()) : all_ids(dataset);
  std::vector<NodeBin> nodes;
  for (const auto& axis : axes.by_position()) {
    if (axis.attr >= dataset.dimension()) {
      throw DataError(fmt::format("axis refers to missing attribute {}", axis.attr));
    }
    std::map<std::size_t, NodeBin> by_bin;
    for (auto id : ids) {
      const auto b = node_bin_index(dataset.at(id).norm[axis.attr], bins);
      auto& node = by_bin[b];
      node.position = axis.position;
      node.attr = axis.attr;
      node.bin = b;
      node.case_ids.push_back(id);
    }
    for (auto& [_, node] : by_bin) {
      std::map<ClassIndex, std::size_t> counts;
      for (auto id : node.case_ids) ++counts[dataset.at(id).label];
      std::size_t top = 0;
      for (const auto& [label, n] : counts) {
        node.classes.push_back(label);
        top = std::max(top, n);
      }
      node.purity = static_cast<double>(top) / static_cast<double>(node.case_ids.size());
      nodes.push_back(std::move(node));
    }
  }
  return nodes;
}

std::size_t NodeThreshold::for_class(std::size_t class_size) const {
  if (tau) return *tau;
  const auto one_percent = static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(class_size)));
  return std::max<std::size_t>(2, one_percent);
}

OrResult or_reduce(const Dataset& dataset, const AxisSet& axes, std::size_t bins,
                   const NodeThreshold& threshold, bool closed) {
  if (threshold.tau && *threshold.tau < 1) throw DataError("node threshold must be >= 1");
  OrResult result;
  result.bins = bins;
  const auto nodes = bin_nodes(dataset, axes, bins);
  const auto class_sizes = dataset.class_counts();

  // Node membership per (case, position).
  const std::size_t n_axes = axes.size();
  std::vector<std::vector<const NodeBin*>> node_of(dataset.size(), std::vector<const NodeBin*>(n_axes));
  for (const auto& node : nodes) {
    for (auto id : node.case_ids) node_of[id][node.position] = &node;
  }

  std::vector<const NodeBin*> pure;
  for (const auto& node : nodes) {
    if (node.pure()) pure.push_back(&node);
  }
  std::stable_sort(pure.begin(), pure.end(), [](const NodeBin* a, const NodeBin* b) {
    return a->case_ids.size() > b->case_ids.size();
  });
  std::set<const NodeBin*> selected;
  for (const auto* node : pure) {
    if (node->case_ids.size() >= threshold.for_class(class_sizes[node->classes.front()])) {
      selected.insert(node);
      result.selected.push_back(*node);
    }
  }

  std::size_t per_case = n_axes >= 2 ? n_axes - 1 : 0;
  if (closed && n_axes >= 3) ++per_case;
  result.segments_before.assign(dataset.classes().size(), 0);
  result.segments_after.assign(dataset.classes().size(), 0);
  for (const auto& c : dataset.cases()) {
    bool any_selected = false;
    bool any_overlap = false;
    for (const auto* node : node_of[c.id]) {
      any_selected |= selected.count(node) > 0;
      any_overlap |= !node->pure();
    }
    result.segments_before[c.label] += per_case;
    if (any_selected && !any_overlap) {
      result.suppressed_cases.push_back(c.id);
    } else {
      result.segments_after[c.label] += per_case;
    }
  }
  result.total_before = std::accumulate(result.segments_before.begin(), result.segments_before.end(), std::size_t{0});
  result.total_after = std::accumulate(result.segments_after.begin(), result.segments_after.end(), std::size_t{0});
  return result;
}

bool Envelope::contains(std::span<const double> x) const {
  if (x.size() != intervals.size()) {
    throw DataError(fmt::format("query has {} values, envelope has {}", x.size(), intervals.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!intervals[i].contains(x[i])) return false;
  }
  return true;
}

namespace {

std::optional<Envelope> hull_envelope(const Dataset& dataset, ClassIndex label,
                                      const std::vector<const NodeBin*>& nodes, std::size_t bins) {
  if (nodes.empty()) return std::nullopt;
  Envelope env;
  env.label = label;
  env.bins = bins;
  env.intervals.assign(dataset.dimension(), Interval{0.0, 1.0});
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> range;
  for (const auto* node : nodes) {
    auto [it, inserted] = range.try_emplace(node->attr, node->bin, node->bin);
    if (!inserted) {
      it->second.first = std::min(it->second.first, node->bin);
      it->second.second = std::max(it->second.second, node->bin);
    }
  }
  const double b = static_cast<double>(bins);
  for (const auto& [attr, r] : range) {
    env.intervals[attr] = {static_cast<double>(r.first) / b, static_cast<double>(r.second + 1) / b};
  }
  return env;
}

bool is_pure(const Envelope& env, const Dataset& dataset) {
  return std::none_of(dataset.cases().begin(), dataset.cases().end(), [&](const Case& c) {
    return c.label != env.label && env.contains(c.norm);
  });
}

}  // namespace

std::vector<Envelope> build_envelopes(const Dataset& dataset, const AxisSet& axes,
                                      std::span<const NodeBin> selected, std::size_t bins,
                                      const NodeThreshold& threshold,
                                      std::optional<std::span<const std::size_t>> subset) {
  const auto ids = subset ? std::vector<std::size_t>(subset->begin(), subset->end()) : all_ids(dataset);
  const auto class_sizes = dataset.class_counts();

  // Class order: first appearance among the selected nodes (count order).
  std::vector<ClassIndex> order;
  for (const auto& node : selected) {
    if (node.pure() && std::find(order.begin(), order.end(), node.classes.front()) == order.end()) {
      order.push_back(node.classes.front());
    }
  }

  std::vector<Envelope> envelopes;
  for (ClassIndex label : order) {
    std::vector<const NodeBin*> mine;
    for (const auto& node : selected) {
      if (node.pure() && node.classes.front() == label) mine.push_back(&node);
    }
    auto env = hull_envelope(dataset, label, mine, bins);

    std::size_t fine = bins;
    std::vector<NodeBin> refined;
    for (std::size_t r = 0; env && !is_pure(*env, dataset) && r < kMaxRefinements; ++r) {
      fine *= 2;
      refined = bin_nodes(dataset, axes, fine, ids);
      const std::size_t tau = threshold.for_class(class_sizes[label]);
      std::vector<const NodeBin*> picks;
      for (const auto& node : refined) {
        if (node.pure() && node.classes.front() == label && node.case_ids.size() >= tau) picks.push_back(&node);
      }
      env = hull_envelope(dataset, label, picks, fine);
    }
    if (!env || !is_pure(*env, dataset)) continue;

    for (const auto& c : dataset.cases()) {
      if (c.label == label && env->contains(c.norm)) ++env->support;
    }
    if (env->support == 0) continue;
    env->id = envelopes.size();
    envelopes.push_back(std::move(*env));
  }
  return envelopes;
}

std::optional<ClassIndex> envelope_classify(std::span<const Envelope> envelopes,
                                            std::span<const double> query) {
  for (const auto& env : envelopes) {
    if (env.contains(query)) return env.label;
  }
  return std::nullopt;
}

std::optional<ClassIndex> GeneralizedDT::classify(std::span<const double> query) const {
  for (const auto& layer : layers) {
    if (auto label = envelope_classify(layer.envelopes, query)) return label;
  }
  return std::nullopt;
}

GeneralizedDT generalized_dt(const Dataset& dataset, const AxisSet& axes, std::size_t bins,
                             const NodeThreshold& threshold, std::size_t max_iterations) {
  if (threshold.tau && *threshold.tau < 1) throw DataError("node threshold must be >= 1");
  GeneralizedDT tree;
  auto remaining = all_ids(dataset);
  const auto class_sizes = dataset.class_counts();
  std::size_t next_id = 0;

  for (std::size_t t = 1; t <= max_iterations && !remaining.empty(); ++t) {
    std::vector<NodeBin> selected;
    for (auto& node : bin_nodes(dataset, axes, bins, remaining)) {
      if (node.pure() && node.case_ids.size() >= threshold.for_class(class_sizes[node.classes.front()])) {
        selected.push_back(std::move(node));
      }
    }
    std::stable_sort(selected.begin(), selected.end(), [](const NodeBin& a, const NodeBin& b) {
      return a.case_ids.size() > b.case_ids.size();
    });
    if (selected.empty()) break;

    auto envelopes = build_envelopes(dataset, axes, selected, bins, threshold, remaining);
    DtLayer layer;
    layer.iteration = t;
    std::vector<std::size_t> rest;
    for (auto id : remaining) {
      const bool hit = std::any_of(envelopes.begin(), envelopes.end(),
                                   [&](const Envelope& e) { return e.contains(dataset.at(id).norm); });
      (hit ? layer.covered : rest).push_back(id);
    }
    if (layer.covered.empty()) break;
    for (auto& env : envelopes) env.id = next_id++;
    layer.envelopes = std::move(envelopes);
    tree.layers.push_back(std::move(layer));
    remaining = std::move(rest);
  }
  tree.fallback = std::move(remaining);
  return tree;
}

nlohmann::json to_json(const NodeBin& node) {
  return {{"position", node.position},
          {"attr", node.attr},
          {"bin", node.bin},
          {"cases", node.case_ids},
          {"classes", node.classes},
          {"purity", node.purity}};
}

nlohmann::json to_json(const OrResult& result) {
  nlohmann::json selected = nlohmann::json::array();
  for (const auto& node : result.selected) {
    selected.push_back({{"position", node.position},
                        {"attr", node.attr},
                        {"bin", node.bin},
                        {"count", node.case_ids.size()},
                        {"class", node.classes.front()}});
  }
  return {{"bins", result.bins},
          {"selected", selected},
          {"suppressed_cases", result.suppressed_cases},
          {"segments_before", result.segments_before},
          {"segments_after", result.segments_after},
          {"total_before", result.total_before},
          {"total_after", result.total_after}};
}

nlohmann::json to_json(const Envelope& envelope) {
  nlohmann::json intervals = nlohmann::json::array();
  for (const auto& iv : envelope.intervals) intervals.push_back({iv.lo, iv.hi});
  return {{"id", envelope.id},
          {"label", envelope.label},
          {"intervals", intervals},
          {"support", envelope.support},
          {"bins", envelope.bins}};
}

nlohmann::json to_json(const GeneralizedDT& tree) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : tree.layers) {
    nlohmann::json envs = nlohmann::json::array();
    for (const auto& e : layer.envelopes) envs.push_back(to_json(e));
    layers.push_back({{"iteration", layer.iteration}, {"envelopes", envs}, {"covered", layer.covered}});
  }
  return {{"layers", layers}, {"fallback", tree.fallback}};
}

}  // namespace coc
