#include "coc/session.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "coc/error.hpp"

namespace coc {

namespace {

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw SchemaError(fmt::format("{}: expected an object", what));
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw SchemaError(fmt::format("{}: unknown field '{}'", what, key));
    }
  }
}

}  // namespace

nlohmann::json knn_report(const Dataset& dataset, std::size_t k, std::size_t folds, std::uint64_t seed,
                          std::optional<std::size_t> query_case) {
  const auto plan = stratified_folds(dataset, folds, seed);
  const std::size_t ks[] = {k};
  const auto cv = knn_sweep(dataset, plan, ks).front();
  nlohmann::json report = {{"model", "knn"},
                           {"k", k},
                           {"folds", plan.folds},
                           {"folds_reduced", plan.reduced},
                           {"seed", seed},
                           {"cv", to_json(cv)}};
  if (query_case) {
    const auto& c = dataset.at(*query_case);
    const KnnModel model(k, reference_points(dataset));
    const auto ranked = model.ranked(c.norm, c.id);
    const auto label = vote(ranked, k, [&](std::size_t id) { return dataset.at(id).label; });
    report["query"] = {{"case", c.id},
                       {"label", c.label},
                       {"prediction", label},
                       {"neighbors", std::vector<std::size_t>(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k))}};
  }
  return report;
}

nlohmann::json knne_report(const Dataset& dataset, const KnneConfig& config,
                           std::optional<std::size_t> query_case) {
  const auto model = knne_train(dataset, config);
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t i = 0; i < model.candidates.size(); ++i) {
    const auto& c = model.candidates[i];
    const std::size_t k = i + 1;
    const bool excluded = std::find(model.excluded_ks.begin(), model.excluded_ks.end(), k) != model.excluded_ks.end();
    table.push_back({{"k", k}, {"mean", c.mean}, {"std", c.stddev}, {"folds", c.fold_accuracies}, {"excluded", excluded}});
  }
  auto body = to_json(model);
  nlohmann::json report = {{"model", "knne"},
                           {"K", config.max_k},
                           {"folds", config.folds},
                           {"seed", config.seed},
                           {"table", table},
                           {"members", body["members"]},
                           {"copeland_rank", body["copeland_rank"]},
                           {"ranked", body["ranked"]},
                           {"trace", body["trace"]},
                           {"accuracy", model.accuracy}};
  if (query_case) {
    const auto& c = dataset.at(*query_case);
    nlohmann::json neighbors = nlohmann::json::array();
    const auto lists = model.neighbors(c.norm, c.id);
    for (std::size_t i = 0; i < lists.size(); ++i) neighbors.push_back({{"k", model.member_ks[i]}, {"ids", lists[i]}});
    report["query"] = {{"case", c.id},
                       {"label", c.label},
                       {"prediction", model.predict(c.norm, c.id)},
                       {"neighbors", neighbors}};
  }
  return report;
}

nlohmann::json iter_report(const Dataset& dataset, const GICConfig& config) {
  const auto model = gic_run(dataset, config);
  auto report = to_json(model, dataset);
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : config.kinds) kinds.push_back(to_string(k));
  report["config"] = {{"kinds", kinds},
                      {"max_iterations", config.max_iterations == std::numeric_limits<std::size_t>::max()
                                             ? nlohmann::json(0)
                                             : nlohmann::json(config.max_iterations)},
                      {"rho", config.rho},
                      {"min_region", config.min_region}};
  report["cases"] = dataset.size();
  return report;
}

nlohmann::json or_report(const OrResult& result, const Dataset& dataset) {
  auto j = to_json(result);
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < dataset.classes().size(); ++c) {
    per_class.push_back({{"class", dataset.classes()[c].name},
                         {"before", result.segments_before[c]},
                         {"after", result.segments_after[c]}});
  }
  j["per_class"] = per_class;
  return j;
}

StyleSheet style_from_json(const nlohmann::json& j) {
  require_keys(j, {"class_colors", "ring_color", "ring_width", "case_width", "case_opacity", "highlight_color",
                   "background", "hull_color", "vertex_radius", "marked_factor", "north_tick"},
               "style");
  StyleSheet s;
  s.class_colors = j.value("class_colors", s.class_colors);
  s.ring_color = j.value("ring_color", s.ring_color);
  s.ring_width = j.value("ring_width", s.ring_width);
  s.case_width = j.value("case_width", s.case_width);
  s.case_opacity = j.value("case_opacity", s.case_opacity);
  s.highlight_color = j.value("highlight_color", s.highlight_color);
  s.background = j.value("background", s.background);
  s.hull_color = j.value("hull_color", s.hull_color);
  s.vertex_radius = j.value("vertex_radius", s.vertex_radius);
  s.marked_factor = j.value("marked_factor", s.marked_factor);
  s.north_tick = j.value("north_tick", s.north_tick);
  s.validate();
  return s;
}

PlotConfig plot_config_from_json(const nlohmann::json& j) {
  require_keys(j, {"schema_version", "axes", "layout", "style"}, "config");
  if (!j.contains("schema_version") || j.at("schema_version") != kConfigSchemaVersion) {
    throw DataError(fmt::format("config: schema_version must be {}", kConfigSchemaVersion));
  }
  PlotConfig config;
  try {
    if (j.contains("axes")) config.axes = axes_from_json(j.at("axes"));
    if (j.contains("layout")) config.layout = layout_from_json(j.at("layout"));
    if (j.contains("style")) config.style = style_from_json(j.at("style"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("config: {}", e.what()));
  }
  return config;
}

GICConfig gic_config_from_json(const nlohmann::json& j, ClassifierKind default_kind) {
  require_keys(j, {"kinds", "max_iterations", "rho", "min_region", "revision"}, "classifier config");
  GICConfig config;
  config.kinds = {default_kind};
  if (j.contains("kinds")) {
    config.kinds.clear();
    for (const auto& k : j.at("kinds")) config.kinds.push_back(classifier_kind(k.get<std::string>()));
  }
  if (j.contains("max_iterations")) {
    const auto cap = j.at("max_iterations").get<std::size_t>();
    config.max_iterations = cap == 0 ? std::numeric_limits<std::size_t>::max() : cap;
  }
  if (j.contains("rho")) {
    const auto& r = j.at("rho");
    config.rho = r.is_array() ? r.get<std::vector<double>>() : std::vector<double>{r.get<double>()};
  }
  config.min_region = j.value("min_region", config.min_region);
  config.validate();
  return config;
}

nlohmann::json apply_straighten(SessionState& state, const StraightenRequest& request) {
  if (!state.dataset) throw NotFoundError("no dataset loaded");
  const auto& dataset = *state.dataset;
  if (request.case_id.has_value() == request.mean_of.has_value()) {
    throw DataError("straighten needs exactly one of a case id or a class mean");
  }
  Case target;
  if (request.case_id) {
    target = dataset.at(*request.case_id);
  } else {
    target = synth_mean(dataset, dataset.class_index(*request.mean_of));
    std::erase_if(state.extra_cases, [&](const Case& c) { return c.synthetic && c.label == target.label; });
    state.extra_cases.push_back(target);
  }
  if (request.method == "rotation") {
    state.axes = straighten_rotation(target, state.axes, request.theta);
  } else if (request.method == "radius") {
    const double r1 = request.first_radius.value_or(state.axes.by_position().front().radius);
    state.axes = straighten_radius(target, r1, state.axes);
  } else {
    throw DataError(fmt::format("unknown straightening method '{}'", request.method));
  }
  state.highlight = {target.id};
  const auto geom = map_case(target, state.axes, state.layout);
  return {{"case", target.id},
          {"synthetic", target.synthetic},
          {"method", request.method},
          {"residual", collinearity_residual(geom, state.layout.center)},
          {"axes", to_json(state.axes)}};
}

nlohmann::json apply_or_reduce(SessionState& state, std::size_t bins, std::optional<std::size_t> tau,
                               bool envelopes) {
  if (!state.dataset) throw NotFoundError("no dataset loaded");
  const NodeThreshold threshold{tau};
  state.reduction = or_reduce(*state.dataset, state.axes, bins, threshold, state.layout.closed);
  auto report = or_report(*state.reduction, *state.dataset);
  if (envelopes) {
    state.envelopes = build_envelopes(*state.dataset, state.axes, state.reduction->selected, bins, threshold);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : *state.envelopes) list.push_back(to_json(e));
    report["envelopes"] = list;
  } else {
    state.envelopes.reset();
  }
  return report;
}

StaleRevisionError::StaleRevisionError(std::size_t expected, std::size_t actual)
    : std::runtime_error(fmt::format("stale revision {} (current is {})", expected, actual)), current_(actual) {}

Session::Session(Dataset dataset) {
  state_.dataset = std::move(dataset);
  reset_view(state_);
}

std::size_t Session::revision() const {
  std::shared_lock lock(mutex_);
  return state_.revision;
}

void Session::reset_view(SessionState& state) {
  state.axes = state.dataset ? AxisSet::defaults(state.dataset->dimension()) : AxisSet{};
  state.layout = PlotLayout{};
  state.models.clear();
  state.reduction.reset();
  state.envelopes.reset();
  state.extra_cases.clear();
  state.highlight.clear();
  state.overlay.reset();
}

GeometryDocument Session::document(const SessionState& state) {
  if (!state.dataset) throw NotFoundError("no dataset loaded");
  DocumentOptions options;
  options.highlight = state.highlight;
  options.extra_cases = state.extra_cases;
  if (state.reduction) options.reduction = &*state.reduction;
  if (state.envelopes) options.envelopes = &*state.envelopes;
  auto doc = make_document(*state.dataset, state.axes, state.layout, options);
  doc.revision = state.revision;
  return doc;
}

nlohmann::json Session::geometry_json(const SessionState& state) {
  auto j = to_json(document(state));
  if (state.overlay) {
    nlohmann::json lists = nlohmann::json::array();
    for (std::size_t i = 0; i < state.overlay->ks.size(); ++i) {
      lists.push_back({{"k", state.overlay->ks[i]}, {"ids", state.overlay->neighbors[i]}});
    }
    j["overlay"] = {{"case", state.overlay->case_id}, {"neighbors", lists}};
  }
  if (state.reduction) {
    j["or_metric"] = {{"total_before", state.reduction->total_before}, {"total_after", state.reduction->total_after}};
  }
  j["layout"] = to_json(state.layout);
  return j;
}

}  // namespace coc
