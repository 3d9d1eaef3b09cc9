#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coc/dataset.hpp"
#include "coc/document.hpp"
#include "coc/geometry.hpp"
#include "coc/iterative.hpp"
#include "coc/knn.hpp"
#include "coc/occlusion.hpp"
#include "coc/render.hpp"

namespace coc {

// Report builders shared by the CLI and the HTTP API so both emit the same
// fields for the same inputs.
nlohmann::json knn_report(const Dataset& dataset, std::size_t k, std::size_t folds, std::uint64_t seed,
                          std::optional<std::size_t> query_case = std::nullopt);
nlohmann::json knne_report(const Dataset& dataset, const KnneConfig& config,
                           std::optional<std::size_t> query_case = std::nullopt);
nlohmann::json iter_report(const Dataset& dataset, const GICConfig& config);
nlohmann::json or_report(const OrResult& result, const Dataset& dataset);

// Strict config document: {"schema_version": 1, "axes", "layout", "style"}.
struct PlotConfig {
  std::optional<AxisSet> axes;
  PlotLayout layout;
  StyleSheet style;
};

inline constexpr int kConfigSchemaVersion = 1;

PlotConfig plot_config_from_json(const nlohmann::json& j);
StyleSheet style_from_json(const nlohmann::json& j);
GICConfig gic_config_from_json(const nlohmann::json& j, ClassifierKind default_kind);

class StaleRevisionError : public std::runtime_error {
 public:
  StaleRevisionError(std::size_t expected, std::size_t actual);
  std::size_t current() const { return current_; }

 private:
  std::size_t current_;
};

struct NeighborOverlay {
  std::size_t case_id = 0;
  std::vector<std::size_t> ks;
  std::vector<std::vector<std::size_t>> neighbors;
};

struct SessionState {
  std::optional<Dataset> dataset;
  AxisSet axes;
  PlotLayout layout;
  StyleSheet style;
  std::map<std::string, nlohmann::json> models;
  std::optional<OrResult> reduction;
  std::optional<std::vector<Envelope>> envelopes;
  std::vector<Case> extra_cases;
  std::vector<std::size_t> highlight;
  std::optional<NeighborOverlay> overlay;
  std::size_t revision = 0;
};

struct StraightenRequest {
  std::optional<std::size_t> case_id;
  std::optional<std::string> mean_of;  // class name: straighten its synthetic mean
  std::string method = "rotation";     // rotation | radius
  double theta = 0.0;
  std::optional<double> first_radius;  // default: current innermost radius
};

// State transitions shared by the CLI and the API.
nlohmann::json apply_straighten(SessionState& state, const StraightenRequest& request);
nlohmann::json apply_or_reduce(SessionState& state, std::size_t bins, std::optional<std::size_t> tau,
                               bool envelopes);

// Single-analyst session. Reads share a lock; mutations take the writer lock,
// check the optional expected revision, and bump the revision on success.
class Session {
 public:
  Session() = default;
  explicit Session(Dataset dataset);

  template <typename Fn>
  auto read(Fn&& fn) const {
    std::shared_lock lock(mutex_);
    return fn(static_cast<const SessionState&>(state_));
  }

  // `fn` mutates a copy; the copy replaces the state only if `fn` returns
  // without throwing, so failed mutations leave no partial change.
  template <typename Fn>
  nlohmann::json mutate(std::optional<std::size_t> expected_revision, Fn&& fn) {
    std::unique_lock lock(mutex_);
    if (expected_revision && *expected_revision != state_.revision) {
      throw StaleRevisionError(*expected_revision, state_.revision);
    }
    SessionState next = state_;
    nlohmann::json result = fn(next);
    next.revision = state_.revision + 1;
    state_ = std::move(next);
    result["revision"] = state_.revision;
    return result;
  }

  std::size_t revision() const;

  static void reset_view(SessionState& state);
  static GeometryDocument document(const SessionState& state);
  static nlohmann::json geometry_json(const SessionState& state);

 private:
  mutable std::shared_mutex mutex_;
  SessionState state_;
};

}  // namespace coc
