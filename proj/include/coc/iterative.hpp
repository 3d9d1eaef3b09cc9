#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coc/dataset.hpp"

namespace coc {

enum class RuleForm {
  interval,  // T1 <= x_i <= T2
  lower,     // T1 <= x_i
  upper,     // x_i <= T2
  linear,    // T1 <= a.x <= T2, one side usually unbounded
};

struct Rule {
  std::size_t id = 0;
  RuleForm form = RuleForm::interval;
  std::size_t attr = 0;              // forms interval/lower/upper
  std::vector<double> coefficients;  // form linear
  double t1 = -std::numeric_limits<double>::infinity();
  double t2 = std::numeric_limits<double>::infinity();
  ClassIndex label = 0;
  std::size_t iteration = 0;  // 1-based
  std::size_t support = 0;    // current cases matched when emitted

  double feature(std::span<const double> x) const;
  bool matches(std::span<const double> x) const;
};

enum class ClassifierKind { sac, linear };

struct GICConfig {
  std::vector<ClassifierKind> kinds{ClassifierKind::sac};  // cycled per iteration
  std::size_t max_iterations = std::numeric_limits<std::size_t>::max();
  std::vector<double> rho{1.0};  // cycled per iteration, each in (0, 1]
  double min_region = 0.05;      // fraction of the current cases, [0, 1)

  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  ClassifierKind kind = ClassifierKind::sac;
  double rho = 1.0;
  std::vector<std::size_t> cases_in;
  std::vector<std::size_t> classified;  // removed at this iteration
  std::vector<std::size_t> rule_ids;
};

struct IterModel {
  std::vector<Rule> rules;  // by iteration, then support (descending)
  std::vector<std::size_t> residual;  // OL_final case ids
  std::vector<IterationRecord> iterations;
  std::size_t iterations_used = 0;
  bool converged = false;
  std::vector<std::string> warnings;
  // Training case -> index into `rules` of the first matching rule, or
  // nullopt for residual cases.
  std::vector<std::optional<std::size_t>> assignment;

  std::size_t dimension = 0;
};

IterModel sac_train(const Dataset& dataset, const GICConfig& config);
IterModel linear_iter_train(const Dataset& dataset, const GICConfig& config);
// Generic driver over the configured classifier kinds.
IterModel gic_run(const Dataset& dataset, const GICConfig& config);

struct IterPrediction {
  std::optional<ClassIndex> label;  // nullopt = unclassified
  std::optional<std::size_t> rule;  // index into model.rules
};

IterPrediction predict(const IterModel& model, std::span<const double> query);

// Unclassified queries fall back to k-NN over the residual cases.
IterPrediction predict_with_fallback(const IterModel& model, const Dataset& dataset,
                                     std::span<const double> query, std::size_t k = 3);

ClassifierKind classifier_kind(const std::string& name);
std::string to_string(ClassifierKind kind);
std::string to_string(RuleForm form);

nlohmann::json to_json(const Rule& rule);
nlohmann::json to_json(const IterModel& model, const Dataset& dataset);

}  // namespace coc
