#include "coc/iterative.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "coc/error.hpp"
#include "coc/knn.hpp"

namespace coc {

double Rule::feature(std::span<const double> x) const {
  if (form != RuleForm::linear) return x[attr];
  double f = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) f += coefficients[i] * x[i];
  return f;
}

bool Rule::matches(std::span<const double> x) const {
  const double f = feature(x);
  return t1 <= f && f <= t2;
}

void GICConfig::validate() const {
  if (kinds.empty()) throw DataError("GIC needs at least one classifier kind");
  if (max_iterations < 1) throw DataError("I_max must be >= 1");
  if (rho.empty()) throw DataError("GIC needs at least one purity threshold");
  for (double r : rho) {
    if (!(r > 0.0 && r <= 1.0)) throw DataError(fmt::format("purity threshold {} not in (0, 1]", r));
  }
  if (!(min_region >= 0.0 && min_region < 1.0)) {
    throw DataError(fmt::format("min_region {} not in [0, 1)", min_region));
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Group {
  double value = 0.0;
  std::vector<std::size_t> cases;
  std::map<ClassIndex, std::size_t> counts;
};

struct Run {
  std::size_t first = 0;
  std::size_t last = 0;
  ClassIndex label = 0;
  std::vector<std::size_t> cases;
};

std::vector<Group> group_values(std::span<const std::size_t> current, std::span<const double> feature,
                                const Dataset& dataset) {
  std::vector<std::size_t> order(current.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return feature[a] < feature[b]; });
  std::vector<Group> groups;
  for (auto i : order) {
    if (groups.empty() || groups.back().value != feature[i]) groups.push_back({feature[i], {}, {}});
    groups.back().cases.push_back(current[i]);
    ++groups.back().counts[dataset.at(current[i]).label];
  }
  return groups;
}

ClassIndex majority(const std::map<ClassIndex, std::size_t>& counts) {
  ClassIndex best = counts.begin()->first;
  for (const auto& [label, n] : counts) {
    if (n > counts.at(best)) best = label;
  }
  return best;
}

double purity_of(const std::map<ClassIndex, std::size_t>& counts, ClassIndex label) {
  std::size_t total = 0;
  for (const auto& [_, n] : counts) total += n;
  const auto it = counts.find(label);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

// Grows a run from `start` in `step` direction while the label purity stays >= rho.
Run grow_run(const std::vector<Group>& groups, std::size_t start, int step, double rho) {
  Run run;
  run.label = majority(groups[start].counts);
  std::map<ClassIndex, std::size_t> pooled = groups[start].counts;
  std::size_t lo = start;
  std::size_t hi = start;
  while (true) {
    const std::ptrdiff_t next = step > 0 ? static_cast<std::ptrdiff_t>(hi) + 1 : static_cast<std::ptrdiff_t>(lo) - 1;
    if (next < 0 || next >= static_cast<std::ptrdiff_t>(groups.size())) break;
    auto trial = pooled;
    for (const auto& [label, n] : groups[static_cast<std::size_t>(next)].counts) trial[label] += n;
    if (purity_of(trial, run.label) < rho) break;
    pooled = std::move(trial);
    (step > 0 ? hi : lo) = static_cast<std::size_t>(next);
  }
  run.first = lo;
  run.last = hi;
  for (std::size_t g = lo; g <= hi; ++g) {
    run.cases.insert(run.cases.end(), groups[g].cases.begin(), groups[g].cases.end());
  }
  return run;
}

std::vector<Run> all_runs(const std::vector<Group>& groups, double rho) {
  std::vector<Run> runs;
  std::size_t i = 0;
  while (i < groups.size()) {
    if (purity_of(groups[i].counts, majority(groups[i].counts)) < rho) {
      ++i;
      continue;
    }
    runs.push_back(grow_run(groups, i, +1, rho));
    i = runs.back().last + 1;
  }
  return runs;
}

std::vector<Run> tail_runs(const std::vector<Group>& groups, double rho) {
  std::vector<Run> runs;
  if (groups.empty()) return runs;
  if (purity_of(groups.front().counts, majority(groups.front().counts)) >= rho) {
    runs.push_back(grow_run(groups, 0, +1, rho));
  }
  const std::size_t last = groups.size() - 1;
  if (purity_of(groups[last].counts, majority(groups[last].counts)) >= rho) {
    Run high = grow_run(groups, last, -1, rho);
    if (runs.empty() || runs.front().last < high.first) runs.push_back(std::move(high));
  }
  return runs;
}

// Lower bound strictly between a and b (a < b) that excludes a.
double lower_cut(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid > a ? mid : b;
}

// Upper bound strictly between a and b (a < b) that excludes b.
double upper_cut(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid < b ? mid : a;
}

void set_thresholds(Rule& rule, const std::vector<Group>& groups, const Run& run, bool linear) {
  const bool at_low = run.first == 0;
  const bool at_high = run.last + 1 == groups.size();
  if (at_low && at_high) {
    double gap = kInf;
    for (std::size_t g = 1; g < groups.size(); ++g) gap = std::min(gap, groups[g].value - groups[g - 1].value);
    const double half = std::isfinite(gap) ? gap / 2.0 : 0.0;
    rule.form = linear ? RuleForm::linear : RuleForm::interval;
    rule.t1 = groups.front().value - half;
    rule.t2 = groups.back().value + half;
  } else if (at_low) {
    rule.form = linear ? RuleForm::linear : RuleForm::upper;
    rule.t1 = -kInf;
    rule.t2 = upper_cut(groups[run.last].value, groups[run.last + 1].value);
  } else if (at_high) {
    rule.form = linear ? RuleForm::linear : RuleForm::lower;
    rule.t1 = lower_cut(groups[run.first - 1].value, groups[run.first].value);
    rule.t2 = kInf;
  } else {
    rule.form = RuleForm::interval;
    rule.t1 = lower_cut(groups[run.first - 1].value, groups[run.first].value);
    rule.t2 = upper_cut(groups[run.last].value, groups[run.last + 1].value);
  }
}

bool large_enough(const Run& run, std::size_t current_size, double min_region) {
  return !run.cases.empty() &&
         static_cast<double>(run.cases.size()) >= min_region * static_cast<double>(current_size);
}

std::vector<Rule> sac_step(const Dataset& dataset, std::span<const std::size_t> current, double rho,
                           double min_region) {
  std::vector<Rule> rules;
  std::vector<double> feature(current.size());
  for (std::size_t attr = 0; attr < dataset.dimension(); ++attr) {
    for (std::size_t i = 0; i < current.size(); ++i) feature[i] = dataset.at(current[i]).norm[attr];
    const auto groups = group_values(current, feature, dataset);
    for (const auto& run : all_runs(groups, rho)) {
      if (!large_enough(run, current.size(), min_region)) continue;
      Rule rule;
      rule.attr = attr;
      rule.label = run.label;
      rule.support = run.cases.size();
      set_thresholds(rule, groups, run, false);
      rules.push_back(std::move(rule));
    }
  }
  return rules;
}

std::vector<double> centroid(const Dataset& dataset, std::span<const std::size_t> ids) {
  std::vector<double> c(dataset.dimension(), 0.0);
  for (auto id : ids) {
    const auto& v = dataset.at(id).norm;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += v[i];
  }
  for (auto& x : c) x /= static_cast<double>(ids.size());
  return c;
}

std::vector<Rule> rules_along(const Dataset& dataset, std::span<const std::size_t> current,
                              std::vector<double> direction, double rho, double min_region) {
  double norm = 0.0;
  for (double a : direction) norm += a * a;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) return {};
  for (auto& a : direction) a /= norm;

  std::vector<double> feature(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) {
    const auto& x = dataset.at(current[i]).norm;
    double f = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) f += direction[j] * x[j];
    feature[i] = f;
  }
  const auto groups = group_values(current, feature, dataset);
  std::vector<Rule> rules;
  for (const auto& run : tail_runs(groups, rho)) {
    if (!large_enough(run, current.size(), min_region)) continue;
    Rule rule;
    rule.coefficients = direction;
    rule.label = run.label;
    rule.support = run.cases.size();
    set_thresholds(rule, groups, run, true);
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<Rule> linear_step(const Dataset& dataset, std::span<const std::size_t> current,
                              double rho, double min_region) {
  const std::size_t n = dataset.dimension();
  std::map<ClassIndex, std::vector<std::size_t>> by_class;
  for (auto id : current) by_class[dataset.at(id).label].push_back(id);
  std::vector<ClassIndex> classes;
  for (const auto& [label, _] : by_class) classes.push_back(label);
  std::stable_sort(classes.begin(), classes.end(), [&](ClassIndex a, ClassIndex b) {
    return by_class[a].size() > by_class[b].size();
  });

  // Centroid differences (most populous pair first), then each attribute
  // axis; the direction whose tail rules cover the most cases wins.
  std::vector<std::vector<double>> directions;
  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = a + 1; b < classes.size(); ++b) {
      const auto ca = centroid(dataset, by_class[classes[a]]);
      const auto cb = centroid(dataset, by_class[classes[b]]);
      std::vector<double> dir(n);
      for (std::size_t i = 0; i < n; ++i) dir[i] = cb[i] - ca[i];
      directions.push_back(std::move(dir));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    directions.emplace_back(n, 0.0);
    directions.back()[i] = 1.0;
  }
  std::vector<Rule> best;
  std::size_t best_support = 0;
  for (const auto& dir : directions) {
    auto rules = rules_along(dataset, current, dir, rho, min_region);
    std::size_t support = 0;
    for (const auto& r : rules) support += r.support;
    if (support > best_support) {
      best_support = support;
      best = std::move(rules);
    }
  }
  if (!best.empty()) return best;
  // The case farthest from the centroid is the unique maximum of the
  // projection onto (case - centroid), which separates it from every other
  // distinct case.
  const auto c = centroid(dataset, current);
  std::vector<std::pair<double, std::size_t>> far;
  for (auto id : current) {
    const auto& x = dataset.at(id).norm;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += (x[i] - c[i]) * (x[i] - c[i]);
    far.emplace_back(-d, id);
  }
  std::sort(far.begin(), far.end());
  const std::size_t tries = std::min<std::size_t>(far.size(), 16);
  for (std::size_t t = 0; t < tries; ++t) {
    const auto& x = dataset.at(far[t].second).norm;
    std::vector<double> dir(n);
    for (std::size_t i = 0; i < n; ++i) dir[i] = x[i] - c[i];
    auto rules = rules_along(dataset, current, dir, rho, min_region);
    if (!rules.empty()) return rules;
  }
  return {};
}

// Cases whose exact normalized vector also occurs with another label.
std::vector<std::size_t> cross_class_duplicates(const Dataset& dataset) {
  std::map<std::vector<double>, std::vector<std::size_t>> by_point;
  for (const auto& c : dataset.cases()) by_point[c.norm].push_back(c.id);
  std::vector<std::size_t> dups;
  for (const auto& [_, ids] : by_point) {
    const auto first = dataset.at(ids.front()).label;
    const bool mixed = std::any_of(ids.begin(), ids.end(),
                                   [&](std::size_t id) { return dataset.at(id).label != first; });
    if (mixed) dups.insert(dups.end(), ids.begin(), ids.end());
  }
  std::sort(dups.begin(), dups.end());
  return dups;
}

}  // namespace

IterModel gic_run(const Dataset& dataset, const GICConfig& config) {
  config.validate();
  IterModel model;
  model.dimension = dataset.dimension();

  std::vector<std::size_t> current(dataset.size());
  std::iota(current.begin(), current.end(), 0);
  std::vector<std::size_t> set_aside;
  const bool uses_linear = std::find(config.kinds.begin(), config.kinds.end(),
                                     ClassifierKind::linear) != config.kinds.end();
  if (uses_linear) {
    set_aside = cross_class_duplicates(dataset);
    if (!set_aside.empty()) {
      model.warnings.push_back(fmt::format(
          "{} cases are duplicates across classes and were routed to the residual set", set_aside.size()));
      std::vector<std::size_t> kept;
      std::set_difference(current.begin(), current.end(), set_aside.begin(), set_aside.end(),
                          std::back_inserter(kept));
      current = std::move(kept);
    }
  }

  const std::size_t cycle = config.kinds.size();
  std::size_t idle = 0;
  std::size_t t = 0;
  while (!current.empty() && t < config.max_iterations) {
    ++t;
    IterationRecord record;
    record.iteration = t;
    record.kind = config.kinds[(t - 1) % cycle];
    record.rho = config.rho[(t - 1) % config.rho.size()];
    record.cases_in = current;

    auto rules = record.kind == ClassifierKind::sac
                     ? sac_step(dataset, current, record.rho, config.min_region)
                     : linear_step(dataset, current, record.rho, config.min_region);
    std::stable_sort(rules.begin(), rules.end(),
                     [](const Rule& a, const Rule& b) { return a.support > b.support; });

    std::vector<std::size_t> remaining;
    for (auto id : current) {
      const auto& x = dataset.at(id).norm;
      const bool hit = std::any_of(rules.begin(), rules.end(), [&](const Rule& r) { return r.matches(x); });
      (hit ? record.classified : remaining).push_back(id);
    }
    for (auto& rule : rules) {
      rule.id = model.rules.size();
      rule.iteration = t;
      record.rule_ids.push_back(rule.id);
      model.rules.push_back(std::move(rule));
    }
    model.iterations.push_back(std::move(record));
    if (model.iterations.back().rule_ids.empty()) {
      if (++idle >= cycle) break;
      continue;
    }
    idle = 0;
    current = std::move(remaining);
  }
  model.iterations_used = t;
  model.converged = current.empty() || idle >= cycle;

  model.residual = current;
  model.residual.insert(model.residual.end(), set_aside.begin(), set_aside.end());
  std::sort(model.residual.begin(), model.residual.end());

  model.assignment.assign(dataset.size(), std::nullopt);
  std::vector<bool> residual(dataset.size(), false);
  for (auto id : model.residual) residual[id] = true;
  for (const auto& c : dataset.cases()) {
    if (residual[c.id]) continue;
    for (std::size_t r = 0; r < model.rules.size(); ++r) {
      if (model.rules[r].matches(c.norm)) {
        model.assignment[c.id] = r;
        break;
      }
    }
  }
  return model;
}

IterModel sac_train(const Dataset& dataset, const GICConfig& config) {
  auto cfg = config;
  cfg.kinds = {ClassifierKind::sac};
  return gic_run(dataset, cfg);
}

IterModel linear_iter_train(const Dataset& dataset, const GICConfig& config) {
  auto cfg = config;
  cfg.kinds = {ClassifierKind::linear};
  return gic_run(dataset, cfg);
}

IterPrediction predict(const IterModel& model, std::span<const double> query) {
  if (query.size() != model.dimension) {
    throw DataError(fmt::format("query has {} values, model expects {}", query.size(), model.dimension));
  }
  for (std::size_t r = 0; r < model.rules.size(); ++r) {
    if (model.rules[r].matches(query)) return {model.rules[r].label, r};
  }
  return {};
}

IterPrediction predict_with_fallback(const IterModel& model, const Dataset& dataset,
                                     std::span<const double> query, std::size_t k) {
  auto result = predict(model, query);
  if (result.label || model.residual.empty()) return result;
  const KnnModel knn(std::min(k, model.residual.size()), reference_points(dataset, model.residual));
  result.label = knn.classify(query).label;
  return result;
}

ClassifierKind classifier_kind(const std::string& name) {
  if (name == "sac") return ClassifierKind::sac;
  if (name == "linear") return ClassifierKind::linear;
  throw DataError(fmt::format("unknown classifier kind '{}'", name));
}

std::string to_string(ClassifierKind kind) {
  return kind == ClassifierKind::sac ? "sac" : "linear";
}

std::string to_string(RuleForm form) {
  switch (form) {
    case RuleForm::interval: return "interval";
    case RuleForm::lower: return "lower";
    case RuleForm::upper: return "upper";
    case RuleForm::linear: return "linear";
  }
  return "interval";
}

nlohmann::json to_json(const Rule& rule) {
  const auto bound = [](double t) -> nlohmann::json {
    if (std::isinf(t)) return nullptr;
    return t;
  };
  nlohmann::json j = {{"id", rule.id},
                      {"form", to_string(rule.form)},
                      {"t1", bound(rule.t1)},
                      {"t2", bound(rule.t2)},
                      {"label", rule.label},
                      {"iteration", rule.iteration},
                      {"support", rule.support}};
  if (rule.form == RuleForm::linear) {
    j["coefficients"] = rule.coefficients;
  } else {
    j["attr"] = rule.attr;
  }
  return j;
}

nlohmann::json to_json(const IterModel& model, const Dataset& dataset) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : model.rules) {
    auto j = to_json(r);
    j["class"] = dataset.classes()[r.label].name;
    if (r.form != RuleForm::linear) j["attribute"] = dataset.attributes()[r.attr].name;
    rules.push_back(std::move(j));
  }
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& it : model.iterations) {
    iterations.push_back({{"iteration", it.iteration},
                          {"kind", to_string(it.kind)},
                          {"rho", it.rho},
                          {"cases_in", it.cases_in.size()},
                          {"classified", it.classified.size()},
                          {"rules", it.rule_ids}});
  }
  const double pct = 100.0 * static_cast<double>(model.residual.size()) / static_cast<double>(dataset.size());
  return {{"rules", rules},
          {"iterations", iterations},
          {"residual", model.residual},
          {"residual_percent", pct},
          {"iterations_used", model.iterations_used},
          {"converged", model.converged},
          {"warnings", model.warnings}};
}

}  // namespace coc
