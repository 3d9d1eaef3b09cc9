#include "coc/knn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "coc/error.hpp"
#include "coc/random.hpp"

namespace coc {

double euclidean(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<LabeledPoint> reference_points(const Dataset& dataset,
                                           std::span<const std::size_t> case_ids) {
  std::vector<LabeledPoint> out;
  out.reserve(case_ids.size());
  for (auto id : case_ids) {
    const auto& c = dataset.at(id);
    out.push_back({c.id, c.norm, c.label});
  }
  return out;
}

std::vector<LabeledPoint> reference_points(const Dataset& dataset) {
  std::vector<std::size_t> ids(dataset.size());
  std::iota(ids.begin(), ids.end(), 0);
  return reference_points(dataset, ids);
}

KnnModel::KnnModel(std::size_t k, std::vector<LabeledPoint> references, Metric metric)
    : k_(k), references_(std::move(references)), metric_(std::move(metric)) {
  if (k_ == 0) throw DataError("k must be >= 1");
  if (k_ > references_.size()) {
    throw DataError(fmt::format("k = {} exceeds the {} reference cases", k_, references_.size()));
  }
  dimension_ = references_.front().values.size();
}

std::vector<std::size_t> KnnModel::ranked(std::span<const double> query,
                                          std::optional<std::size_t> exclude) const {
  if (query.size() != dimension_) {
    throw DataError(fmt::format("query has {} values, references have {}", query.size(), dimension_));
  }
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(references_.size());
  for (const auto& r : references_) {
    if (exclude && r.id == *exclude) continue;
    scored.emplace_back(metric_(query, r.values), r.id);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::size_t> ids;
  ids.reserve(scored.size());
  for (const auto& [_, id] : scored) ids.push_back(id);
  return ids;
}

ClassIndex vote(std::span<const std::size_t> ranked_ids, std::size_t k,
                const std::function<ClassIndex(std::size_t)>& label_of) {
  std::map<ClassIndex, std::size_t> counts;
  const std::size_t take = std::min(k, ranked_ids.size());
  for (std::size_t i = 0; i < take; ++i) ++counts[label_of(ranked_ids[i])];
  std::size_t best = 0;
  for (const auto& [_, n] : counts) best = std::max(best, n);
  for (std::size_t i = 0; i < take; ++i) {
    const ClassIndex label = label_of(ranked_ids[i]);
    if (counts[label] == best) return label;
  }
  throw DataError("vote over an empty neighbor list");
}

KnnPrediction KnnModel::classify(std::span<const double> query) const {
  auto ids = ranked(query);
  std::map<std::size_t, ClassIndex> labels;
  for (const auto& r : references_) labels[r.id] = r.label;
  KnnPrediction out;
  out.label = vote(ids, k_, [&](std::size_t id) { return labels.at(id); });
  ids.resize(k_);
  out.neighbors = std::move(ids);
  return out;
}

std::vector<std::size_t> FoldPlan::train(std::size_t fold) const {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < fold_of_case.size(); ++i) {
    if (fold_of_case[i] != fold) ids.push_back(i);
  }
  return ids;
}

std::vector<std::size_t> FoldPlan::test(std::size_t fold) const {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < fold_of_case.size(); ++i) {
    if (fold_of_case[i] == fold) ids.push_back(i);
  }
  return ids;
}

FoldPlan stratified_folds(const Dataset& dataset, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw DataError("cross-validation needs at least 2 folds");
  const auto counts = dataset.class_counts();
  const std::size_t smallest = *std::min_element(counts.begin(), counts.end());
  FoldPlan plan;
  plan.folds = folds;
  if (smallest < folds) {
    plan.folds = std::max<std::size_t>(2, smallest);
    plan.reduced = true;
  }
  if (dataset.size() < plan.folds) throw DataError("fewer cases than folds");

  Rng rng(seed);
  std::vector<std::size_t> sequence;
  for (ClassIndex label = 0; label < counts.size(); ++label) {
    std::vector<std::size_t> members;
    for (const auto& c : dataset.cases()) {
      if (c.label == label) members.push_back(c.id);
    }
    rng.shuffle(std::span<std::size_t>(members));
    sequence.insert(sequence.end(), members.begin(), members.end());
  }
  plan.fold_of_case.assign(dataset.size(), 0);
  for (std::size_t i = 0; i < sequence.size(); ++i) plan.fold_of_case[sequence[i]] = i % plan.folds;
  return plan;
}

namespace {

void summarize(CvResult& r) {
  const double n = static_cast<double>(r.fold_accuracies.size());
  r.mean = std::accumulate(r.fold_accuracies.begin(), r.fold_accuracies.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : r.fold_accuracies) ss += (a - r.mean) * (a - r.mean);
  r.stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
}

}  // namespace

CvResult cross_validate(const Dataset& dataset, const FoldPlan& plan, const FoldPredictor& predictor,
                        std::string model_id) {
  CvResult result;
  result.model_id = std::move(model_id);
  result.oof_predictions.assign(dataset.size(), 0);
  for (std::size_t f = 0; f < plan.folds; ++f) {
    const auto train = plan.train(f);
    const auto test = plan.test(f);
    const auto predicted = predictor(train, test);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      result.oof_predictions[test[i]] = predicted[i];
      if (predicted[i] == dataset.at(test[i]).label) ++correct;
    }
    result.fold_accuracies.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
  }
  summarize(result);
  return result;
}

std::vector<CvResult> knn_sweep(const Dataset& dataset, const FoldPlan& plan,
                                std::span<const std::size_t> ks, const Metric& metric) {
  std::vector<CvResult> results(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    results[j].model_id = fmt::format("knn-k{}", ks[j]);
    results[j].oof_predictions.assign(dataset.size(), 0);
  }
  const auto label_of = [&](std::size_t id) { return dataset.at(id).label; };
  for (std::size_t f = 0; f < plan.folds; ++f) {
    const auto train = plan.train(f);
    const auto test = plan.test(f);
    for (auto k : ks) {
      if (k > train.size()) throw DataError(fmt::format("k = {} exceeds fold training size {}", k, train.size()));
    }
    // One ranking per test case serves every k.
    const KnnModel model(1, reference_points(dataset, train), metric);
    std::vector<std::size_t> correct(ks.size(), 0);
    for (auto id : test) {
      const auto ranked = model.ranked(dataset.at(id).norm);
      for (std::size_t j = 0; j < ks.size(); ++j) {
        const ClassIndex predicted = vote(ranked, ks[j], label_of);
        results[j].oof_predictions[id] = predicted;
        if (predicted == dataset.at(id).label) ++correct[j];
      }
    }
    for (std::size_t j = 0; j < ks.size(); ++j) {
      results[j].fold_accuracies.push_back(static_cast<double>(correct[j]) /
                                           static_cast<double>(test.size()));
    }
  }
  for (auto& r : results) summarize(r);
  return results;
}

std::vector<int> copeland_scores(const std::vector<std::vector<ClassIndex>>& predictions,
                                 std::span<const ClassIndex> labels) {
  const std::size_t m = predictions.size();
  std::vector<int> score(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      std::size_t i_only = 0;
      std::size_t j_only = 0;
      for (std::size_t c = 0; c < labels.size(); ++c) {
        const bool ri = predictions[i][c] == labels[c];
        const bool rj = predictions[j][c] == labels[c];
        if (ri && !rj) ++i_only;
        if (rj && !ri) ++j_only;
      }
      if (i_only > j_only) {
        ++score[i];
        --score[j];
      } else if (j_only > i_only) {
        ++score[j];
        --score[i];
      }
    }
  }
  return score;
}

ClassIndex ensemble_vote(std::span<const ClassIndex> votes, std::span<const std::size_t> priority) {
  std::map<ClassIndex, std::size_t> counts;
  for (auto v : votes) ++counts[v];
  std::size_t best = 0;
  for (const auto& [_, n] : counts) best = std::max(best, n);
  std::optional<std::size_t> chosen;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (counts[votes[i]] != best) continue;
    if (!chosen || priority[i] < priority[*chosen]) chosen = i;
  }
  return votes[*chosen];
}

std::vector<GreedyStep> greedy_ensemble(
    std::span<const std::size_t> ranked,
    const std::function<double(std::span<const std::size_t>)>& evaluate) {
  if (ranked.size() < 2) throw DataError("an ensemble needs at least two candidate models");
  std::vector<GreedyStep> trace;
  std::vector<std::size_t> members{ranked[0], ranked[1]};
  trace.push_back({members, evaluate(members), true});
  for (std::size_t next = 2; next < ranked.size(); ++next) {
    auto grown = trace.back().members;
    grown.push_back(ranked[next]);
    const double accuracy = evaluate(grown);
    if (accuracy > trace.back().accuracy) {
      trace.push_back({std::move(grown), accuracy, true});
    } else {
      trace.push_back({std::move(grown), accuracy, false});
      break;
    }
  }
  return trace;
}

namespace {

// Copeland order among `members` (indices into `candidates`), ties broken by
// position in the mean-accuracy ranking.
std::vector<std::size_t> copeland_rank(const std::vector<CvResult>& candidates,
                                       std::span<const std::size_t> members,
                                       std::span<const ClassIndex> labels) {
  std::vector<std::vector<ClassIndex>> preds;
  for (auto m : members) preds.push_back(candidates[m].oof_predictions);
  const auto score = copeland_scores(preds, labels);
  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  std::vector<std::size_t> rank(members.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

}  // namespace

EnsembleModel knne_train(const Dataset& dataset, const KnneConfig& config) {
  if (config.max_k < 3) throw DataError("K must be >= 3");
  const auto plan = stratified_folds(dataset, config.folds, config.seed);
  std::size_t min_train = dataset.size();
  for (std::size_t f = 0; f < plan.folds; ++f) min_train = std::min(min_train, plan.train(f).size());

  std::vector<std::size_t> ks;
  for (std::size_t k = 1; k <= config.max_k && k <= min_train; k += 2) ks.push_back(k);

  EnsembleModel model;
  model.candidates = knn_sweep(dataset, plan, ks);

  std::vector<double> stds;
  for (const auto& c : model.candidates) stds.push_back(c.stddev);
  std::vector<double> sorted = stds;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  const double cutoff = config.instability_factor * median;

  std::vector<std::size_t> survivors;  // indices into candidates
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (stds[i] > cutoff) {
      model.excluded_ks.push_back(ks[i]);
    } else {
      survivors.push_back(i);
    }
  }
  if (survivors.size() < 2) throw DataError("fewer than two stable k-NN models survive");
  std::stable_sort(survivors.begin(), survivors.end(), [&](std::size_t a, std::size_t b) {
    return model.candidates[a].mean > model.candidates[b].mean;
  });
  for (auto s : survivors) model.ranked_ks.push_back(ks[s]);

  std::vector<ClassIndex> labels;
  for (const auto& c : dataset.cases()) labels.push_back(c.label);

  const auto evaluate = [&](std::span<const std::size_t> members) {
    std::vector<std::size_t> cand;
    for (auto m : members) cand.push_back(survivors[m]);
    const auto rank = copeland_rank(model.candidates, cand, labels);
    std::vector<double> fold_correct(plan.folds, 0.0);
    std::vector<double> fold_size(plan.folds, 0.0);
    std::vector<ClassIndex> votes(cand.size());
    for (std::size_t c = 0; c < labels.size(); ++c) {
      for (std::size_t i = 0; i < cand.size(); ++i) votes[i] = model.candidates[cand[i]].oof_predictions[c];
      const std::size_t f = plan.fold_of_case[c];
      fold_size[f] += 1.0;
      if (ensemble_vote(votes, rank) == labels[c]) fold_correct[f] += 1.0;
    }
    double sum = 0.0;
    for (std::size_t f = 0; f < plan.folds; ++f) sum += fold_correct[f] / fold_size[f];
    return sum / static_cast<double>(plan.folds);
  };

  std::vector<std::size_t> order(survivors.size());
  std::iota(order.begin(), order.end(), 0);
  model.trace = greedy_ensemble(order, evaluate);

  const GreedyStep* last = nullptr;
  for (const auto& step : model.trace) {
    if (step.accepted) last = &step;
  }
  std::vector<std::size_t> cand;
  for (auto m : last->members) {
    model.member_ks.push_back(model.ranked_ks[m]);
    cand.push_back(survivors[m]);
  }
  model.copeland_rank = copeland_rank(model.candidates, cand, labels);
  model.accuracy = last->accuracy;
  model.references = reference_points(dataset);
  return model;
}

ClassIndex EnsembleModel::predict(std::span<const double> query,
                                  std::optional<std::size_t> exclude) const {
  const KnnModel base(1, references, euclidean);
  const auto ranked = base.ranked(query, exclude);
  std::map<std::size_t, ClassIndex> labels;
  for (const auto& r : references) labels[r.id] = r.label;
  const auto label_of = [&](std::size_t id) { return labels.at(id); };
  std::vector<ClassIndex> votes;
  for (auto k : member_ks) votes.push_back(vote(ranked, k, label_of));
  return ensemble_vote(votes, copeland_rank);
}

std::vector<std::vector<std::size_t>> EnsembleModel::neighbors(
    std::span<const double> query, std::optional<std::size_t> exclude) const {
  const KnnModel base(1, references, euclidean);
  const auto ranked = base.ranked(query, exclude);
  std::vector<std::vector<std::size_t>> out;
  for (auto k : member_ks) out.emplace_back(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked.size())));
  return out;
}

nlohmann::json to_json(const CvResult& r) {
  return {{"model", r.model_id},
          {"folds", r.fold_accuracies},
          {"mean", r.mean},
          {"std", r.stddev}};
}

nlohmann::json to_json(const EnsembleModel& m) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : m.candidates) candidates.push_back(to_json(c));
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& step : m.trace) {
    std::vector<std::size_t> ks;
    for (auto i : step.members) ks.push_back(m.ranked_ks[i]);
    trace.push_back({{"members", ks}, {"accuracy", step.accuracy}, {"accepted", step.accepted}});
  }
  return {{"members", m.member_ks},
          {"copeland_rank", m.copeland_rank},
          {"candidates", candidates},
          {"excluded", m.excluded_ks},
          {"ranked", m.ranked_ks},
          {"trace", trace},
          {"accuracy", m.accuracy}};
}

}  // namespace coc
