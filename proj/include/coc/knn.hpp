#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coc/dataset.hpp"

namespace coc {

using Metric = std::function<double(std::span<const double>, std::span<const double>)>;

double euclidean(std::span<const double> a, std::span<const double> b);

struct LabeledPoint {
  std::size_t id = 0;
  std::vector<double> values;
  ClassIndex label = 0;
};

std::vector<LabeledPoint> reference_points(const Dataset& dataset,
                                           std::span<const std::size_t> case_ids);
std::vector<LabeledPoint> reference_points(const Dataset& dataset);

struct KnnPrediction {
  ClassIndex label = 0;
  std::vector<std::size_t> neighbors;  // ids, nearest first
};

// Distance ties break toward the lower id; vote ties go to the class of the
// nearest neighbor among the tied classes.
class KnnModel {
 public:
  KnnModel(std::size_t k, std::vector<LabeledPoint> references, Metric metric = euclidean);

  std::size_t k() const { return k_; }
  const std::vector<LabeledPoint>& references() const { return references_; }

  KnnPrediction classify(std::span<const double> query) const;
  // Reference ids sorted by (distance, id), optionally skipping one id.
  std::vector<std::size_t> ranked(std::span<const double> query,
                                  std::optional<std::size_t> exclude = std::nullopt) const;

 private:
  std::size_t k_;
  std::vector<LabeledPoint> references_;
  Metric metric_;
  std::size_t dimension_ = 0;
};

// Majority class among the first k entries of a ranked neighbor list.
ClassIndex vote(std::span<const std::size_t> ranked_ids, std::size_t k,
                const std::function<ClassIndex(std::size_t)>& label_of);

struct FoldPlan {
  std::vector<std::size_t> fold_of_case;
  std::size_t folds = 0;
  bool reduced = false;  // fewer folds than requested

  std::vector<std::size_t> train(std::size_t fold) const;
  std::vector<std::size_t> test(std::size_t fold) const;
};

// Stratified, deterministic per seed. Throws DataError for folds < 2.
FoldPlan stratified_folds(const Dataset& dataset, std::size_t folds, std::uint64_t seed);

struct CvResult {
  std::string model_id;
  std::vector<double> fold_accuracies;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<ClassIndex> oof_predictions;  // out-of-fold prediction per case
};

// Predicts labels for `test` given a model fit on `train`.
using FoldPredictor = std::function<std::vector<ClassIndex>(
    std::span<const std::size_t> train, std::span<const std::size_t> test)>;

CvResult cross_validate(const Dataset& dataset, const FoldPlan& plan, const FoldPredictor& predictor,
                        std::string model_id);

// k-NN for every k in `ks` over one shared fold plan (paired comparison).
std::vector<CvResult> knn_sweep(const Dataset& dataset, const FoldPlan& plan,
                                std::span<const std::size_t> ks, const Metric& metric = euclidean);

// Copeland score per member: pairwise wins minus losses, where member i beats
// j when it is right and j wrong on more cases than the reverse.
std::vector<int> copeland_scores(const std::vector<std::vector<ClassIndex>>& predictions,
                                 std::span<const ClassIndex> labels);

// Majority vote; ties go to the vote of the highest-ranked member (by
// `priority`, lower is better) among those voting for a tied class.
ClassIndex ensemble_vote(std::span<const ClassIndex> votes, std::span<const std::size_t> priority);

struct GreedyStep {
  std::vector<std::size_t> members;  // candidate indices
  double accuracy = 0.0;
  bool accepted = false;
};

// Seeds with the first two ranked candidates and adds the next while the
// evaluated accuracy strictly improves. The returned trace includes the
// first rejected step, if any.
std::vector<GreedyStep> greedy_ensemble(
    std::span<const std::size_t> ranked,
    const std::function<double(std::span<const std::size_t>)>& evaluate);

struct KnneConfig {
  std::size_t max_k = 21;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  double instability_factor = 2.0;  // drop std > factor * median std
};

struct EnsembleModel {
  std::vector<std::size_t> member_ks;       // in selection order
  std::vector<std::size_t> copeland_rank;   // per member, 0 = strongest
  std::vector<CvResult> candidates;         // one per k, in k order
  std::vector<std::size_t> excluded_ks;     // unstable
  std::vector<std::size_t> ranked_ks;       // surviving ks by mean accuracy
  std::vector<GreedyStep> trace;            // members as indices into ranked_ks
  double accuracy = 0.0;                    // final ensemble CV accuracy
  std::vector<LabeledPoint> references;

  ClassIndex predict(std::span<const double> query,
                     std::optional<std::size_t> exclude = std::nullopt) const;
  // Neighbor ids per member k, nearest first.
  std::vector<std::vector<std::size_t>> neighbors(
      std::span<const double> query, std::optional<std::size_t> exclude = std::nullopt) const;
};

EnsembleModel knne_train(const Dataset& dataset, const KnneConfig& config);

nlohmann::json to_json(const CvResult& r);
nlohmann::json to_json(const EnsembleModel& m);

}  // namespace coc
