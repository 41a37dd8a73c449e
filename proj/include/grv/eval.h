#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "grv/common.h"
#include "grv/corpus.h"
#include "grv/random.h"
#include "grv/ridge.h"

namespace grv {

using WordPair = std::pair<WordId, WordId>;

struct Relation {
  std::string name;
  std::vector<WordPair> pairs;
  // Gold prototypicality scores, parallel to `pairs`; empty for induction
  // data.
  std::vector<double> scores;
};

struct Dataset {
  std::vector<Relation> relations;
  std::size_t skipped_oov = 0;        // pairs with a word outside the vocabulary
  std::size_t skipped_duplicate = 0;  // repeated pairs within a relation
  std::size_t skipped_malformed = 0;  // lines that are not a pair
};

// ": name" starts a relation; other lines hold one pair ("s t") or an
// analogy question ("a b c d", read as the pairs (a, b) and (c, d)).
Dataset ParseAnalogyDataset(std::istream& is, const Vocabulary& vocab);

// "relation<TAB>source<TAB>target[<TAB>score]". Relations keep first-seen
// order. For ranked data a missing score falls back to list order, most
// prototypical first.
Dataset ParseTsvDataset(std::istream& is, const Vocabulary& vocab);

// ---- relation induction ----

struct LabeledPair {
  WordPair pair;
  int label = 0;  // +1 or -1
};

struct NegativeSet {
  std::vector<WordPair> pairs;
  // Set when fewer than two positives made tail swapping impossible.
  bool flagged = false;
};

// Per positive (s, t): (t, s); (s, t1) and (s, t2) with t1, t2 tails of
// other positives in `positives`, never t or s; one random pair of distinct
// vocabulary words that is not in `positives`.
NegativeSet GenerateNegatives(std::span<const WordPair> positives,
                              std::size_t vocab_size, Rng& rng);

// Balanced partition of 0..count-1 into k shuffled folds, or count
// singleton folds when count < 10. Needs count >= 2.
std::vector<std::vector<std::size_t>> KFoldSplit(std::size_t count, int k,
                                                 std::uint64_t seed);

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  bool converged = true;

  double Score(const Eigen::VectorXd& x) const { return weights.dot(x) + bias; }
  int Predict(const Eigen::VectorXd& x) const { return Score(x) > 0.0 ? 1 : -1; }
};

struct SvmConfig {
  double tolerance = 1e-4;  // relative duality gap
  int max_epochs = 20000;
  std::uint64_t seed = 1;
};

// min 1/2 (||w||^2 + b^2) + C sum_i max(0, 1 - y_i (w . x_i + b)) by dual
// coordinate descent; the bias is an extra constant feature. Rows of `x`
// are examples, labels are +1 / -1. Both classes must be present.
LinearModel TrainLinearSvm(const RowMatrix& x, std::span<const int> labels,
                           double c, const SvmConfig& config = {});

inline constexpr double kSvmCGrid[] = {0.01, 0.1, 1.0, 10.0, 100.0};

// Picks C by accuracy on a stratified 25% hold-out of the rows, then
// retrains on all rows. `chosen_c` reports the pick.
LinearModel TrainTunedSvm(const RowMatrix& x, std::span<const int> labels,
                          const SvmConfig& config, double* chosen_c = nullptr);

using Featurizer = std::function<Eigen::VectorXd(WordId, WordId)>;

struct InductionFold {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> test;
  bool flagged = false;  // a split had fewer than two positives
};

// Cross-validation folds for one relation with negatives generated inside
// each split.
std::vector<InductionFold> BuildInductionFolds(const Relation& relation,
                                               std::size_t vocab_size,
                                               std::uint64_t seed);

struct BinaryMetrics {
  std::string relation;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t examples = 0;
  bool flagged = false;
  std::string error;  // non-empty when the relation could not be evaluated
};

struct InductionConfig {
  std::uint64_t seed = 1;
  int threads = 1;
  // Random negatives are drawn from ids below this; 0 means one past the
  // largest id in the dataset.
  std::size_t vocab_size = 0;
  SvmConfig svm;
};

struct InductionResult {
  std::vector<BinaryMetrics> relations;  // dataset order
  BinaryMetrics macro;                   // mean over evaluated relations
};

// Featurizer calls may come from several threads at once when
// config.threads > 1.
InductionResult EvaluateInduction(const Dataset& dataset,
                                  const Featurizer& featurizer,
                                  const InductionConfig& config);

// ---- prototypicality ranking ----

// Rank averages (1-based) with ties sharing their mean rank.
std::vector<double> AverageRanks(std::span<const double> values);

// Pearson correlation of the average ranks.
double Spearman(std::span<const double> predicted, std::span<const double> gold);

struct RankSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> tune;
  std::vector<std::size_t> test;
};

// 60/20/20 by count; tune and test get floor(count / 5) each.
RankSplit SplitForRanking(std::size_t count, std::uint64_t seed);

inline constexpr double kRidgeLambdaGrid[] = {1e-4, 1e-3, 1e-2, 0.1,
                                              1.0,  10.0, 100.0};

// Ridge regression with an unpenalized intercept.
LinearModel TrainRankRegressor(const RowMatrix& x, std::span<const double> scores,
                               double lambda);

struct RankingConfig {
  std::uint64_t seed = 1;
  int threads = 1;
};

struct RankingMetrics {
  std::string relation;
  double spearman = 0.0;
  double lambda = 0.0;
  std::string error;
};

struct RankingResult {
  std::vector<RankingMetrics> relations;
  double mean_spearman = 0.0;  // over evaluated relations
};

RankingResult EvaluateRanking(const Dataset& dataset,
                              const Featurizer& featurizer,
                              const RankingConfig& config);

// "relation acc prec rec f1" rows then "macro"; relations that failed are
// written with "nan" metrics.
void WriteInductionTsv(std::ostream& os, const InductionResult& result,
                       std::string_view header = {});
void WriteRankingTsv(std::ostream& os, const RankingResult& result,
                     std::string_view header = {});

}  // namespace grv
