#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "grv/common.h"
#include "grv/cooccur.h"
#include "grv/ridge.h"

namespace grv {

struct TrainerConfig {
  int dim = 300;
  int window = 10;  // recorded in the model header only
  double alpha = 1e-5;
  int epochs = 50;
  std::uint64_t seed = 1;
  double learning_rate = 0.05;
  // Warm-up weighting (x / x_max)^exponent, capped at 1; sampled negatives
  // (x = 0) get negative_weight.
  double x_max = 100.0;
  double exponent = 0.75;
  double negative_weight = 0.05;
  // Residual variances are re-estimated after every `variance_interval`
  // epochs; before the first estimate the warm-up weighting applies.
  int variance_interval = 5;
  double variance_floor = 1e-8;
  // 1 = deterministic single worker. >1 = lock-free sharded updates.
  int threads = 1;
};

// Target vectors w_i, context vectors c_j, context biases b_j and residual
// variances sigma2_j. There is no target bias.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(std::size_t n, int dim);

  std::size_t vocab_size() const { return static_cast<std::size_t>(target.rows()); }
  int dim() const { return static_cast<int>(target.cols()); }

  RowMatrix target;
  RowMatrix context;
  Eigen::VectorXd context_bias;
  Eigen::VectorXd sigma2;
  TrainerConfig config;

  // Plain-text: header (n, d, W, alpha, epochs, seed), then sections of
  // "word v1 .. vd" for target and context vectors, then biases and sigma2.
  // Decimals carry 17 significant digits and reload bit-exactly.
  void Save(std::ostream& os, const std::vector<std::string>& words,
            std::string_view header = {}) const;
  static EmbeddingModel Load(std::istream& is,
                             std::vector<std::string>* words = nullptr);
};

// Per-target context sets J_i: every j with x_ij > 0 plus
// min(2 * #positives, #zeros) contexts drawn uniformly without replacement
// from the zero-count columns. Sorted ascending.
struct ContextSets {
  std::vector<std::vector<WordId>> sets;
};

ContextSets BuildContextSets(const PairStats& stats, std::uint64_t seed);

double GloveWeight(double x, double x_max = 100.0, double exponent = 0.75,
                   double zero_weight = 0.05);

// One regression term of the embedding objective.
struct TrainingPair {
  WordId target;
  WordId context;
  double pmi;    // regression target
  double count;  // x_ij, drives the warm-up weighting
};

struct TrainingProblem {
  std::size_t n = 0;
  std::vector<TrainingPair> pairs;
};

// Pairs (i, j) for j in J_i with PMI_S targets.
TrainingProblem BuildTrainingProblem(const PairStats& stats,
                                     const ContextSets& contexts,
                                     double alpha);

// sigma2_j = mean squared residual over the pairs with context j, floored.
// Contexts with no pairs get the global mean squared residual.
Eigen::VectorXd EstimateResidualVariances(const EmbeddingModel& model,
                                          const TrainingProblem& problem,
                                          double floor = 1e-8);

// sum over pairs of (1 / sigma2_j) * residual^2.
double Objective(const EmbeddingModel& model, const TrainingProblem& problem,
                 const Eigen::VectorXd& sigma2);

struct TrainingLog {
  // Objective after each epoch, evaluated with the weights used in that
  // epoch (warm-up weights, then 1 / sigma2) rescaled to mean 1.
  std::vector<double> epoch_objective;
};

// Weighted least squares by AdaGrad over shuffled pairs. Throws
// E_DIVERGED naming the epoch and pair when a parameter becomes non-finite.
EmbeddingModel Train(const TrainingProblem& problem,
                     const TrainerConfig& config, TrainingLog* log = nullptr);
EmbeddingModel Train(const PairStats& stats, const ContextSets& contexts,
                     const TrainerConfig& config, TrainingLog* log = nullptr);

// Vector for a new target fitted against the fixed context vectors:
//   argmin_w sum_j (w . c_j + b_j - row_j)^2 + lambda ||w||^2.
Eigen::VectorXd FoldIn(const EmbeddingModel& model,
                       const std::map<WordId, double>& pmi_row,
                       double lambda = 1e-6);

}  // namespace grv
