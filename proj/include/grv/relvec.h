#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "grv/common.h"
#include "grv/cooccur.h"
#include "grv/corpus.h"
#include "grv/trainer.h"

namespace grv {

struct RelvecConfig {
  int measure = 2;       // SI variant 1..4
  double alpha = 1e-5;   // smoothing for the triple probabilities
  double lambda = 1e-6;  // ridge term of every relation fit
  int window = 10;
  bool weighted = true;  // must match the triple statistics
  bool between_only = false;
  std::uint64_t seed = 1;
};

// Contexts of one ordered pair and slot: every j with y_ijk > 0 plus
// min(2 * #positives, #zeros) sampled zero-count contexts from the whole
// vocabulary. Sorted by id; targets[t] = SI(i, contexts[t], k).
struct RelationContextSet {
  WordId i = 0;
  WordId k = 0;
  Slot slot = Slot::kBetween;
  std::vector<WordId> contexts;
  std::vector<double> targets;
  std::size_t positives = 0;
};

RelationContextSet BuildRelationContextSet(const TripleSlice& slice,
                                           const TripleStats& stats,
                                           const RelvecConfig& config);

struct RelationFit {
  Eigen::VectorXd vector;
  bool empty = false;  // no contexts: the vector is all zeros
};

// argmin_r sum_j (r . c_j + b_j - target_j)^2 + lambda ||r||^2.
RelationFit FitRelationVector(const EmbeddingModel& model,
                              const RelationContextSet& set, double lambda);

// Read-only inputs shared by every pair.
struct RelationInputs {
  const EmbeddingModel& model;
  const SentenceStore& store;
  const InvertedIndex& index;
  const TripleStats& stats;
};

// Blocks r_ik, r_ki, s_ik, s_ki, t_ik, t_ki, w_i, w_k (r = between,
// s = before, t = after; "ki" blocks come from sentences with k first).
// Between-only keeps r_ik, r_ki, w_i, w_k.
struct RelationRepresentation {
  WordId i = 0;
  WordId k = 0;
  int measure = 0;
  Eigen::VectorXd values;
  std::vector<bool> empty_blocks;  // one flag per fitted block
};

RelationRepresentation ComputeRelationRepresentation(
    const RelationInputs& inputs, WordId i, WordId k,
    const RelvecConfig& config);

// Representations for many pairs in input order. Each pair is seeded on its
// own, so the output does not depend on `threads`.
std::vector<RelationRepresentation> ComputeRelationRepresentations(
    const RelationInputs& inputs, std::span<const std::pair<WordId, WordId>> pairs,
    const RelvecConfig& config, int threads = 1);

Eigen::VectorXd BaselineDiff(const EmbeddingModel& model, WordId i, WordId k);
Eigen::VectorXd BaselineConc(const EmbeddingModel& model, WordId i, WordId k);

// Same block layout as the relation representation with each fitted vector
// replaced by the average target vector of the slot's context words: first
// within each sentence, then across sentences.
Eigen::VectorXd BaselineAvg(const EmbeddingModel& model,
                            const SentenceStore& store,
                            const InvertedIndex& index, WordId i, WordId k,
                            int window, bool between_only = false);

// "word_i<TAB>word_k<TAB>measure<TAB>v1 ... vD", after a comment header.
void WriteRelationVectors(std::ostream& os,
                          std::span<const RelationRepresentation> reps,
                          const Vocabulary& vocab, std::string_view header = {});

struct RelationVectorRow {
  std::string word_i;
  std::string word_k;
  int measure = 0;
  std::vector<double> values;
};
std::vector<RelationVectorRow> ReadRelationVectors(std::istream& is);

}  // namespace grv
