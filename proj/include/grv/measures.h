#pragma once

#include <cstddef>

#include "grv/common.h"
#include "grv/cooccur.h"
#include "grv/corpus.h"

namespace grv {

class EmbeddingModel;

// Additive smoothing of co-occurrence estimates.
struct SmoothingConfig {
  double alpha = 1e-5;
  std::size_t n = 0;
};

inline constexpr double kAlphaGrid[] = {0.1, 0.01, 0.001, 1e-4, 1e-5, 1e-6};

// PMI_S(i,j) from smoothed pair probabilities
//   P(i,j) = (x_ij + a) / (x_** + n^2 a),  P(i) = (x_i* + a) / (x_** + n a).
// alpha == 0 with any zero count throws E_UNDEFINED.
double PmiSmoothed(const PairStats& stats, WordId i, WordId j, double alpha);

// w_i . c_j + b_j
double PmiModel(const EmbeddingModel& model, WordId i, WordId j);

// Smoothed probabilities over ordered triples of one slot. The conditional
// terms are smoothed within the event space of triples whose context is j.
struct TripleProbabilities {
  double ijk = 0.0;
  double ij = 0.0;
  double ik = 0.0;
  double jk = 0.0;
  double i = 0.0;
  double j = 0.0;
  double k = 0.0;
  double ik_given_j = 0.0;
  double i_given_j = 0.0;
  double k_given_j = 0.0;
};

TripleProbabilities SmoothedTripleProbabilities(const SlotMarginals& m,
                                                std::size_t n, double y_ijk,
                                                WordId i, WordId j, WordId k,
                                                double alpha);

// SI^1..SI^4 for the ordered triple (i, j, k), natural log:
//   SI1 = log P(i,j)P(i,k)P(j,k) / (P(i)P(j)P(k)P(i,j,k))
//   SI2 = log P(i,j,k) / (P(i)P(j)P(k))
//   SI3 = log P(i,j,k) / (P(i,k)P(j))
//   SI4 = log P(i,k|j) / (P(i|j)P(k|j))
// `y_ijk` comes from the matching TripleSlice.
double Si(int measure, const SlotMarginals& m, std::size_t n, double y_ijk,
          WordId i, WordId j, WordId k, double alpha);

// PMI over triple marginals (not the pair-count PMI used for embeddings):
// first/context pair uses P(i,j), P(i), P(j); context/second pair uses
// P(j,k), P(j), P(k).
double TriplePmiFirstContext(const SlotMarginals& m, std::size_t n, WordId i,
                             WordId j, double alpha);
double TriplePmiContextSecond(const SlotMarginals& m, std::size_t n, WordId j,
                              WordId k, double alpha);

// Sum of the smoothed P(i,j,k) over all n^3 ordered triples of one slot,
// with y_ijk retrieved through triple slices. Refuses n > cap.
double NormalizationCheck(const SentenceStore& store,
                          const InvertedIndex& index, const TripleStats& stats,
                          Slot slot, double alpha, std::size_t cap = 12);

void ValidateMeasure(int measure);

}  // namespace grv
