#include "grv/measures.h"

#include <cmath>
#include <string>

#include "grv/trainer.h"

namespace grv {
namespace {

double Smoothed(double count, double alpha, double total, double mass) {
  if (alpha == 0.0 && count <= 0.0) {
    throw Error("E_UNDEFINED",
                "zero count with alpha=0 makes the log-ratio undefined");
  }
  return (count + alpha) / (total + mass * alpha);
}

void CheckAlpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error("E_CONFIG", "smoothing alpha must be finite and >= 0");
  }
}

}  // namespace

void ValidateMeasure(int measure) {
  if (measure < 1 || measure > 4) {
    throw Error("E_CONFIG",
                "SI measure must be 1..4, got " + std::to_string(measure));
  }
}

double PmiSmoothed(const PairStats& stats, WordId i, WordId j, double alpha) {
  CheckAlpha(alpha);
  if (i >= stats.n || j >= stats.n) {
    throw Error("E_RANGE", "word id outside pair statistics");
  }
  const double n = static_cast<double>(stats.n);
  const double joint = Smoothed(stats.x.Get(i, j), alpha, stats.total, n * n);
  const double pi = Smoothed(stats.row_sums[i], alpha, stats.total, n);
  const double pj = Smoothed(stats.row_sums[j], alpha, stats.total, n);
  return std::log(joint) - (std::log(pi) + std::log(pj));
}

double PmiModel(const EmbeddingModel& model, WordId i, WordId j) {
  if (i >= model.vocab_size() || j >= model.vocab_size()) {
    throw Error("E_RANGE", "word id outside model");
  }
  return model.target.row(i).dot(model.context.row(j)) + model.context_bias[j];
}

TripleProbabilities SmoothedTripleProbabilities(const SlotMarginals& m,
                                                std::size_t n, double y_ijk,
                                                WordId i, WordId j, WordId k,
                                                double alpha) {
  CheckAlpha(alpha);
  if (i >= n || j >= n || k >= n) {
    throw Error("E_RANGE", "word id outside triple statistics");
  }
  const double nn = static_cast<double>(n);
  const double total = m.total;
  TripleProbabilities p;
  p.ijk = Smoothed(y_ijk, alpha, total, nn * nn * nn);
  p.ij = Smoothed(m.ij.Get(i, j), alpha, total, nn * nn);
  p.ik = Smoothed(m.ik.Get(i, k), alpha, total, nn * nn);
  p.jk = Smoothed(m.jk.Get(j, k), alpha, total, nn * nn);
  p.i = Smoothed(m.i[i], alpha, total, nn);
  p.j = Smoothed(m.j[j], alpha, total, nn);
  p.k = Smoothed(m.k[k], alpha, total, nn);
  const double context_total = m.j[j];
  p.ik_given_j = Smoothed(y_ijk, alpha, context_total, nn * nn);
  p.i_given_j = Smoothed(m.ij.Get(i, j), alpha, context_total, nn);
  p.k_given_j = Smoothed(m.jk.Get(j, k), alpha, context_total, nn);
  return p;
}

double Si(int measure, const SlotMarginals& m, std::size_t n, double y_ijk,
          WordId i, WordId j, WordId k, double alpha) {
  ValidateMeasure(measure);
  const auto p = SmoothedTripleProbabilities(m, n, y_ijk, i, j, k, alpha);
  using std::log;
  switch (measure) {
    case 1:
      return log(p.ij) + log(p.ik) + log(p.jk) - log(p.i) - log(p.j) -
             log(p.k) - log(p.ijk);
    case 2:
      return log(p.ijk) - log(p.i) - log(p.j) - log(p.k);
    case 3:
      return log(p.ijk) - log(p.ik) - log(p.j);
    default:
      return log(p.ik_given_j) - log(p.i_given_j) - log(p.k_given_j);
  }
}

double TriplePmiFirstContext(const SlotMarginals& m, std::size_t n, WordId i,
                             WordId j, double alpha) {
  CheckAlpha(alpha);
  const double nn = static_cast<double>(n);
  return std::log(Smoothed(m.ij.Get(i, j), alpha, m.total, nn * nn)) -
         std::log(Smoothed(m.i[i], alpha, m.total, nn)) -
         std::log(Smoothed(m.j[j], alpha, m.total, nn));
}

double TriplePmiContextSecond(const SlotMarginals& m, std::size_t n, WordId j,
                              WordId k, double alpha) {
  CheckAlpha(alpha);
  const double nn = static_cast<double>(n);
  return std::log(Smoothed(m.jk.Get(j, k), alpha, m.total, nn * nn)) -
         std::log(Smoothed(m.j[j], alpha, m.total, nn)) -
         std::log(Smoothed(m.k[k], alpha, m.total, nn));
}

double NormalizationCheck(const SentenceStore& store,
                          const InvertedIndex& index, const TripleStats& stats,
                          Slot slot, double alpha, std::size_t cap) {
  CheckAlpha(alpha);
  if (stats.n > cap) {
    throw Error("E_LIMIT", "normalization check refused: n=" +
                               std::to_string(stats.n) + " exceeds cap " +
                               std::to_string(cap));
  }
  const double nn = static_cast<double>(stats.n);
  const double denominator = stats.slot(slot).total + nn * nn * nn * alpha;
  if (denominator <= 0.0) {
    throw Error("E_UNDEFINED", "no triple mass and alpha=0");
  }
  double sum = 0.0;
  for (WordId i = 0; i < stats.n; ++i) {
    for (WordId k = 0; k < stats.n; ++k) {
      if (i == k) {
        sum += nn * alpha / denominator;
        continue;
      }
      const TripleSlice slice = ExtractTripleSlice(
          store, index, i, k, slot, stats.window, stats.weighted);
      for (WordId j = 0; j < stats.n; ++j) {
        sum += (slice.Get(j) + alpha) / denominator;
      }
    }
  }
  return sum;
}

}  // namespace grv
