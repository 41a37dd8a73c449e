#include <cmath>
#include <random>

#include "doctest.h"
#include "grv/measures.h"
#include "grv/trainer.h"
#include "oracle.h"

namespace grv {
namespace {

PairStats StatsFromDense(const std::vector<std::vector<double>>& x, int window) {
  PairStats stats;
  stats.n = x.size();
  stats.window = window;
  SparseCounts::Builder b(stats.n);
  for (WordId i = 0; i < stats.n; ++i) {
    for (WordId j = 0; j < stats.n; ++j) {
      if (x[i][j] != 0.0) b.Add(i, j, x[i][j]);
    }
  }
  stats.x = b.Build();
  stats.row_sums = stats.x.RowSums();
  for (double v : stats.row_sums) stats.total += v;
  return stats;
}

TEST_CASE("smoothed PMI basics") {
  // n = 2, no counts, alpha = 1: P(i,j) = 1/4, P(i) = P(j) = 1/2.
  const auto empty = StatsFromDense({{0, 0}, {0, 0}}, 10);
  CHECK(PmiSmoothed(empty, 0, 1, 1.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(PmiSmoothed(empty, 0, 1, 0.0), Error);

  // Independent counts: x_ij = r_i r_j  ->  PMI = 0 at alpha = 0.
  const std::vector<double> r = {3, 5, 7};
  std::vector<std::vector<double>> x(3, std::vector<double>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) x[i][j] = 1e6 * r[i] * r[j];
  const auto indep = StatsFromDense(x, 10);
  for (WordId i = 0; i < 3; ++i) {
    for (WordId j = 0; j < 3; ++j) {
      CHECK(std::abs(PmiSmoothed(indep, i, j, 0.0)) < 1e-12);
      CHECK(std::abs(PmiSmoothed(indep, i, j, 1e-5)) < 1e-9);
    }
  }
}

TEST_CASE("smoothed PMI is symmetric") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto store = oracle::RandomStore(rng, 6, 8, 12);
    const auto stats = CountPairs(store, {.window = 4});
    for (WordId i = 0; i < stats.n; ++i) {
      for (WordId j = 0; j < stats.n; ++j) {
        CHECK(PmiSmoothed(stats, i, j, 1e-3) == PmiSmoothed(stats, j, i, 1e-3));
        CHECK(std::isfinite(PmiSmoothed(stats, i, j, 1e-6)));
      }
    }
  }
}

TEST_CASE("model PMI and the translation identity") {
  EmbeddingModel model(3, 2);
  model.target << 0, 0, 1, 2, -1, 0.5;
  model.context << 0.5, 1, 2, -1, 0.25, 0.75;
  model.context_bias << 0.1, -0.2, 0.3;
  CHECK(PmiModel(model, 0, 1) == doctest::Approx(-0.2));
  for (WordId i = 0; i < 3; ++i) {
    for (WordId k = 0; k < 3; ++k) {
      for (WordId j = 0; j < 3; ++j) {
        const double lhs =
            (model.target.row(i) - model.target.row(k)).dot(model.context.row(j));
        CHECK(lhs == doctest::Approx(PmiModel(model, i, j) - PmiModel(model, k, j))
                         .epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(PmiModel(model, 3, 0), Error);
}

TEST_CASE("SI values against hand-computed probabilities") {
  // Single sentence [a, b, c], alpha = 1e-5, n = 3, between slot.
  const SentenceStore store{3, {{0, 1, 2}}};
  const auto stats = CountTripleMarginals(store, {.window = 10});
  const auto& m = stats.slot(Slot::kBetween);
  const double a = 1e-5;
  // All counts for (a, b, c) are 1 and the total is 1.
  const double p3 = (1 + a) / (1 + 27 * a);
  const double p2 = (1 + a) / (1 + 9 * a);
  const double p1 = (1 + a) / (1 + 3 * a);
  const double pc = (1 + a) / (1 + 9 * a);  // conditional on j: y_*j* = 1
  const double pc1 = (1 + a) / (1 + 3 * a);
  CHECK(Si(1, m, 3, 1.0, 0, 1, 2, a) ==
        doctest::Approx(std::log(p2 * p2 * p2 / (p1 * p1 * p1 * p3))).epsilon(1e-12));
  CHECK(Si(2, m, 3, 1.0, 0, 1, 2, a) ==
        doctest::Approx(std::log(p3 / (p1 * p1 * p1))).epsilon(1e-12));
  CHECK(Si(3, m, 3, 1.0, 0, 1, 2, a) ==
        doctest::Approx(std::log(p3 / (p2 * p1))).epsilon(1e-12));
  CHECK(Si(4, m, 3, 1.0, 0, 1, 2, a) ==
        doctest::Approx(std::log(pc / (pc1 * pc1))).epsilon(1e-12));

  // Unobserved triple (c, a, b): smoothing only.
  const double q3 = a / (1 + 27 * a);
  const double qi = a / (1 + 3 * a);  // y_c** = 0
  const double qj = a / (1 + 3 * a);  // y_*a* = 0
  const double qk = a / (1 + 3 * a);  // y_**b = 0
  CHECK(Si(2, m, 3, 0.0, 2, 0, 1, a) ==
        doctest::Approx(std::log(q3 / (qi * qj * qk))).epsilon(1e-12));
  CHECK_THROWS_AS(Si(2, m, 3, 0.0, 2, 0, 1, 0.0), Error);
  CHECK_THROWS_AS(Si(5, m, 3, 1.0, 0, 1, 2, a), Error);
}

struct IdentityResidual {
  double first = 0.0;
  double second = 0.0;
  int triples = 0;
};

IdentityResidual MaxIdentityResidual(const SentenceStore& store, int window,
                                     double alpha, bool require_positive) {
  const auto stats = CountTripleMarginals(store, {.window = window});
  const auto index = InvertedIndex::Build(store);
  IdentityResidual out;
  const std::size_t n = store.vocab_size;
  for (Slot slot : kAllSlots) {
    const auto& m = stats.slot(slot);
    for (WordId i = 0; i < n; ++i) {
      for (WordId k = 0; k < n; ++k) {
        if (i == k) continue;
        const auto slice = ExtractTripleSlice(store, index, i, k, slot, window);
        for (const auto& [j, y] : slice.counts) {
          if (require_positive &&
              (m.ij.Get(i, j) <= 0 || m.jk.Get(j, k) <= 0 || m.ik.Get(i, k) <= 0)) {
            continue;
          }
          const double pij = TriplePmiFirstContext(m, n, i, j, alpha);
          const double pjk = TriplePmiContextSecond(m, n, j, k, alpha);
          const double si1 = Si(1, m, n, y, i, j, k, alpha);
          const double si2 = Si(2, m, n, y, i, j, k, alpha);
          const double si3 = Si(3, m, n, y, i, j, k, alpha);
          const double si4 = Si(4, m, n, y, i, j, k, alpha);
          out.first = std::max(out.first, std::abs(pij + pjk - si1 - si3));
          out.second = std::max(out.second, std::abs(si2 - pij - pjk - si4));
          ++out.triples;
        }
      }
    }
  }
  return out;
}

TEST_CASE("SI identities hold exactly at alpha = 0") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto store = oracle::RandomStore(rng, 6, 8, 12);
    const auto r = MaxIdentityResidual(store, 5, 0.0, true);
    CHECK(r.first <= 1e-9);
    CHECK(r.second <= 1e-9);
  }
}

TEST_CASE("SI identity residual shrinks with alpha") {
  std::mt19937_64 rng(23);
  const auto store = oracle::RandomStore(rng, 6, 8, 12);
  double previous = 1e300;
  for (double alpha : {1e-3, 1e-4, 1e-5}) {
    const auto r = MaxIdentityResidual(store, 5, alpha, true);
    const double total = r.first + r.second;
    CHECK(total < previous);
    previous = total;
  }
}

TEST_CASE("SI values are finite for alpha > 0") {
  std::mt19937_64 rng(29);
  const auto store = oracle::RandomStore(rng, 5, 6, 10);
  const auto stats = CountTripleMarginals(store, {.window = 3});
  for (Slot slot : kAllSlots) {
    for (WordId i = 0; i < 6 && i < store.vocab_size; ++i)
      for (WordId j = 0; j < store.vocab_size; ++j)
        for (WordId k = 0; k < store.vocab_size; ++k)
          for (int measure = 1; measure <= 4; ++measure)
            CHECK(std::isfinite(
                Si(measure, stats.slot(slot), store.vocab_size, 0.0, i, j, k, 1e-6)));
  }
}

TEST_CASE("smoothed triple probabilities are normalized") {
  std::mt19937_64 rng(31);
  for (double alpha : {1e-3, 1e-5, 1.0}) {
    const auto store = oracle::RandomStore(rng, 5, 7, 10);
    const auto stats = CountTripleMarginals(store, {.window = 4});
    const auto index = InvertedIndex::Build(store);
    for (Slot slot : kAllSlots) {
      CHECK(std::abs(NormalizationCheck(store, index, stats, slot, alpha) - 1.0) <=
            1e-9);
    }
  }
  const SentenceStore empty{4, {}};
  const auto es = CountTripleMarginals(empty, {.window = 4});
  CHECK(std::abs(NormalizationCheck(empty, InvertedIndex::Build(empty), es,
                                    Slot::kBetween, 1e-3) -
                 1.0) <= 1e-9);
  SentenceStore big{13, {{0, 1}}};
  CHECK_THROWS_AS(NormalizationCheck(big, InvertedIndex::Build(big),
                                     CountTripleMarginals(big, {}), Slot::kBetween,
                                     1e-3),
                  Error);
}

}  // namespace
}  // namespace grv
