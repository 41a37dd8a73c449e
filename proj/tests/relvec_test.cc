#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "grv/measures.h"
#include "grv/relvec.h"
#include "oracle.h"
#include "planted.h"

namespace grv {
namespace {

struct Fixture {
  SentenceStore store;
  InvertedIndex index;
  TripleStats stats;
  EmbeddingModel model;

  Fixture(SentenceStore s, int d, std::uint64_t seed, int window = 10,
          bool weighted = true)
      : store(std::move(s)),
        index(InvertedIndex::Build(store)),
        stats(CountTripleMarginals(store, {.window = window, .weighted = weighted})) {
    std::mt19937_64 rng(seed);
    model = planted::RandomModel(rng, store.vocab_size, d);
  }

  RelationInputs inputs() const { return {model, store, index, stats}; }
};

TEST_CASE("relation context sets") {
  // Four positives among 1000 words -> 8 negatives.
  SentenceStore store{1000, {{0, 5, 6, 7, 8, 1}}};
  const auto stats = CountTripleMarginals(store, {});
  const auto index = InvertedIndex::Build(store);
  const auto slice = ExtractTripleSlice(store, index, 0, 1, Slot::kBetween, 10);
  REQUIRE(slice.counts.size() == 4);
  RelvecConfig config;
  const auto set = BuildRelationContextSet(slice, stats, config);
  CHECK(set.positives == 4);
  CHECK(set.contexts.size() == 12);
  CHECK(set.targets.size() == 12);
  CHECK(std::is_sorted(set.contexts.begin(), set.contexts.end()));
  CHECK(std::adjacent_find(set.contexts.begin(), set.contexts.end()) ==
        set.contexts.end());
  for (WordId j : {5u, 6u, 7u, 8u}) {
    CHECK(std::binary_search(set.contexts.begin(), set.contexts.end(), j));
  }
  for (std::size_t t = 0; t < set.contexts.size(); ++t) {
    const WordId j = set.contexts[t];
    CHECK(set.targets[t] == Si(2, stats.slot(Slot::kBetween), 1000,
                               slice.Get(j), 0, j, 1, config.alpha));
  }
  const auto again = BuildRelationContextSet(slice, stats, config);
  CHECK(again.contexts == set.contexts);
  config.seed = 2;
  CHECK(BuildRelationContextSet(slice, stats, config).contexts != set.contexts);

  // Reversed order never occurs.
  const auto empty = ExtractTripleSlice(store, index, 1, 0, Slot::kBetween, 10);
  const auto none = BuildRelationContextSet(empty, stats, {});
  CHECK(none.contexts.empty());
  CHECK(none.positives == 0);
}

TEST_CASE("relation fits match a ridge oracle") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 20);
    const std::size_t n = 30 + rng() % 100;
    const auto model = planted::RandomModel(rng, n, d);
    RelationContextSet set;
    const std::size_t size = 1 + rng() % std::min<std::size_t>(100, n);
    std::vector<WordId> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    set.contexts.assign(all.begin(), all.begin() + size);
    std::sort(set.contexts.begin(), set.contexts.end());
    for (std::size_t t = 0; t < size; ++t) set.targets.push_back(3 * u(rng));
    const double lambda = trial % 3 == 0 ? 1e-6 : std::pow(10.0, -3 + trial % 5);

    const auto fit = FitRelationVector(model, set, lambda);
    CHECK_FALSE(fit.empty);
    Eigen::MatrixXd A(size, d);
    Eigen::VectorXd y(size);
    for (std::size_t t = 0; t < size; ++t) {
      A.row(t) = model.context.row(set.contexts[t]);
      y[t] = set.targets[t] - model.context_bias[set.contexts[t]];
    }
    const auto expect = oracle::RidgeByAugmentedQr(A, y, lambda);
    CHECK((fit.vector - expect).norm() <= 1e-6 * std::max(1.0, expect.norm()));
    const Eigen::VectorXd grad = A.transpose() * (A * fit.vector - y) + lambda * fit.vector;
    CHECK(grad.norm() <= 1e-8 * std::max(1.0, y.norm()));
  }
}

TEST_CASE("relation fits recover planted vectors and shrink with lambda") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto model = planted::RandomModel(rng, 50, 6);
  Eigen::VectorXd v(6);
  for (int a = 0; a < 6; ++a) v[a] = u(rng);
  RelationContextSet set;
  for (WordId j = 0; j < 50; j += 2) {
    set.contexts.push_back(j);
    set.targets.push_back(v.dot(model.context.row(j)) + model.context_bias[j]);
  }
  CHECK((FitRelationVector(model, set, 1e-9).vector - v).norm() <= 1e-6);

  // Fewer contexts than dimensions.
  RelationContextSet small;
  small.contexts = {3, 7};
  small.targets = {1.5, -0.5};
  double previous = 1e300;
  for (double lambda : {1e-6, 1e-3, 1e-1, 1.0, 10.0}) {
    const double norm = FitRelationVector(model, small, lambda).vector.norm();
    CHECK(norm < previous);
    previous = norm;
  }
  CHECK_THROWS_AS(FitRelationVector(model, small, 0.0), Error);

  const auto empty = FitRelationVector(model, {}, 1e-6);
  CHECK(empty.empty);
  CHECK(empty.vector.size() == 6);
  CHECK(empty.vector.isZero());
}

TEST_CASE("relation representation layout") {
  // a=0 b=1 c=2 x=3 y=4
  Fixture fx(SentenceStore{5, {{0, 1, 2}, {3, 4}}}, 3, 1);
  const auto in = fx.inputs();
  RelvecConfig config;

  const auto rep = ComputeRelationRepresentation(in, 0, 2, config);
  REQUIRE(rep.values.size() == 8 * 3);
  CHECK(rep.measure == 2);
  CHECK(rep.empty_blocks ==
        std::vector<bool>{false, true, true, true, true, true});
  CHECK_FALSE(rep.values.segment(0, 3).isZero());
  CHECK(rep.values.segment(3, 15).isZero());
  CHECK(rep.values.segment(18, 3) == fx.model.target.row(0).transpose());
  CHECK(rep.values.segment(21, 3) == fx.model.target.row(2).transpose());

  // r_ac is fitted from the positive {b} plus sampled zero-count contexts.
  const auto slice = ExtractTripleSlice(fx.store, fx.index, 0, 2, Slot::kBetween, 10);
  const auto set = BuildRelationContextSet(slice, fx.stats, config);
  CHECK(set.positives == 1);
  CHECK(set.contexts.size() == 3);
  CHECK(std::binary_search(set.contexts.begin(), set.contexts.end(), 1u));
  CHECK(rep.values.segment(0, 3) ==
        FitRelationVector(fx.model, set, config.lambda).vector);

  // Swapping the pair swaps the roles of the ordered blocks.
  const auto rev = ComputeRelationRepresentation(in, 2, 0, config);
  CHECK(rev.values.segment(3, 3) == rep.values.segment(0, 3));
  CHECK(rev.values.segment(0, 3).isZero());

  // Never co-occurring: only the word vectors remain.
  const auto apart = ComputeRelationRepresentation(in, 0, 3, config);
  CHECK(apart.values.head(18).isZero());
  CHECK(std::all_of(apart.empty_blocks.begin(), apart.empty_blocks.end(),
                    [](bool e) { return e; }));

  config.between_only = true;
  const auto short_rep = ComputeRelationRepresentation(in, 0, 2, config);
  CHECK(short_rep.values.size() == 4 * 3);
  CHECK(short_rep.values.head(6) == rep.values.head(6));
  CHECK(short_rep.values.tail(6) == rep.values.tail(6));

  CHECK_THROWS_AS(ComputeRelationRepresentation(in, 1, 1, {}), Error);
  RelvecConfig mismatch;
  mismatch.window = 5;
  CHECK_THROWS_AS(ComputeRelationRepresentation(in, 0, 2, mismatch), Error);
  mismatch = {};
  mismatch.measure = 7;
  CHECK_THROWS_AS(ComputeRelationRepresentation(in, 0, 2, mismatch), Error);
}

TEST_CASE("representations are deterministic and independent of threads") {
  std::mt19937_64 rng(47);
  Fixture fx(oracle::RandomStore(rng, 8, 12, 15), 4, 3, 4);
  std::vector<std::pair<WordId, WordId>> pairs;
  for (WordId i = 0; i < fx.store.vocab_size; ++i)
    for (WordId k = 0; k < fx.store.vocab_size; ++k)
      if (i != k) pairs.emplace_back(i, k);
  RelvecConfig config;
  config.window = 4;
  for (int measure = 1; measure <= 4; ++measure) {
    config.measure = measure;
    const auto one = ComputeRelationRepresentations(fx.inputs(), pairs, config, 1);
    const auto three = ComputeRelationRepresentations(fx.inputs(), pairs, config, 3);
    REQUIRE(one.size() == pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      CHECK(one[p].values == three[p].values);
      CHECK(one[p].values.allFinite());
    }
  }
}

TEST_CASE("diff and conc baselines") {
  std::mt19937_64 rng(53);
  const auto model = planted::RandomModel(rng, 6, 4);
  CHECK(BaselineDiff(model, 2, 2).isZero());
  std::uniform_real_distribution<double> u(-1, 1);
  for (WordId i = 0; i < 6; ++i) {
    for (WordId k = 0; k < 6; ++k) {
      const auto diff = BaselineDiff(model, i, k);
      CHECK(diff == -BaselineDiff(model, k, i));
      const auto conc = BaselineConc(model, i, k);
      CHECK(conc.size() == 8);
      // f(diff) = [-f; f] . conc for any linear functional f.
      Eigen::VectorXd f(4);
      for (int a = 0; a < 4; ++a) f[a] = u(rng);
      Eigen::VectorXd lifted(8);
      lifted << -f, f;
      CHECK(f.dot(diff) == doctest::Approx(lifted.dot(conc)).epsilon(1e-12));
    }
  }
  EmbeddingModel tiny(2, 2);
  tiny.target << 1, 0, 0, 1;
  CHECK(BaselineConc(tiny, 0, 1) == (Eigen::VectorXd(4) << 1, 0, 0, 1).finished());
  CHECK(BaselineConc(tiny, 0, 0) == (Eigen::VectorXd(4) << 1, 0, 1, 0).finished());
}

TEST_CASE("average baseline") {
  // a=0 b=1 c=2 e=3 x=4
  EmbeddingModel model(5, 2);
  model.target << 1, 1, 2, 0, 3, 3, 0, 4, 5, 5;
  const SentenceStore store{5, {{0, 1, 2}, {0, 3, 2}, {4, 0, 2}}};
  const auto index = InvertedIndex::Build(store);
  const auto avg = BaselineAvg(model, store, index, 0, 2, 10);
  REQUIRE(avg.size() == 16);
  // Between (a, c): sentence averages b and e, then their mean.
  CHECK(avg.segment(0, 2) == (Eigen::VectorXd(2) << 1, 2).finished());
  CHECK(avg.segment(2, 2).isZero());  // c never precedes a
  // Before a in (a, c) order: only x, in the third sentence.
  CHECK(avg.segment(4, 2) == model.target.row(4).transpose());
  CHECK(avg.segment(8, 4).isZero());  // nothing after c
  CHECK(avg.segment(12, 2) == model.target.row(0).transpose());
  CHECK(avg.segment(14, 2) == model.target.row(2).transpose());

  // One sentence [a, b, c]: the between block is w_b.
  const SentenceStore single{5, {{0, 1, 2}}};
  const auto one = BaselineAvg(model, single, InvertedIndex::Build(single), 0, 2, 10);
  CHECK(one.segment(0, 2) == model.target.row(1).transpose());

  // Window limits which pairs qualify.
  const SentenceStore far{5, {{0, 1, 1, 1, 2}}};
  const auto cut = BaselineAvg(model, far, InvertedIndex::Build(far), 0, 2, 3);
  CHECK(cut.head(12).isZero());
  CHECK(BaselineAvg(model, store, index, 0, 2, 10, true).size() == 8);
  CHECK_THROWS_AS(BaselineAvg(model, store, index, 1, 1, 10), Error);
}

TEST_CASE("relation vector file round trip") {
  Fixture fx(SentenceStore{3, {{0, 1, 2}}}, 2, 9);
  const auto vocab = Vocabulary::FromEntries({{"a", 1}, {"b", 1}, {"c", 1}});
  std::vector<RelationRepresentation> reps = {
      ComputeRelationRepresentation(fx.inputs(), 0, 2, {}),
      ComputeRelationRepresentation(fx.inputs(), 2, 1, {})};
  std::stringstream ss;
  WriteRelationVectors(ss, reps, vocab, "measure 2");
  const auto rows = ReadRelationVectors(ss);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].word_i == "a");
  CHECK(rows[0].word_k == "c");
  CHECK(rows[1].word_i == "c");
  CHECK(rows[0].measure == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    REQUIRE(rows[r].values.size() == 16);
    for (int a = 0; a < 16; ++a) CHECK(rows[r].values[a] == reps[r].values[a]);
  }
  std::stringstream bad("a\tb\t2\n");
  CHECK_THROWS_AS(ReadRelationVectors(bad), Error);
}

TEST_CASE("relation vectors single out a planted marker word") {
  // Entities 0..59, marker 60, fillers 61..99. Each planted pair appears in
  // sentences "filler h marker t filler"; noise sentences never contain the
  // marker.
  constexpr WordId kMarker = 60;
  constexpr WordId kVocab = 100;
  std::mt19937_64 rng(59);
  const auto filler = [&] { return static_cast<WordId>(61 + rng() % 39); };
  const auto entity = [&] { return static_cast<WordId>(rng() % 60); };
  std::vector<std::pair<WordId, WordId>> planted_pairs;
  SentenceStore store{kVocab, {}};
  while (planted_pairs.size() < 30) {
    const WordId h = entity(), t = entity();
    if (h == t) continue;
    planted_pairs.emplace_back(h, t);
    for (int s = 0; s < 4; ++s) {
      store.sentences.push_back({filler(), h, kMarker, t, filler()});
    }
  }
  for (int s = 0; s < 300; ++s) {
    std::vector<WordId> sentence;
    for (int w = 0; w < 8; ++w) sentence.push_back(rng() % 3 ? filler() : entity());
    store.sentences.push_back(sentence);
  }

  const auto pairs = CountPairs(store, {.window = 5});
  TrainerConfig tc;
  tc.dim = 16;
  tc.epochs = 30;
  tc.window = 5;
  const auto model = Train(pairs, BuildContextSets(pairs, 1), tc);
  const auto index = InvertedIndex::Build(store);
  const auto stats = CountTripleMarginals(store, {.window = 5});
  RelvecConfig config;
  config.window = 5;
  const RelationInputs in{model, store, index, stats};

  int wins = 0, trials = 0;
  for (const auto& [h, t] : planted_pairs) {
    const auto rep = ComputeRelationRepresentation(in, h, t, config);
    const Eigen::VectorXd r = rep.values.head(tc.dim);
    const auto score = [&](WordId j) {
      return r.dot(model.context.row(j)) + model.context_bias[j];
    };
    for (int draw = 0; draw < 5; ++draw) {
      WordId u = static_cast<WordId>(rng() % kVocab);
      if (u == kMarker) continue;
      ++trials;
      wins += score(kMarker) > score(u);
    }
  }
  CHECK(wins >= 0.95 * trials);
}

}  // namespace
}  // namespace grv
