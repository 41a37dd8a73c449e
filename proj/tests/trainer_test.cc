#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "grv/measures.h"
#include "grv/trainer.h"
#include "oracle.h"
#include "planted.h"

namespace grv {
namespace {

PairStats StatsFromTriplets(std::size_t n,
                            const std::vector<std::tuple<WordId, WordId, double>>& cells) {
  PairStats stats;
  stats.n = n;
  stats.window = 10;
  SparseCounts::Builder b(n);
  for (const auto& [i, j, v] : cells) b.Add(i, j, v);
  stats.x = b.Build();
  stats.row_sums = stats.x.RowSums();
  for (double v : stats.row_sums) stats.total += v;
  return stats;
}

TEST_CASE("context sets hold positives plus twice as many negatives") {
  // Row 0 has 3 positives among 20 columns -> 6 negatives.
  const auto stats = StatsFromTriplets(20, {{0, 1, 1}, {0, 4, 2}, {0, 9, 1},
                                            {1, 0, 1}, {4, 0, 2}, {9, 0, 1}});
  const auto sets = BuildContextSets(stats, 5);
  REQUIRE(sets.sets.size() == 20);
  const auto& j0 = sets.sets[0];
  CHECK(j0.size() == 9);
  CHECK(std::is_sorted(j0.begin(), j0.end()));
  CHECK(std::adjacent_find(j0.begin(), j0.end()) == j0.end());
  for (WordId j : {1u, 4u, 9u}) CHECK(std::binary_search(j0.begin(), j0.end(), j));
  CHECK(sets.sets[1].size() == 3);
  CHECK(sets.sets[2].empty());  // no positives, no negatives

  // Same seed reproduces, another seed gives another draw somewhere.
  CHECK(BuildContextSets(stats, 5).sets == sets.sets);
  bool differs = false;
  for (std::uint64_t s = 6; s < 20 && !differs; ++s) {
    differs = BuildContextSets(stats, s).sets != sets.sets;
  }
  CHECK(differs);
}

TEST_CASE("context sets when every column is positive") {
  std::vector<std::tuple<WordId, WordId, double>> cells;
  for (WordId i = 0; i < 4; ++i)
    for (WordId j = 0; j < 4; ++j) cells.emplace_back(i, j, 1.0);
  const auto sets = BuildContextSets(StatsFromTriplets(4, cells), 1);
  for (const auto& s : sets.sets) CHECK(s == std::vector<WordId>{0, 1, 2, 3});
}

TEST_CASE("context set sizes on random corpora") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto store = oracle::RandomStore(rng, 8, 40, 15);
    const auto stats = CountPairs(store, {.window = 3});
    const auto sets = BuildContextSets(stats, trial);
    for (WordId i = 0; i < stats.n; ++i) {
      const std::size_t pos = stats.x.RowCols(i).size();
      CHECK(sets.sets[i].size() == pos + std::min(2 * pos, stats.n - pos));
    }
  }
}

TEST_CASE("glove weight") {
  CHECK(GloveWeight(100) == 1.0);
  CHECK(GloveWeight(1e6) == 1.0);
  CHECK(GloveWeight(0) == 0.05);
  CHECK(GloveWeight(50) == doctest::Approx(std::pow(0.5, 0.75)));
  double prev = 0.0;
  for (double x = 0.5; x < 120; x += 0.5) {
    CHECK(GloveWeight(x) >= prev);
    prev = GloveWeight(x);
  }
}

TEST_CASE("residual variances") {
  TrainingProblem problem;
  problem.n = 3;
  EmbeddingModel model(3, 2);
  model.target << 1, 0, 0, 1, 1, 1;
  model.context << 0.5, 0.5, -1, 2, 0, 0;
  model.context_bias << 0.1, 0.2, 0.3;
  for (WordId i = 0; i < 3; ++i) {
    for (WordId j = 0; j < 2; ++j) {
      problem.pairs.push_back({i, j, PmiModel(model, i, j), 1.0});
    }
  }
  // Perfect fit: the floor everywhere (context 2 is in no set and takes
  // the global mean, which is zero as well).
  auto s2 = EstimateResidualVariances(model, problem);
  for (int j = 0; j < 3; ++j) CHECK(s2[j] == 1e-8);

  // Constant residual c on every pair gives c^2.
  auto shifted = problem;
  for (auto& p : shifted.pairs) p.pmi -= 0.3;
  s2 = EstimateResidualVariances(model, shifted);
  for (int j = 0; j < 3; ++j) CHECK(s2[j] == doctest::Approx(0.09).epsilon(1e-12));

  // Against a direct per-context average on random residuals.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2, 2);
  for (auto& p : shifted.pairs) p.pmi = u(rng);
  s2 = EstimateResidualVariances(model, shifted);
  double global = 0.0;
  for (WordId j = 0; j < 2; ++j) {
    double sum = 0.0;
    int count = 0;
    for (const auto& p : shifted.pairs) {
      if (p.context != j) continue;
      const double r = PmiModel(model, p.target, j) - p.pmi;
      sum += r * r;
      ++count;
    }
    global += sum;
    CHECK(std::abs(s2[j] - sum / count) <= 1e-12);
  }
  CHECK(std::abs(s2[2] - global / 6) <= 1e-12);
}

TEST_CASE("objective properties") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  EmbeddingModel model(5, 3);
  for (int i = 0; i < 5; ++i) {
    for (int a = 0; a < 3; ++a) {
      model.target(i, a) = u(rng);
      model.context(i, a) = u(rng);
    }
    model.context_bias[i] = u(rng);
  }
  TrainingProblem problem;
  problem.n = 5;
  for (WordId i = 0; i < 5; ++i)
    for (WordId j = 0; j < 5; ++j)
      if ((i + j) % 3 != 0) problem.pairs.push_back({i, j, u(rng), 1.0});
  Eigen::VectorXd s2(5);
  s2 << 0.5, 1, 2, 4, 0.25;

  double naive = 0.0;
  for (const auto& p : problem.pairs) {
    double dot = 0.0;
    for (int a = 0; a < 3; ++a) dot += model.target(p.target, a) * model.context(p.context, a);
    const double r = dot + model.context_bias[p.context] - p.pmi;
    naive += r * r / s2[p.context];
  }
  const double value = Objective(model, problem, s2);
  CHECK(std::abs(value - naive) <= 1e-10 * std::max(1.0, naive));
  CHECK(value >= 0.0);

  // Doubling every residual quadruples the objective.
  auto doubled = problem;
  for (auto& p : doubled.pairs) {
    const double fit = PmiModel(model, p.target, p.context);
    p.pmi = fit - 2.0 * (fit - p.pmi);
  }
  CHECK(Objective(model, doubled, s2) == doctest::Approx(4.0 * value).epsilon(1e-12));

  // Exact fit gives zero.
  auto exact = problem;
  for (auto& p : exact.pairs) p.pmi = PmiModel(model, p.target, p.context);
  CHECK(Objective(model, exact, s2) == 0.0);
}

TEST_CASE("training recovers a planted low-rank model") {
  const auto problem = planted::LowRankProblem(1);
  TrainerConfig config;
  config.dim = 10;
  config.epochs = 200;
  TrainingLog log;
  const auto model = Train(problem, config, &log);
  CHECK(planted::Rmse(model, problem) <= 0.05);
  REQUIRE(log.epoch_objective.size() == 200);
  CHECK(planted::WorstWindowIncrease(log.epoch_objective) <= 1e-6);
  for (int j = 0; j < model.sigma2.size(); ++j) {
    CHECK(std::isfinite(model.sigma2[j]));
    CHECK(model.sigma2[j] >= 1e-8);
  }
}

TEST_CASE("training fits a two-word, one-dimensional problem exactly") {
  TrainingProblem problem;
  problem.n = 2;
  // Targets from w = (1, -2), c = (0.5, 1.5), b = (0.25, -0.5).
  const double w[] = {1, -2}, c[] = {0.5, 1.5}, b[] = {0.25, -0.5};
  for (WordId i = 0; i < 2; ++i)
    for (WordId j = 0; j < 2; ++j) problem.pairs.push_back({i, j, w[i] * c[j] + b[j], 10.0});
  TrainerConfig config;
  config.dim = 1;
  config.epochs = 30000;
  const auto model = Train(problem, config);
  for (const auto& p : problem.pairs) {
    CHECK(std::abs(PmiModel(model, p.target, p.context) - p.pmi) <= 1e-6);
  }
}

TEST_CASE("deterministic training is bit-reproducible") {
  const auto problem = planted::LowRankProblem(4, 40, 4);
  TrainerConfig config;
  config.dim = 4;
  config.epochs = 12;
  config.seed = 99;
  const auto a = Train(problem, config);
  const auto b = Train(problem, config);
  CHECK(a.target == b.target);
  CHECK(a.context == b.context);
  CHECK(a.context_bias == b.context_bias);
  CHECK(a.sigma2 == b.sigma2);
  config.seed = 100;
  CHECK(Train(problem, config).target != a.target);
}

TEST_CASE("parallel training tracks the single-worker result") {
  const auto problem = planted::LowRankProblem(2, 60, 4);
  TrainerConfig config;
  config.dim = 4;
  config.epochs = 200;
  const double serial = planted::Rmse(Train(problem, config), problem);
  config.threads = 3;
  TrainingLog log;
  const auto model = Train(problem, config, &log);
  CHECK(std::abs(planted::Rmse(model, problem) - serial) <= 0.1 * serial);
  CHECK(log.epoch_objective.back() < 0.1 * log.epoch_objective.front());
}

TEST_CASE("training reports divergence") {
  TrainingProblem problem;
  problem.n = 2;
  problem.pairs.push_back({0, 1, std::numeric_limits<double>::infinity(), 1.0});
  TrainerConfig config;
  config.dim = 2;
  config.epochs = 1;
  try {
    Train(problem, config);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "E_DIVERGED");
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
  config.dim = 0;
  CHECK_THROWS_AS(Train(problem, config), Error);
}

TEST_CASE("training from counts requires positive alpha") {
  const SentenceStore store{3, {{0, 1, 2}, {2, 1}}};
  const auto stats = CountPairs(store, {.window = 2});
  const auto sets = BuildContextSets(stats, 1);
  CHECK_THROWS_AS(BuildTrainingProblem(stats, sets, 0.0), Error);
  const auto problem = BuildTrainingProblem(stats, sets, 1e-3);
  for (const auto& p : problem.pairs) {
    CHECK(p.pmi == PmiSmoothed(stats, p.target, p.context, 1e-3));
    CHECK(p.count == stats.x.Get(p.target, p.context));
  }
}

TEST_CASE("fold-in matches a ridge oracle and recovers planted vectors") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 12);
    const std::size_t n = d + 5 + rng() % 30;
    const auto model = planted::RandomModel(rng, n, d);
    Eigen::VectorXd planted(d);
    for (int a = 0; a < d; ++a) planted[a] = u(rng);
    std::map<WordId, double> row;
    for (WordId j = 0; j < n; ++j) {
      row[j] = planted.dot(model.context.row(j)) + model.context_bias[j];
    }
    const auto w = FoldIn(model, row, 1e-6);
    CHECK((w - planted).norm() <= 1e-4 * std::max(1.0, planted.norm()));

    // Noisy row against the augmented-QR oracle.
    for (auto& [j, v] : row) v += 0.3 * u(rng);
    const double lambda = trial % 2 ? 1e-6 : 0.5;
    const auto fit = FoldIn(model, row, lambda);
    Eigen::MatrixXd A(n, d);
    Eigen::VectorXd y(n);
    for (WordId j = 0; j < n; ++j) {
      A.row(j) = model.context.row(j);
      y[j] = row[j] - model.context_bias[j];
    }
    const auto expect = oracle::RidgeByAugmentedQr(A, y, lambda);
    CHECK((fit - expect).norm() <= 1e-6 * std::max(1.0, expect.norm()));
    const Eigen::VectorXd grad = A.transpose() * (A * fit - y) + lambda * fit;
    CHECK(grad.norm() <= 1e-8 * std::max(1.0, y.norm()));
  }
}

TEST_CASE("fold-in edge cases") {
  std::mt19937_64 rng(5);
  const auto model = planted::RandomModel(rng, 6, 3);
  CHECK(FoldIn(model, {}, 1e-6).isZero());
  // Fewer contexts than dimensions with no ridge term is singular.
  CHECK_THROWS_AS(FoldIn(model, {{0, 1.0}}, 0.0), Error);
  CHECK_THROWS_AS(FoldIn(model, {{6, 1.0}}, 1e-6), Error);
}

TEST_CASE("model file round trip") {
  std::mt19937_64 rng(8);
  auto model = planted::RandomModel(rng, 4, 3);
  model.target(0, 0) = 1.0 / 3.0;
  model.target(1, 1) = 4.9e-320;  // subnormal
  model.context(2, 2) = -0.0;
  model.config.window = 7;
  model.config.alpha = 1e-5;
  model.config.epochs = 13;
  model.config.seed = 42;
  const std::vector<std::string> words = {"a", "b-c", "ü", "d"};
  std::stringstream ss;
  model.Save(ss, words, "command train\nseed 42");
  const std::string text = ss.str();
  CHECK(text.rfind("# command train\n# seed 42\n", 0) == 0);

  std::vector<std::string> names;
  const auto back = EmbeddingModel::Load(ss, &names);
  CHECK(names == words);
  CHECK(back.target == model.target);
  CHECK(back.context == model.context);
  CHECK(back.context_bias == model.context_bias);
  CHECK(back.sigma2 == model.sigma2);
  CHECK(back.config.window == 7);
  CHECK(back.config.alpha == 1e-5);
  CHECK(back.config.epochs == 13);
  CHECK(back.config.seed == 42);
  std::stringstream again;
  back.Save(again, names, "command train\nseed 42");
  CHECK(again.str() == text);

  std::stringstream bad("not a model\n");
  CHECK_THROWS_AS(EmbeddingModel::Load(bad), Error);
  const std::string truncated = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  std::stringstream cut(truncated);
  CHECK_THROWS_AS(EmbeddingModel::Load(cut), Error);
}

}  // namespace
}  // namespace grv
