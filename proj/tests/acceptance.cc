// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "grv/cooccur.h"
#include "grv/eval.h"
#include "grv/measures.h"
#include "grv/relvec.h"
#include "grv/trainer.h"
#include "oracle.h"
#include "pipeline.h"
#include "planted.h"
#include "synthetic.h"

namespace grv {
namespace {

using pipeline::Run;
using pipeline::ScopedCwd;
using pipeline::TempDir;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Throws with the stage's error line if a command fails.
void MustRun(const std::vector<std::string>& args) {
  const auto r = Run(args);
  if (r.status != 0) throw std::runtime_error(args[0] + ": " + r.err);
}

// Rows of a metrics TSV keyed by relation, header and row order kept.
struct MetricsTable {
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> rows;
  std::vector<std::string> order;
  bool well_formed = true;
};

MetricsTable ReadMetrics(const std::string& path) {
  MetricsTable table;
  std::istringstream in(pipeline::ReadBytes(path));
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, '\t');) fields.push_back(cell);
    if (table.header.empty()) {
      table.header = fields;
      continue;
    }
    if (fields.size() != table.header.size()) table.well_formed = false;
    std::vector<double> values;
    for (std::size_t c = 1; c < fields.size(); ++c) values.push_back(std::stod(fields[c]));
    table.order.push_back(fields[0]);
    table.rows[fields[0]] = values;
  }
  return table;
}

// ---- 1 ----

Outcome CountingOracle() {
  Stopwatch clock;
  std::mt19937_64 rng(101);
  const int windows[] = {1, 2, 3, 5, 10};
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto store = oracle::RandomStore(rng, 8, 12, 15);
    const int window = windows[trial % 5];
    const bool weighted = trial % 2 == 0;
    const std::size_t n = store.vocab_size;
    const auto index = InvertedIndex::Build(store);
    const auto pairs = CountPairs(store, {.window = window});
    const auto x = oracle::PairCounts(store, window);
    for (WordId i = 0; i < n; ++i) {
      for (WordId j = 0; j < n; ++j) worst = std::max(worst, std::abs(pairs.x.Get(i, j) - x[i][j]));
    }
    const auto stats = CountTripleMarginals(store, {.window = window, .weighted = weighted});
    for (Slot slot : kAllSlots) {
      const auto y = oracle::TripleCounts(store, window, slot, weighted);
      const auto ref = oracle::Marginalize(y);
      const auto& m = stats.slot(slot);
      worst = std::max(worst, std::abs(m.total - ref.total));
      for (WordId a = 0; a < n; ++a) {
        worst = std::max({worst, std::abs(m.i[a] - ref.i[a]), std::abs(m.j[a] - ref.j[a]),
                          std::abs(m.k[a] - ref.k[a])});
        for (WordId b = 0; b < n; ++b) {
          worst = std::max({worst, std::abs(m.ij.Get(a, b) - ref.ij[a][b]),
                            std::abs(m.ik.Get(a, b) - ref.ik[a][b]),
                            std::abs(m.jk.Get(a, b) - ref.jk[a][b])});
          if (a == b) continue;
          const auto slice = ExtractTripleSlice(store, index, a, b, slot, window, weighted);
          for (WordId j = 0; j < n; ++j) {
            worst = std::max(worst, std::abs(slice.Get(j) - y[a][j][b]));
          }
        }
      }
    }
  }
  const double seconds = clock.Seconds();
  return {worst <= 1e-12 && seconds < 10.0,
          Format("50 corpora, max |diff| %.3g, %.2f s", worst, seconds)};
}

// ---- 2 ----

struct Residuals {
  double first = 0.0;
  double second = 0.0;
  int triples = 0;
};

// Both identities over every triple with y_ijk > 0, all slots.
Residuals IdentityResiduals(const SentenceStore& store, int window, double alpha) {
  const auto stats = CountTripleMarginals(store, {.window = window});
  const auto index = InvertedIndex::Build(store);
  const std::size_t n = store.vocab_size;
  Residuals out;
  for (Slot slot : kAllSlots) {
    const auto& m = stats.slot(slot);
    for (WordId i = 0; i < n; ++i) {
      for (WordId k = 0; k < n; ++k) {
        if (i == k) continue;
        const auto slice = ExtractTripleSlice(store, index, i, k, slot, window);
        for (const auto& [j, y] : slice.counts) {
          const double pij = TriplePmiFirstContext(m, n, i, j, alpha);
          const double pjk = TriplePmiContextSecond(m, n, j, k, alpha);
          out.first = std::max(out.first, std::abs(pij + pjk - Si(1, m, n, y, i, j, k, alpha) -
                                                   Si(3, m, n, y, i, j, k, alpha)));
          out.second = std::max(out.second, std::abs(Si(2, m, n, y, i, j, k, alpha) - pij -
                                                     pjk - Si(4, m, n, y, i, j, k, alpha)));
          ++out.triples;
        }
      }
    }
  }
  return out;
}

Outcome SiIdentities() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  int triples = 0, monotone = 0, corpora = 0;
  while (corpora < 20) {
    const auto store = oracle::RandomStore(rng, 6, 8, 12);
    const auto exact = IdentityResiduals(store, 5, 0.0);
    if (exact.triples == 0) continue;  // nothing to check
    ++corpora;
    triples += exact.triples;
    worst = std::max({worst, exact.first, exact.second});
    double previous = INFINITY;
    bool decreasing = true;
    for (double alpha : {1e-3, 1e-4, 1e-5}) {
      const auto r = IdentityResiduals(store, 5, alpha);
      const double total = r.first + r.second;
      decreasing = decreasing && total < previous;
      previous = total;
    }
    monotone += decreasing;
  }
  return {corpora == 20 && worst <= 1e-9 && monotone == corpora,
          Format("%d corpora, %d triples, max residual %.3g at alpha=0, "
                 "%d/%d decreasing over alpha",
                 corpora, triples, worst, monotone, corpora)};
}

// ---- 3 ----

Outcome Normalization() {
  std::mt19937_64 rng(303);
  std::vector<SentenceStore> stores;
  for (int c = 0; c < 10; ++c) stores.push_back(oracle::RandomStore(rng, 5, 10, 10));
  stores.push_back({10, {}});
  double worst = 0.0;
  int sums = 0;
  for (const auto& store : stores) {
    const auto stats = CountTripleMarginals(store, {.window = 4});
    const auto index = InvertedIndex::Build(store);
    for (double alpha : {1e-2, 1e-4, 1e-6}) {
      for (Slot slot : kAllSlots) {
        worst = std::max(worst,
                         std::abs(NormalizationCheck(store, index, stats, slot, alpha) - 1.0));
        ++sums;
      }
    }
  }
  return {worst <= 1e-9,
          Format("%d sums over n^3 triples (incl. empty corpus), max |sum - 1| %.3g", sums,
                 worst)};
}

// ---- 4 ----

Outcome LowRankRecovery() {
  Stopwatch clock;
  const auto problem = planted::LowRankProblem(1);
  TrainerConfig config;
  config.dim = 10;
  config.epochs = 200;
  config.threads = 1;
  TrainingLog log;
  const auto model = Train(problem, config, &log);
  const double rmse = planted::Rmse(model, problem);
  const double uptick = planted::WorstWindowIncrease(log.epoch_objective);
  const double seconds = clock.Seconds();
  return {rmse <= 0.05 && uptick <= 1e-6 && seconds < 120.0,
          Format("rmse %.4f, worst 5-epoch increase %.3g, %.1f s", rmse, uptick, seconds)};
}

// ---- 5 ----

Outcome LeastSquares() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-1, 1);
  double fit_error = 0.0, fold_error = 0.0, optimality = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 20);
    const std::size_t n = 25 + rng() % 100;
    const auto model = planted::RandomModel(rng, n, d);
    const double lambda = trial % 3 == 0 ? 1e-6 : std::pow(10.0, -3 + trial % 5);

    const auto check = [&](const Eigen::VectorXd& got, const std::vector<WordId>& rows,
                           const std::vector<double>& targets, double& error) {
      Eigen::MatrixXd a(rows.size(), d);
      Eigen::VectorXd y(rows.size());
      for (std::size_t t = 0; t < rows.size(); ++t) {
        a.row(t) = model.context.row(rows[t]);
        y[t] = targets[t] - model.context_bias[rows[t]];
      }
      const auto expect = oracle::RidgeByAugmentedQr(a, y, lambda);
      error = std::max(error, (got - expect).norm() / std::max(1.0, expect.norm()));
      const Eigen::VectorXd grad = a.transpose() * (a * got - y) + lambda * got;
      optimality = std::max(optimality, grad.norm() / std::max(1.0, y.norm()));
    };

    std::vector<WordId> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    RelationContextSet set;
    set.contexts.assign(all.begin(), all.begin() + 1 + rng() % std::min<std::size_t>(60, n));
    std::sort(set.contexts.begin(), set.contexts.end());
    for (std::size_t t = 0; t < set.contexts.size(); ++t) set.targets.push_back(3 * u(rng));
    check(FitRelationVector(model, set, lambda).vector, set.contexts, set.targets, fit_error);

    std::map<WordId, double> row;
    for (std::size_t t = 0; t < n / 2; ++t) row[all[t]] = 2 * u(rng);
    std::vector<WordId> ids;
    std::vector<double> values;
    for (const auto& [j, v] : row) {
      ids.push_back(j);
      values.push_back(v);
    }
    check(FoldIn(model, row, lambda), ids, values, fold_error);
  }
  return {fit_error <= 1e-6 && fold_error <= 1e-6 && optimality <= 1e-8,
          Format("100 instances each, relative error fit %.3g / fold-in %.3g, "
                 "optimality %.3g",
                 fit_error, fold_error, optimality)};
}

// ---- 6, 7: planted corpus through the command-line stages ----

class PlantedRun {
 public:
  static PlantedRun& Get() {
    static PlantedRun run;
    return run;
  }

  const TempDir& dir() const { return dir_; }
  double build_seconds() const { return build_seconds_; }

 private:
  PlantedRun() : dir_("grv-acceptance-planted") {
    Stopwatch clock;
    const auto corpus = synthetic::PlantedRelations(1);
    ScopedCwd cwd(dir_.path());
    pipeline::WriteText("raw.txt", corpus.text);
    pipeline::WriteText("data.txt", corpus.dataset);
    MustRun({"preprocess", "--input", "raw.txt", "--min-count", "1"});
    MustRun({"count-pairs", "--window", "5"});
    MustRun({"count-triples", "--window", "5"});
    MustRun({"train", "--dim", "50", "--epochs", "50"});
    build_seconds_ = clock.Seconds();
  }

  TempDir dir_;
  double build_seconds_ = 0.0;
};

// Relation fits use lambda = 10 on this corpus (see README).
const std::vector<std::string> kRelationFlags = {"--lambda", "10"};

std::string Induction(const std::string& featurizer, std::vector<std::string> extra,
                      const std::string& output) {
  std::vector<std::string> args = {"eval-induction", "--dataset", "data.txt",
                                   "--featurizer", featurizer, "--output", output};
  args.insert(args.end(), extra.begin(), extra.end());
  MustRun(args);
  return output;
}

Outcome PlantedRelations() {
  auto& run = PlantedRun::Get();
  Stopwatch clock;
  ScopedCwd cwd(run.dir().path());
  const auto r2 = ReadMetrics(Induction("r2", kRelationFlags, "induction-r2.tsv"));
  const auto avg = ReadMetrics(Induction("avg", {}, "induction-avg.tsv"));
  const auto diff = ReadMetrics(Induction("diff", {}, "induction-diff.tsv"));
  const double seconds = run.build_seconds() + clock.Seconds();
  const double acc = r2.rows.at("macro")[0];
  const double r2_gamma = r2.rows.at("gamma")[0];
  const double avg_gamma = avg.rows.at("gamma")[0];
  const double diff_gamma = diff.rows.at("gamma")[0];
  return {acc >= 0.90 && r2_gamma > avg_gamma && diff_gamma <= avg_gamma && seconds < 300.0,
          Format("R2 accuracy %.3f (alpha %.3f, beta %.3f, gamma %.3f); frequent-marker "
                 "type: R2 %.3f > Avg %.3f >= Diff %.3f; %.0f s",
                 acc, r2.rows.at("alpha")[0], r2.rows.at("beta")[0], r2_gamma, r2_gamma,
                 avg_gamma, diff_gamma, seconds)};
}

bool TableShaped(const MetricsTable& table) {
  if (!table.well_formed) return false;
  if (table.header != std::vector<std::string>{"relation", "acc", "prec", "rec", "f1"}) return false;
  if (table.order != std::vector<std::string>{"alpha", "beta", "gamma", "macro"}) return false;
  for (const auto& [name, values] : table.rows) {
    for (double v : values) {
      if (!(v >= 0.0 && v <= 1.0)) return false;
    }
  }
  return true;
}

Outcome Ablations() {
  auto& run = PlantedRun::Get();
  ScopedCwd cwd(run.dir().path());
  MustRun({"count-triples", "--window", "5", "--weighted=false", "--triples",
           "triples-unweighted.bin"});
  struct Mode {
    std::string name;
    std::vector<std::string> flags;
  };
  const std::vector<Mode> modes = {
      {"unweighted", {"--triples", "triples-unweighted.bin", "--weighted=false"}},
      {"between", {"--between-only"}}};
  int shaped = 0, tables = 0;
  bool repeatable = true;
  std::string summary;
  for (const auto& mode : modes) {
    summary += " " + mode.name + ":";
    for (const std::string f : {"r1", "r2", "r3", "r4"}) {
      auto flags = mode.flags;
      flags.insert(flags.end(), kRelationFlags.begin(), kRelationFlags.end());
      const auto path = Induction(f, flags, "induction-" + f + "-" + mode.name + ".tsv");
      const auto table = ReadMetrics(path);
      shaped += TableShaped(table);
      ++tables;
      const auto macro = table.rows.find("macro");
      summary += Format(" %s %.3f", f.c_str(), macro == table.rows.end() ? NAN : macro->second[0]);
      if (f == "r2") {
        const auto first = pipeline::ReadBytes(path);
        Induction(f, flags, path);
        repeatable = repeatable && first == pipeline::ReadBytes(path);
      }
    }
  }
  return {shaped == tables && repeatable,
          Format("%d/%d tables shaped, repeat runs %s; macro acc%s", shaped, tables,
                 repeatable ? "identical" : "DIFFER", summary.c_str())};
}

// ---- 8 ----

Outcome SpearmanOracle() {
  std::mt19937_64 rng(808);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 0.0);
    std::iota(y.begin(), y.end(), 0.0);
    std::shuffle(y.begin(), y.end(), rng);
    if (trial % 2 == 1) {
      // Ties: collapse values into a few buckets.
      const std::size_t buckets = 2 + rng() % 4;
      for (auto& v : x) v = std::floor(v * static_cast<double>(buckets) / static_cast<double>(n));
      for (auto& v : y) v = std::floor(v * static_cast<double>(buckets) / static_cast<double>(n));
      x[0] = -1.0;  // keep both sides non-constant
      y[1] = -1.0;
    }
    worst = std::max(worst, std::abs(Spearman(x, y) - oracle::SpearmanByDefinition(x, y)));
  }
  return {worst <= 1e-12, Format("100 permutations (50 with ties), max |diff| %.3g", worst)};
}

// ---- 9 ----

void FullPipeline(const synthetic::PlantedCorpus& corpus) {
  pipeline::WriteText("raw.txt", corpus.text);
  pipeline::WriteText("data.txt", corpus.dataset);
  pipeline::WriteText("pairs.txt", "aheadaa atailaa\ngheadab gtailab\nbheadac gtailaa\n");
  MustRun({"preprocess", "--input", "raw.txt", "--min-count", "1"});
  MustRun({"count-pairs", "--window", "5", "--tsv", "pairs.tsv"});
  MustRun({"count-triples", "--window", "5"});
  MustRun({"train", "--dim", "16", "--epochs", "10"});
  MustRun({"relvec", "--pair-list", "pairs.txt"});
  MustRun({"eval-induction", "--dataset", "data.txt", "--featurizer", "r2"});
  MustRun({"eval-induction", "--dataset", "data.txt", "--featurizer", "avg"});
  MustRun({"eval-ranking", "--dataset", "data.txt", "--featurizer", "r2"});
  MustRun({"measures-dump", "--first", "gheadab", "--second", "gtailab", "--output",
           "dump.tsv"});
}

Outcome Determinism() {
  synthetic::PlantedOptions options;
  options.pairs_per_type = 20;
  options.noise_sentences = 600;
  const auto corpus = synthetic::PlantedRelations(9, options);
  TempDir first("grv-acceptance-run-a"), second("grv-acceptance-run-b");
  for (const auto* dir : {&first, &second}) {
    ScopedCwd cwd(dir->path());
    FullPipeline(corpus);
  }
  const auto a = pipeline::Snapshot(first.path());
  const auto b = pipeline::Snapshot(second.path());
  std::size_t same = 0, bytes = 0;
  for (const auto& [name, content] : a) {
    const auto it = b.find(name);
    if (it != b.end() && it->second == content) {
      ++same;
      bytes += content.size();
    }
  }
  return {a.size() == b.size() && same == a.size() && a.size() == 15,
          Format("%zu/%zu artifacts identical (%zu bytes)", same, a.size(), bytes)};
}

}  // namespace
}  // namespace grv

int main() {
  using grv::Outcome;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"counting oracle equivalence", grv::CountingOracle},
      {"SI identity suite", grv::SiIdentities},
      {"probability normalization", grv::Normalization},
      {"low-rank recovery", grv::LowRankRecovery},
      {"least-squares exactness", grv::LeastSquares},
      {"planted-relation end-to-end", grv::PlantedRelations},
      {"ablation flags", grv::Ablations},
      {"spearman oracle", grv::SpearmanOracle},
      {"determinism", grv::Determinism},
  };
  int failed = 0;
  int number = 0;
  for (const auto& [name, check] : criteria) {
    ++number;
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += !outcome.pass;
    std::printf("criterion %d %s  %s: %s\n", number, outcome.pass ? "PASS" : "FAIL", name,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
