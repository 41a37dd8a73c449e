#include "grv/trainer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "grv/artifact.h"
#include "grv/measures.h"
#include "grv/random.h"

namespace grv {
namespace {

constexpr std::string_view kModelMagic = "grv-model 1";

// Plain or relaxed-atomic access to shared parameters.
template <bool kShared>
struct Param {
  static double Load(const double& x) {
    if constexpr (kShared) {
      return std::atomic_ref<const double>(x).load(std::memory_order_relaxed);
    } else {
      return x;
    }
  }
  static void Store(double& x, double value) {
    if constexpr (kShared) {
      std::atomic_ref<double>(x).store(value, std::memory_order_relaxed);
    } else {
      x = value;
    }
  }
};

struct AdaGradState {
  RowMatrix target_sq;
  RowMatrix context_sq;
  Eigen::VectorXd bias_sq;
};

// One pass over order[begin, end). Returns false and fills `bad` on a
// non-finite residual.
template <bool kShared>
bool UpdateRange(EmbeddingModel& model, AdaGradState& state,
                 const TrainingProblem& problem,
                 const std::vector<std::size_t>& order,
                 const std::vector<double>& weights, std::size_t begin,
                 std::size_t end, double lr, std::size_t* bad) {
  using P = Param<kShared>;
  const int d = model.dim();
  std::vector<double> wi(d), cj(d);
  for (std::size_t t = begin; t < end; ++t) {
    const TrainingPair& pair = problem.pairs[order[t]];
    double* w = model.target.row(pair.target).data();
    double* c = model.context.row(pair.context).data();
    double* w_sq = state.target_sq.row(pair.target).data();
    double* c_sq = state.context_sq.row(pair.context).data();
    double& b = model.context_bias[pair.context];
    double& b_sq = state.bias_sq[pair.context];

    double pred = P::Load(b);
    for (int a = 0; a < d; ++a) {
      wi[a] = P::Load(w[a]);
      cj[a] = P::Load(c[a]);
      pred += wi[a] * cj[a];
    }
    const double residual = pred - pair.pmi;
    if (!std::isfinite(residual)) {
      *bad = order[t];
      return false;
    }
    const double g = weights[order[t]] * residual;
    for (int a = 0; a < d; ++a) {
      const double gw = g * cj[a];
      const double gc = g * wi[a];
      const double sw = P::Load(w_sq[a]) + gw * gw;
      const double sc = P::Load(c_sq[a]) + gc * gc;
      P::Store(w_sq[a], sw);
      P::Store(c_sq[a], sc);
      P::Store(w[a], wi[a] - lr * gw / std::sqrt(sw));
      P::Store(c[a], cj[a] - lr * gc / std::sqrt(sc));
    }
    const double sb = P::Load(b_sq) + g * g;
    P::Store(b_sq, sb);
    P::Store(b, P::Load(b) - lr * g / std::sqrt(sb));
  }
  return true;
}

bool AllFinite(const EmbeddingModel& model) {
  return model.target.allFinite() && model.context.allFinite() &&
         model.context_bias.allFinite();
}

}  // namespace

EmbeddingModel::EmbeddingModel(std::size_t n, int dim)
    : target(RowMatrix::Zero(static_cast<Eigen::Index>(n), dim)),
      context(RowMatrix::Zero(static_cast<Eigen::Index>(n), dim)),
      context_bias(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      sigma2(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))) {
  if (dim < 1) throw Error("E_CONFIG", "embedding dimension must be >= 1");
  config.dim = dim;
}

ContextSets BuildContextSets(const PairStats& stats, std::uint64_t seed) {
  ContextSets out;
  out.sets.resize(stats.n);
  for (WordId i = 0; i < stats.n; ++i) {
    const auto positives = stats.x.RowCols(i);
    std::vector<WordId> set(positives.begin(), positives.end());
    const std::size_t zeros = stats.n - positives.size();
    const std::size_t want = std::min(2 * positives.size(), zeros);
    Rng rng(DeriveSeed(seed, "context-sets", {i}));
    const auto negatives = SampleExcluding(
        positives, static_cast<std::uint32_t>(stats.n), want, rng);
    set.insert(set.end(), negatives.begin(), negatives.end());
    std::sort(set.begin(), set.end());
    out.sets[i] = std::move(set);
  }
  return out;
}

double GloveWeight(double x, double x_max, double exponent,
                   double zero_weight) {
  if (x <= 0.0) return zero_weight;
  if (x >= x_max) return 1.0;
  return std::pow(x / x_max, exponent);
}

TrainingProblem BuildTrainingProblem(const PairStats& stats,
                                     const ContextSets& contexts,
                                     double alpha) {
  if (!(alpha > 0.0)) {
    throw Error("E_CONFIG", "training requires smoothing alpha > 0");
  }
  if (contexts.sets.size() != stats.n) {
    throw Error("E_DIM", "context sets do not match pair statistics");
  }
  TrainingProblem problem;
  problem.n = stats.n;
  for (WordId i = 0; i < stats.n; ++i) {
    for (WordId j : contexts.sets[i]) {
      problem.pairs.push_back(
          {i, j, PmiSmoothed(stats, i, j, alpha), stats.x.Get(i, j)});
    }
  }
  return problem;
}

Eigen::VectorXd EstimateResidualVariances(const EmbeddingModel& model,
                                          const TrainingProblem& problem,
                                          double floor) {
  const auto n = static_cast<Eigen::Index>(problem.n);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(n);
  double global_sum = 0.0;
  for (const auto& pair : problem.pairs) {
    const double residual = PmiModel(model, pair.target, pair.context) - pair.pmi;
    sum[pair.context] += residual * residual;
    count[pair.context] += 1.0;
    global_sum += residual * residual;
  }
  const double global_mean =
      problem.pairs.empty()
          ? floor
          : global_sum / static_cast<double>(problem.pairs.size());
  Eigen::VectorXd sigma2(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = count[j] > 0.0 ? sum[j] / count[j] : global_mean;
    sigma2[j] = std::isfinite(v) ? std::max(v, floor) : floor;
  }
  return sigma2;
}

double Objective(const EmbeddingModel& model, const TrainingProblem& problem,
                 const Eigen::VectorXd& sigma2) {
  double total = 0.0;
  for (const auto& pair : problem.pairs) {
    const double residual = PmiModel(model, pair.target, pair.context) - pair.pmi;
    total += residual * residual / sigma2[pair.context];
  }
  return total;
}

EmbeddingModel Train(const TrainingProblem& problem,
                     const TrainerConfig& config, TrainingLog* log) {
  if (config.dim < 1) throw Error("E_CONFIG", "dim must be >= 1");
  if (config.epochs < 0) throw Error("E_CONFIG", "epochs must be >= 0");
  if (config.variance_interval < 1) {
    throw Error("E_CONFIG", "variance interval must be >= 1");
  }
  EmbeddingModel model(problem.n, config.dim);
  model.config = config;

  Rng init_rng(DeriveSeed(config.seed, "training", {0}));
  const double scale = 0.5 / config.dim;
  for (Eigen::Index r = 0; r < model.target.rows(); ++r) {
    for (Eigen::Index a = 0; a < model.target.cols(); ++a) {
      model.target(r, a) = UniformReal(init_rng, -scale, scale);
    }
  }
  for (Eigen::Index r = 0; r < model.context.rows(); ++r) {
    for (Eigen::Index a = 0; a < model.context.cols(); ++a) {
      model.context(r, a) = UniformReal(init_rng, -scale, scale);
    }
  }

  AdaGradState state;
  state.target_sq = RowMatrix::Constant(model.target.rows(), config.dim, 1.0);
  state.context_sq = RowMatrix::Constant(model.context.rows(), config.dim, 1.0);
  state.bias_sq = Eigen::VectorXd::Constant(model.context_bias.size(), 1.0);

  std::vector<double> weights(problem.pairs.size());
  for (std::size_t t = 0; t < problem.pairs.size(); ++t) {
    weights[t] = GloveWeight(problem.pairs[t].count, config.x_max,
                             config.exponent, config.negative_weight);
  }
  bool have_variances = false;

  std::vector<std::size_t> order(problem.pairs.size());
  for (std::size_t t = 0; t < order.size(); ++t) order[t] = t;
  Rng shuffle_rng(DeriveSeed(config.seed, "training", {1}));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    FisherYatesShuffle(order, shuffle_rng);
    std::size_t bad = 0;
    bool ok = true;
    if (config.threads <= 1) {
      ok = UpdateRange<false>(model, state, problem, order, weights, 0,
                              order.size(), config.learning_rate, &bad);
    } else {
      const std::size_t shards = static_cast<std::size_t>(config.threads);
      std::vector<char> shard_ok(shards, 1);
      std::vector<std::size_t> shard_bad(shards, 0);
      std::vector<std::thread> workers;
      for (std::size_t s = 0; s < shards; ++s) {
        workers.emplace_back([&, s] {
          const std::size_t begin = order.size() * s / shards;
          const std::size_t end = order.size() * (s + 1) / shards;
          shard_ok[s] = UpdateRange<true>(model, state, problem, order,
                                          weights, begin, end,
                                          config.learning_rate, &shard_bad[s]);
        });
      }
      for (auto& w : workers) w.join();
      for (std::size_t s = 0; s < shards; ++s) {
        if (!shard_ok[s]) {
          ok = false;
          bad = shard_bad[s];
          break;
        }
      }
    }
    if (!ok || !AllFinite(model)) {
      std::ostringstream msg;
      msg << "training diverged in epoch " << epoch;
      if (!ok) {
        msg << " at pair (" << problem.pairs[bad].target << ", "
            << problem.pairs[bad].context << ")";
      }
      throw Error("E_DIVERGED", msg.str());
    }

    if (log != nullptr) {
      double objective = 0.0;
      double weight_sum = 0.0;
      for (std::size_t t = 0; t < problem.pairs.size(); ++t) {
        const auto& pair = problem.pairs[t];
        const double residual =
            PmiModel(model, pair.target, pair.context) - pair.pmi;
        objective += weights[t] * residual * residual;
        weight_sum += weights[t];
      }
      // Weights rescaled to mean 1 so that epochs on either side of a
      // variance refresh are comparable.
      if (weight_sum > 0.0) objective *= problem.pairs.size() / weight_sum;
      log->epoch_objective.push_back(objective);
    }

    if (epoch % config.variance_interval == 0) {
      model.sigma2 =
          EstimateResidualVariances(model, problem, config.variance_floor);
      have_variances = true;
      // AdaGrad is invariant to a constant gradient scale only if its
      // history carries the same scale. Every gradient on context row j is
      // multiplied by that row's weight, so its accumulators are rescaled by
      // the squared weight ratio. A target row mixes contexts and takes the
      // largest ratio among them, so no step grows across a refresh.
      std::vector<double> old_sq(problem.n, 0.0), new_sq(problem.n, 0.0);
      for (std::size_t t = 0; t < problem.pairs.size(); ++t) {
        const WordId j = problem.pairs[t].context;
        const double updated = 1.0 / model.sigma2[j];
        old_sq[j] += weights[t] * weights[t];
        new_sq[j] += updated * updated;
        weights[t] = updated;
      }
      std::vector<double> factor(problem.n, 1.0);
      for (std::size_t j = 0; j < problem.n; ++j) {
        if (old_sq[j] <= 0.0) continue;
        factor[j] = new_sq[j] / old_sq[j];
        state.context_sq.row(j) *= factor[j];
        state.bias_sq[j] *= factor[j];
      }
      std::vector<double> target_factor(problem.n, 0.0);
      for (const auto& pair : problem.pairs) {
        target_factor[pair.target] =
            std::max(target_factor[pair.target], factor[pair.context]);
      }
      for (std::size_t i = 0; i < problem.n; ++i) {
        if (target_factor[i] > 0.0) state.target_sq.row(i) *= target_factor[i];
      }
    }
  }
  if (!have_variances || config.epochs % config.variance_interval != 0) {
    model.sigma2 =
        EstimateResidualVariances(model, problem, config.variance_floor);
  }
  return model;
}

EmbeddingModel Train(const PairStats& stats, const ContextSets& contexts,
                     const TrainerConfig& config, TrainingLog* log) {
  return Train(BuildTrainingProblem(stats, contexts, config.alpha), config,
               log);
}

Eigen::VectorXd FoldIn(const EmbeddingModel& model,
                       const std::map<WordId, double>& pmi_row,
                       double lambda) {
  RowMatrix design(static_cast<Eigen::Index>(pmi_row.size()), model.dim());
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(pmi_row.size()));
  Eigen::Index row = 0;
  for (const auto& [j, value] : pmi_row) {
    if (j >= model.vocab_size()) {
      throw Error("E_RANGE", "fold-in context id outside model");
    }
    design.row(row) = model.context.row(j);
    rhs[row] = value - model.context_bias[j];
    ++row;
  }
  return SolveRidgeNormalEquations(design, rhs, lambda);
}

// ---------------------------------------------------------------------------
// Persistence

void EmbeddingModel::Save(std::ostream& os,
                          const std::vector<std::string>& words,
                          std::string_view header) const {
  const auto n = vocab_size();
  if (words.size() != n) {
    throw Error("E_DIM", "word list does not match model size");
  }
  artifact::WriteCommentBlock(os, header);
  os << kModelMagic << '\n';
  os << "n " << n << '\n';
  os << "d " << dim() << '\n';
  os << "W " << config.window << '\n';
  os << "alpha " << artifact::FormatDouble(config.alpha) << '\n';
  os << "epochs " << config.epochs << '\n';
  os << "seed " << config.seed << '\n';
  const auto write_rows = [&](const char* name, const RowMatrix& m) {
    os << name << '\n';
    for (std::size_t r = 0; r < n; ++r) {
      os << words[r];
      for (int a = 0; a < dim(); ++a) {
        os << ' ' << artifact::FormatDouble(m(static_cast<Eigen::Index>(r), a));
      }
      os << '\n';
    }
  };
  const auto write_values = [&](const char* name, const Eigen::VectorXd& v) {
    os << name << '\n';
    for (std::size_t r = 0; r < n; ++r) {
      os << words[r] << ' '
         << artifact::FormatDouble(v[static_cast<Eigen::Index>(r)]) << '\n';
    }
  };
  write_rows("target", target);
  write_rows("context", context);
  write_values("bias", context_bias);
  write_values("sigma2", sigma2);
}

EmbeddingModel EmbeddingModel::Load(std::istream& is,
                                    std::vector<std::string>* words) {
  std::string line;
  while (std::getline(is, line) && artifact::IsCommentLine(line)) {
  }
  if (line != kModelMagic) {
    throw Error("E_FORMAT", "not a model file (missing '" +
                                std::string(kModelMagic) + "')");
  }
  const auto field = [&](const char* key) {
    if (!std::getline(is, line)) {
      throw Error("E_FORMAT", std::string("model header lacks ") + key);
    }
    const std::string prefix = std::string(key) + " ";
    if (line.rfind(prefix, 0) != 0) {
      throw Error("E_FORMAT", std::string("model header lacks ") + key);
    }
    return line.substr(prefix.size());
  };
  const auto n = artifact::ParseUnsigned(field("n"), "n");
  const auto d = artifact::ParseUnsigned(field("d"), "d");
  EmbeddingModel model(n, static_cast<int>(d));
  model.config.dim = static_cast<int>(d);
  model.config.window =
      static_cast<int>(artifact::ParseUnsigned(field("W"), "W"));
  model.config.alpha = artifact::ParseDouble(field("alpha"), "alpha");
  model.config.epochs =
      static_cast<int>(artifact::ParseUnsigned(field("epochs"), "epochs"));
  model.config.seed = artifact::ParseUnsigned(field("seed"), "seed");

  std::vector<std::string> names(n);
  const auto read_section = [&](const char* name, int width, auto&& store) {
    if (!std::getline(is, line) || line != name) {
      throw Error("E_FORMAT", std::string("model lacks section ") + name);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (!std::getline(is, line)) {
        throw Error("E_FORMAT", std::string("truncated section ") + name);
      }
      std::istringstream fields(line);
      std::string word;
      fields >> word;
      if (names[r].empty()) {
        names[r] = word;
      } else if (names[r] != word) {
        throw Error("E_FORMAT", "word order differs between model sections");
      }
      std::string token;
      for (int a = 0; a < width; ++a) {
        if (!(fields >> token)) {
          throw Error("E_FORMAT", std::string("short row in section ") + name);
        }
        store(static_cast<Eigen::Index>(r), a,
              artifact::ParseDouble(token, "model value"));
      }
      if (fields >> token) {
        throw Error("E_FORMAT", std::string("long row in section ") + name);
      }
    }
  };
  const int width = static_cast<int>(d);
  read_section("target", width,
               [&](Eigen::Index r, int a, double v) { model.target(r, a) = v; });
  read_section("context", width, [&](Eigen::Index r, int a, double v) {
    model.context(r, a) = v;
  });
  read_section("bias", 1,
               [&](Eigen::Index r, int, double v) { model.context_bias[r] = v; });
  read_section("sigma2", 1,
               [&](Eigen::Index r, int, double v) { model.sigma2[r] = v; });
  if (words != nullptr) *words = std::move(names);
  return model;
}

}  // namespace grv
