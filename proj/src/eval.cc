#include "grv/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "grv/artifact.h"
#include "grv/unicode.h"

namespace grv {
namespace {

std::string Lowercase(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  std::size_t pos = 0;
  while (pos < word.size()) {
    char32_t cp = 0;
    const std::size_t used = unicode::DecodeUtf8(word, pos, &cp);
    if (used == 0) {
      // Not UTF-8: keep the byte; the lookup will fail and count as OOV.
      out.push_back(word[pos++]);
      continue;
    }
    unicode::AppendUtf8(unicode::ToLower(cp), &out);
    pos += used;
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitWhitespace(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

std::vector<std::string> SplitTabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.emplace_back(Trim(line.substr(start, tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

// Accumulates relations in first-seen order and drops repeats.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(const Vocabulary& vocab) : vocab_(vocab) {}

  Relation& Get(const std::string& name) {
    const auto [it, inserted] = index_.try_emplace(name, data_.relations.size());
    if (inserted) {
      data_.relations.push_back({name, {}, {}});
      seen_.emplace_back();
      score_lines_.push_back(0);
    }
    return data_.relations[it->second];
  }

  void Add(const std::string& name, const std::string& s, const std::string& t,
           const double* score) {
    const auto si = vocab_.Find(Lowercase(s));
    const auto ti = vocab_.Find(Lowercase(t));
    if (!si || !ti) {
      ++data_.skipped_oov;
      return;
    }
    if (*si == *ti) {
      ++data_.skipped_malformed;
      return;
    }
    Relation& rel = Get(name);
    const std::size_t r = index_.at(name);
    if (!seen_[r].insert({*si, *ti}).second) {
      ++data_.skipped_duplicate;
      return;
    }
    rel.pairs.emplace_back(*si, *ti);
    if (score) {
      rel.scores.push_back(*score);
      ++score_lines_[r];
    }
  }

  void Malformed() { ++data_.skipped_malformed; }

  Dataset Finish() {
    for (std::size_t r = 0; r < data_.relations.size(); ++r) {
      const auto& rel = data_.relations[r];
      if (score_lines_[r] != 0 && score_lines_[r] != rel.pairs.size()) {
        throw Error("E_FORMAT", "relation '" + rel.name +
                                    "' mixes scored and unscored pairs");
      }
    }
    std::erase_if(data_.relations,
                  [](const Relation& rel) { return rel.pairs.empty(); });
    return std::move(data_);
  }

 private:
  const Vocabulary& vocab_;
  Dataset data_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::set<WordPair>> seen_;
  std::vector<std::size_t> score_lines_;
};

template <typename Fn>
void RunIndexed(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers = std::clamp<std::size_t>(
      threads < 1 ? 1 : static_cast<std::size_t>(threads), 1,
      std::max<std::size_t>(1, count));
  if (workers == 1) {
    for (std::size_t r = 0; r < count; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < count; r += workers) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

// Features for a batch of pairs, checked for a common length.
class FeatureCache {
 public:
  explicit FeatureCache(const Featurizer& featurizer) : featurizer_(featurizer) {}

  const Eigen::VectorXd& Get(const WordPair& pair) {
    auto it = cache_.find(pair);
    if (it == cache_.end()) {
      Eigen::VectorXd v = featurizer_(pair.first, pair.second);
      if (dim_ < 0) dim_ = v.size();
      if (v.size() != dim_) {
        throw Error("E_DIM", "featurizer returned vectors of different lengths");
      }
      it = cache_.emplace(pair, std::move(v)).first;
    }
    return it->second;
  }

  RowMatrix Matrix(std::span<const WordPair> pairs) {
    RowMatrix x;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      const auto& v = Get(pairs[r]);
      if (r == 0) x.resize(static_cast<Eigen::Index>(pairs.size()), v.size());
      x.row(static_cast<Eigen::Index>(r)) = v.transpose();
    }
    return x;
  }

 private:
  const Featurizer& featurizer_;
  std::map<WordPair, Eigen::VectorXd> cache_;
  Eigen::Index dim_ = -1;
};

RowMatrix SelectRows(const RowMatrix& x, std::span<const std::size_t> rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) =
        x.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

template <typename T>
std::vector<T> Select(std::span<const T> values, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(values[r]);
  return out;
}

void CheckLabels(const RowMatrix& x, std::span<const int> labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error("E_DIM", "feature rows and labels differ in number");
  }
  bool pos = false, neg = false;
  for (int y : labels) {
    if (y == 1) pos = true;
    else if (y == -1) neg = true;
    else throw Error("E_ARG", "labels must be +1 or -1");
  }
  if (!pos || !neg) {
    throw Error("E_ARG", "classifier training needs both classes");
  }
}

double Accuracy(const LinearModel& model, const RowMatrix& x,
                std::span<const int> labels) {
  std::size_t right = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    right += model.Predict(x.row(r).transpose()) == labels[r];
  }
  return static_cast<double>(right) / static_cast<double>(labels.size());
}

std::string Describe(const Error& e) { return e.code() + ": " + e.what(); }

std::string FormatMetric(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

}  // namespace

Dataset ParseAnalogyDataset(std::istream& is, const Vocabulary& vocab) {
  DatasetBuilder builder(vocab);
  std::string current = "default";
  std::string line;
  while (std::getline(is, line)) {
    const auto text = Trim(line);
    if (text.empty()) continue;
    if (text.front() == ':') {
      current = std::string(Trim(text.substr(1)));
      if (current.empty()) throw Error("E_FORMAT", "empty relation name");
      continue;
    }
    const auto words = SplitWhitespace(text);
    if (words.size() == 2) {
      builder.Add(current, words[0], words[1], nullptr);
    } else if (words.size() == 4) {
      builder.Add(current, words[0], words[1], nullptr);
      builder.Add(current, words[2], words[3], nullptr);
    } else {
      builder.Malformed();
    }
  }
  return builder.Finish();
}

Dataset ParseTsvDataset(std::istream& is, const Vocabulary& vocab) {
  DatasetBuilder builder(vocab);
  std::string line;
  while (std::getline(is, line)) {
    if (Trim(line).empty() || artifact::IsCommentLine(line)) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 3 && fields.size() != 4) {
      builder.Malformed();
      continue;
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      builder.Malformed();
      continue;
    }
    if (fields.size() == 4) {
      double score = 0.0;
      try {
        score = artifact::ParseDouble(fields[3], "score");
      } catch (const Error&) {
        builder.Malformed();
        continue;
      }
      builder.Add(fields[0], fields[1], fields[2], &score);
    } else {
      builder.Add(fields[0], fields[1], fields[2], nullptr);
    }
  }
  return builder.Finish();
}

NegativeSet GenerateNegatives(std::span<const WordPair> positives,
                              std::size_t vocab_size, Rng& rng) {
  if (vocab_size < 2) {
    throw Error("E_ARG", "random negatives need at least two vocabulary words");
  }
  NegativeSet out;
  out.flagged = positives.size() < 2;
  const std::set<WordPair> known(positives.begin(), positives.end());
  std::vector<std::size_t> others;
  for (std::size_t p = 0; p < positives.size(); ++p) {
    const auto [s, t] = positives[p];
    out.pairs.emplace_back(t, s);

    others.clear();
    for (std::size_t q = 0; q < positives.size(); ++q) {
      if (q != p && positives[q].second != t && positives[q].second != s) {
        others.push_back(q);
      }
    }
    if (!others.empty()) {
      const std::size_t first = UniformIndex(rng, others.size());
      std::size_t second = first;
      if (others.size() > 1) {
        second = UniformIndex(rng, others.size() - 1);
        if (second >= first) ++second;
      }
      out.pairs.emplace_back(s, positives[others[first]].second);
      out.pairs.emplace_back(s, positives[others[second]].second);
    }

    for (;;) {
      const auto a = static_cast<WordId>(UniformIndex(rng, vocab_size));
      const auto b = static_cast<WordId>(UniformIndex(rng, vocab_size));
      if (a != b && !known.contains({a, b})) {
        out.pairs.emplace_back(a, b);
        break;
      }
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> KFoldSplit(std::size_t count, int k,
                                                 std::uint64_t seed) {
  if (count < 2) throw Error("E_ARG", "cross-validation needs at least 2 pairs");
  if (k < 2) throw Error("E_ARG", "cross-validation needs k >= 2");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  FisherYatesShuffle(order, rng);
  const std::size_t folds = count < 10 ? count : std::min<std::size_t>(k, count);
  std::vector<std::vector<std::size_t>> out(folds);
  const std::size_t base = count / folds, extra = count % folds;
  std::size_t next = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    out[f].assign(order.begin() + next, order.begin() + next + size);
    std::sort(out[f].begin(), out[f].end());
    next += size;
  }
  return out;
}

LinearModel TrainLinearSvm(const RowMatrix& x, std::span<const int> labels,
                           double c, const SvmConfig& config) {
  CheckLabels(x, labels);
  if (!(c > 0.0)) throw Error("E_CONFIG", "SVM C must be > 0");
  const Eigen::Index rows = x.rows();
  const Eigen::Index d = x.cols();
  if (!x.allFinite()) throw Error("E_ARG", "non-finite feature value");

  Eigen::VectorXd diag(rows);
  for (Eigen::Index r = 0; r < rows; ++r) diag[r] = x.row(r).squaredNorm() + 1.0;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);

  LinearModel model;
  model.converged = false;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    FisherYatesShuffle(order, rng);
    for (Eigen::Index r : order) {
      const double y = labels[r];
      const double g = y * (x.row(r).dot(w) + b) - 1.0;
      double pg = g;
      if (alpha[r] <= 0.0) pg = std::min(g, 0.0);
      else if (alpha[r] >= c) pg = std::max(g, 0.0);
      if (pg == 0.0) continue;
      const double updated = std::clamp(alpha[r] - g / diag[r], 0.0, c);
      const double step = (updated - alpha[r]) * y;
      alpha[r] = updated;
      w += step * x.row(r).transpose();
      b += step;
    }

    const double norm_sq = w.squaredNorm() + b * b;
    double hinge = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      hinge += std::max(0.0, 1.0 - labels[r] * (x.row(r).dot(w) + b));
    }
    const double primal = 0.5 * norm_sq + c * hinge;
    const double dual = alpha.sum() - 0.5 * norm_sq;
    if (primal - dual <= config.tolerance * std::max(1.0, primal)) {
      model.converged = true;
      break;
    }
  }
  model.weights = std::move(w);
  model.bias = b;
  return model;
}

LinearModel TrainTunedSvm(const RowMatrix& x, std::span<const int> labels,
                          const SvmConfig& config, double* chosen_c) {
  CheckLabels(x, labels);
  std::vector<std::size_t> pos, neg;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    (labels[r] == 1 ? pos : neg).push_back(r);
  }
  Rng rng(DeriveSeed(config.seed, "eval", {0}));
  FisherYatesShuffle(pos, rng);
  FisherYatesShuffle(neg, rng);
  const std::size_t tune_pos = pos.size() / 4, tune_neg = neg.size() / 4;

  double best_c = 1.0;
  if (tune_pos > 0 && tune_neg > 0) {
    std::vector<std::size_t> fit_rows, tune_rows;
    tune_rows.insert(tune_rows.end(), pos.begin(), pos.begin() + tune_pos);
    tune_rows.insert(tune_rows.end(), neg.begin(), neg.begin() + tune_neg);
    fit_rows.insert(fit_rows.end(), pos.begin() + tune_pos, pos.end());
    fit_rows.insert(fit_rows.end(), neg.begin() + tune_neg, neg.end());
    std::sort(fit_rows.begin(), fit_rows.end());
    std::sort(tune_rows.begin(), tune_rows.end());
    const RowMatrix fit_x = SelectRows(x, fit_rows);
    const RowMatrix tune_x = SelectRows(x, tune_rows);
    const auto fit_y = Select(labels, fit_rows);
    const auto tune_y = Select(labels, tune_rows);
    double best = -1.0;
    for (double c : kSvmCGrid) {
      const auto model = TrainLinearSvm(fit_x, fit_y, c, config);
      const double acc = Accuracy(model, tune_x, tune_y);
      if (acc > best) {
        best = acc;
        best_c = c;
      }
    }
  }
  if (chosen_c) *chosen_c = best_c;
  return TrainLinearSvm(x, labels, best_c, config);
}

std::vector<InductionFold> BuildInductionFolds(const Relation& relation,
                                               std::size_t vocab_size,
                                               std::uint64_t seed) {
  const auto folds =
      KFoldSplit(relation.pairs.size(), 10, DeriveSeed(seed, "eval", {0}));
  std::vector<InductionFold> out;
  out.reserve(folds.size());
  std::vector<bool> in_test(relation.pairs.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_test.begin(), in_test.end(), false);
    for (std::size_t p : folds[f]) in_test[p] = true;
    std::vector<WordPair> train, test;
    for (std::size_t p = 0; p < relation.pairs.size(); ++p) {
      (in_test[p] ? test : train).push_back(relation.pairs[p]);
    }
    InductionFold fold;
    const auto label = [](std::vector<LabeledPair>& dest,
                          std::span<const WordPair> positives,
                          const NegativeSet& negatives) {
      for (const auto& p : positives) dest.push_back({p, 1});
      for (const auto& p : negatives.pairs) dest.push_back({p, -1});
    };
    Rng train_rng(DeriveSeed(seed, "eval", {1, f, 0}));
    Rng test_rng(DeriveSeed(seed, "eval", {1, f, 1}));
    const auto train_neg = GenerateNegatives(train, vocab_size, train_rng);
    const auto test_neg = GenerateNegatives(test, vocab_size, test_rng);
    label(fold.train, train, train_neg);
    label(fold.test, test, test_neg);
    fold.flagged = train_neg.flagged || test_neg.flagged;
    out.push_back(std::move(fold));
  }
  return out;
}

InductionResult EvaluateInduction(const Dataset& dataset,
                                  const Featurizer& featurizer,
                                  const InductionConfig& config) {
  InductionResult result;
  result.relations.resize(dataset.relations.size());
  std::size_t vocab_size = 0;
  for (const auto& rel : dataset.relations) {
    for (const auto& [s, t] : rel.pairs) {
      vocab_size = std::max<std::size_t>(vocab_size, std::max(s, t) + 1);
    }
  }

  RunIndexed(dataset.relations.size(), config.threads, [&](std::size_t r) {
    const Relation& rel = dataset.relations[r];
    BinaryMetrics& m = result.relations[r];
    m.relation = rel.name;
    try {
      const std::uint64_t seed = DeriveSeed(config.seed, "eval", {2, r});
      const auto folds = BuildInductionFolds(rel, config.vocab_size > 0
                                                      ? config.vocab_size
                                                      : vocab_size,
                                             seed);
      FeatureCache cache(featurizer);
      std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& fold = folds[f];
        m.flagged = m.flagged || fold.flagged;
        std::vector<WordPair> pairs;
        std::vector<int> labels;
        for (const auto& lp : fold.train) {
          pairs.push_back(lp.pair);
          labels.push_back(lp.label);
        }
        SvmConfig svm = config.svm;
        svm.seed = DeriveSeed(seed, "eval", {3, f});
        const auto model = TrainTunedSvm(cache.Matrix(pairs), labels, svm);
        for (const auto& lp : fold.test) {
          const int predicted = model.Predict(cache.Get(lp.pair));
          if (lp.label == 1) (predicted == 1 ? tp : fn)++;
          else (predicted == 1 ? fp : tn)++;
        }
      }
      m.examples = tp + fp + tn + fn;
      m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.examples);
      m.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
      m.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
      m.f1 = m.precision + m.recall > 0.0
                 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                 : 0.0;
    } catch (const Error& e) {
      m.error = Describe(e);
    }
  });

  result.macro.relation = "macro";
  std::size_t evaluated = 0;
  for (const auto& m : result.relations) {
    if (!m.error.empty()) continue;
    ++evaluated;
    result.macro.accuracy += m.accuracy;
    result.macro.precision += m.precision;
    result.macro.recall += m.recall;
    result.macro.f1 += m.f1;
    result.macro.examples += m.examples;
    result.macro.flagged = result.macro.flagged || m.flagged;
  }
  if (evaluated == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    result.macro.accuracy = result.macro.precision = nan;
    result.macro.recall = result.macro.f1 = nan;
    result.macro.error = "E_EMPTY: no relation could be evaluated";
  } else {
    const double k = static_cast<double>(evaluated);
    result.macro.accuracy /= k;
    result.macro.precision /= k;
    result.macro.recall /= k;
    result.macro.f1 /= k;
  }
  return result;
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    // Positions start+1 .. end share their mean.
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t p = start; p < end; ++p) ranks[order[p]] = rank;
    start = end;
  }
  return ranks;
}

double Spearman(std::span<const double> predicted, std::span<const double> gold) {
  if (predicted.size() != gold.size()) {
    throw Error("E_DIM", "spearman inputs differ in length");
  }
  if (predicted.size() < 2) throw Error("E_ARG", "spearman needs two values");
  for (double v : predicted) {
    if (std::isnan(v)) throw Error("E_ARG", "spearman input is NaN");
  }
  for (double v : gold) {
    if (std::isnan(v)) throw Error("E_ARG", "spearman input is NaN");
  }
  const auto rx = AverageRanks(predicted);
  const auto ry = AverageRanks(gold);
  const double mean = 0.5 * static_cast<double>(rx.size() + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t a = 0; a < rx.size(); ++a) {
    sxy += (rx[a] - mean) * (ry[a] - mean);
    sxx += (rx[a] - mean) * (rx[a] - mean);
    syy += (ry[a] - mean) * (ry[a] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error("E_UNDEFINED", "spearman of a constant ranking");
  }
  return sxy / std::sqrt(sxx * syy);
}

RankSplit SplitForRanking(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  FisherYatesShuffle(order, rng);
  const std::size_t held = count / 5;
  RankSplit split;
  split.test.assign(order.begin(), order.begin() + held);
  split.tune.assign(order.begin() + held, order.begin() + 2 * held);
  split.train.assign(order.begin() + 2 * held, order.end());
  for (auto* part : {&split.train, &split.tune, &split.test}) {
    std::sort(part->begin(), part->end());
  }
  return split;
}

LinearModel TrainRankRegressor(const RowMatrix& x, std::span<const double> scores,
                               double lambda) {
  if (static_cast<std::size_t>(x.rows()) != scores.size()) {
    throw Error("E_DIM", "feature rows and scores differ in number");
  }
  if (scores.size() < 3) throw Error("E_ARG", "rank regression needs 3 pairs");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) throw Error("E_ARG", "gold scores are constant");

  const Eigen::Map<const Eigen::VectorXd> y(scores.data(),
                                            static_cast<Eigen::Index>(scores.size()));
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const RowMatrix centered = x.rowwise() - x_mean;
  const Eigen::VectorXd rhs = y.array() - y_mean;
  LinearModel model;
  model.weights = SolveRidgeNormalEquations(centered, rhs, lambda);
  model.bias = y_mean - x_mean.dot(model.weights);
  return model;
}

RankingResult EvaluateRanking(const Dataset& dataset,
                              const Featurizer& featurizer,
                              const RankingConfig& config) {
  RankingResult result;
  result.relations.resize(dataset.relations.size());
  RunIndexed(dataset.relations.size(), config.threads, [&](std::size_t r) {
    const Relation& rel = dataset.relations[r];
    RankingMetrics& m = result.relations[r];
    m.relation = rel.name;
    try {
      std::vector<double> gold = rel.scores;
      if (gold.empty()) {
        for (std::size_t p = 0; p < rel.pairs.size(); ++p) {
          gold.push_back(static_cast<double>(rel.pairs.size() - p));
        }
      }
      if (gold.size() != rel.pairs.size()) {
        throw Error("E_DIM", "scores and pairs differ in number");
      }
      const auto split =
          SplitForRanking(rel.pairs.size(), DeriveSeed(config.seed, "eval", {4, r}));
      if (split.train.size() < 3 || split.tune.size() < 2 || split.test.size() < 2) {
        throw Error("E_ARG", "relation has too few pairs for a 60/20/20 split");
      }
      FeatureCache cache(featurizer);
      const auto part = [&](const std::vector<std::size_t>& rows) {
        std::vector<WordPair> pairs;
        for (std::size_t p : rows) pairs.push_back(rel.pairs[p]);
        return std::pair{cache.Matrix(pairs),
                         Select(std::span<const double>(gold), rows)};
      };
      const auto [train_x, train_y] = part(split.train);
      const auto [tune_x, tune_y] = part(split.tune);
      const auto [test_x, test_y] = part(split.test);
      const auto predict = [](const LinearModel& model, const RowMatrix& x) {
        std::vector<double> out;
        for (Eigen::Index row = 0; row < x.rows(); ++row) {
          out.push_back(model.Score(x.row(row).transpose()));
        }
        return out;
      };

      double best = -std::numeric_limits<double>::infinity();
      m.lambda = 1.0;
      for (double lambda : kRidgeLambdaGrid) {
        const auto model = TrainRankRegressor(train_x, train_y, lambda);
        double rho = 0.0;
        try {
          rho = Spearman(predict(model, tune_x), tune_y);
        } catch (const Error&) {
          continue;  // constant predictions or gold on the tuning split
        }
        if (rho > best) {
          best = rho;
          m.lambda = lambda;
        }
      }
      const auto model = TrainRankRegressor(train_x, train_y, m.lambda);
      m.spearman = Spearman(predict(model, test_x), test_y);
    } catch (const Error& e) {
      m.error = Describe(e);
      m.spearman = std::numeric_limits<double>::quiet_NaN();
    }
  });
  std::size_t evaluated = 0;
  for (const auto& m : result.relations) {
    if (!m.error.empty()) continue;
    result.mean_spearman += m.spearman;
    ++evaluated;
  }
  result.mean_spearman = evaluated > 0
                             ? result.mean_spearman / static_cast<double>(evaluated)
                             : std::numeric_limits<double>::quiet_NaN();
  return result;
}

void WriteInductionTsv(std::ostream& os, const InductionResult& result,
                       std::string_view header) {
  artifact::WriteCommentBlock(os, header);
  os << "relation\tacc\tprec\trec\tf1\n";
  const auto row = [&](const BinaryMetrics& m) {
    const bool ok = m.error.empty();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    os << m.relation << '\t' << FormatMetric(ok ? m.accuracy : nan) << '\t'
       << FormatMetric(ok ? m.precision : nan) << '\t'
       << FormatMetric(ok ? m.recall : nan) << '\t'
       << FormatMetric(ok ? m.f1 : nan) << '\n';
  };
  for (const auto& m : result.relations) row(m);
  row(result.macro);
}

void WriteRankingTsv(std::ostream& os, const RankingResult& result,
                     std::string_view header) {
  artifact::WriteCommentBlock(os, header);
  os << "relation\tspearman\n";
  for (const auto& m : result.relations) {
    os << m.relation << '\t' << FormatMetric(m.spearman) << '\n';
  }
  os << "mean\t" << FormatMetric(result.mean_spearman) << '\n';
}

}  // namespace grv
