#include "grv/relvec.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "grv/artifact.h"
#include "grv/measures.h"
#include "grv/random.h"
#include "grv/ridge.h"

namespace grv {
namespace {

constexpr Slot kBlockSlots[] = {Slot::kBetween, Slot::kBefore, Slot::kAfter};

void CheckPair(const EmbeddingModel& model, WordId i, WordId k) {
  if (i == k) throw Error("E_ARG", "relation pair needs two distinct words");
  if (i >= model.vocab_size() || k >= model.vocab_size()) {
    throw Error("E_RANGE", "word id outside model");
  }
}

void CheckConfig(const RelationInputs& inputs, const RelvecConfig& config) {
  ValidateMeasure(config.measure);
  if (!(config.alpha > 0.0)) {
    throw Error("E_CONFIG", "relation vectors need smoothing alpha > 0");
  }
  if (config.lambda < 0.0) throw Error("E_CONFIG", "ridge lambda must be >= 0");
  if (inputs.stats.window != config.window ||
      inputs.stats.weighted != config.weighted) {
    throw Error("E_CONFIG",
                "triple statistics were counted with another window or "
                "weighting than requested");
  }
  if (inputs.stats.n != inputs.model.vocab_size() ||
      inputs.store.vocab_size != inputs.model.vocab_size()) {
    throw Error("E_DIM", "model, corpus and statistics disagree on vocabulary");
  }
}

}  // namespace

RelationContextSet BuildRelationContextSet(const TripleSlice& slice,
                                           const TripleStats& stats,
                                           const RelvecConfig& config) {
  ValidateMeasure(config.measure);
  RelationContextSet set;
  set.i = slice.i;
  set.k = slice.k;
  set.slot = slice.slot;

  std::vector<WordId> positives;
  positives.reserve(slice.counts.size());
  for (const auto& [j, y] : slice.counts) {
    if (y > 0.0) positives.push_back(j);
  }
  set.positives = positives.size();
  const std::size_t zeros = stats.n - positives.size();
  const std::size_t want = std::min(2 * positives.size(), zeros);
  Rng rng(DeriveSeed(config.seed, "relvec",
                     {slice.i, slice.k, static_cast<std::uint64_t>(slice.slot)}));
  const auto negatives = SampleExcluding(
      positives, static_cast<std::uint32_t>(stats.n), want, rng);

  set.contexts = positives;
  set.contexts.insert(set.contexts.end(), negatives.begin(), negatives.end());
  std::sort(set.contexts.begin(), set.contexts.end());
  const SlotMarginals& m = stats.slot(slice.slot);
  set.targets.reserve(set.contexts.size());
  for (WordId j : set.contexts) {
    set.targets.push_back(Si(config.measure, m, stats.n, slice.Get(j), slice.i,
                             j, slice.k, config.alpha));
  }
  return set;
}

RelationFit FitRelationVector(const EmbeddingModel& model,
                              const RelationContextSet& set, double lambda) {
  RelationFit fit;
  if (set.contexts.empty()) {
    fit.vector = Eigen::VectorXd::Zero(model.dim());
    fit.empty = true;
    return fit;
  }
  const auto rows = static_cast<Eigen::Index>(set.contexts.size());
  RowMatrix design(rows, model.dim());
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const WordId j = set.contexts[static_cast<std::size_t>(t)];
    if (j >= model.vocab_size()) {
      throw Error("E_RANGE", "context id outside model");
    }
    design.row(t) = model.context.row(j);
    rhs[t] = set.targets[static_cast<std::size_t>(t)] - model.context_bias[j];
  }
  fit.vector = SolveRidgeNormalEquations(design, rhs, lambda);
  return fit;
}

RelationRepresentation ComputeRelationRepresentation(
    const RelationInputs& inputs, WordId i, WordId k,
    const RelvecConfig& config) {
  CheckPair(inputs.model, i, k);
  CheckConfig(inputs, config);
  const int d = inputs.model.dim();
  const int slots = config.between_only ? 1 : 3;

  RelationRepresentation rep;
  rep.i = i;
  rep.k = k;
  rep.measure = config.measure;
  rep.values.resize((2 * slots + 2) * d);
  Eigen::Index offset = 0;
  for (int s = 0; s < slots; ++s) {
    for (const auto& [first, second] : {std::pair{i, k}, std::pair{k, i}}) {
      const auto slice =
          ExtractTripleSlice(inputs.store, inputs.index, first, second,
                             kBlockSlots[s], config.window, config.weighted);
      const auto set = BuildRelationContextSet(slice, inputs.stats, config);
      const auto fit = FitRelationVector(inputs.model, set, config.lambda);
      rep.values.segment(offset, d) = fit.vector;
      rep.empty_blocks.push_back(fit.empty);
      offset += d;
    }
  }
  rep.values.segment(offset, d) = inputs.model.target.row(i).transpose();
  rep.values.segment(offset + d, d) = inputs.model.target.row(k).transpose();
  return rep;
}

std::vector<RelationRepresentation> ComputeRelationRepresentations(
    const RelationInputs& inputs,
    std::span<const std::pair<WordId, WordId>> pairs,
    const RelvecConfig& config, int threads) {
  std::vector<RelationRepresentation> out(pairs.size());
  const std::size_t workers =
      std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1,
                              std::max<std::size_t>(1, pairs.size()));
  if (workers == 1) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      out[p] = ComputeRelationRepresentation(inputs, pairs[p].first,
                                             pairs[p].second, config);
    }
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t p = w; p < pairs.size(); p += workers) {
          out[p] = ComputeRelationRepresentation(inputs, pairs[p].first,
                                                 pairs[p].second, config);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Eigen::VectorXd BaselineDiff(const EmbeddingModel& model, WordId i, WordId k) {
  if (i >= model.vocab_size() || k >= model.vocab_size()) {
    throw Error("E_RANGE", "word id outside model");
  }
  return (model.target.row(k) - model.target.row(i)).transpose();
}

Eigen::VectorXd BaselineConc(const EmbeddingModel& model, WordId i, WordId k) {
  if (i >= model.vocab_size() || k >= model.vocab_size()) {
    throw Error("E_RANGE", "word id outside model");
  }
  Eigen::VectorXd out(2 * model.dim());
  out << model.target.row(i).transpose(), model.target.row(k).transpose();
  return out;
}

Eigen::VectorXd BaselineAvg(const EmbeddingModel& model,
                            const SentenceStore& store,
                            const InvertedIndex& index, WordId i, WordId k,
                            int window, bool between_only) {
  CheckPair(model, i, k);
  const int d = model.dim();
  const int slots = between_only ? 1 : 3;
  Eigen::VectorXd out = Eigen::VectorXd::Zero((2 * slots + 2) * d);
  Eigen::Index offset = 0;
  for (int s = 0; s < slots; ++s) {
    const Slot slot = kBlockSlots[s];
    for (const auto& [first, second] : {std::pair{i, k}, std::pair{k, i}}) {
      Eigen::VectorXd across = Eigen::VectorXd::Zero(d);
      int sentences = 0;
      for (std::uint32_t sid : index.SentencesWithPair(first, second)) {
        const auto& words = store.sentences[sid];
        const int len = static_cast<int>(words.size());
        Eigen::VectorXd within = Eigen::VectorXd::Zero(d);
        int hits = 0;
        const auto add = [&](int q) {
          within += model.target.row(words[q - 1]).transpose();
          ++hits;
        };
        for (int p = 1; p <= len; ++p) {
          if (words[p - 1] != first) continue;
          for (int r = p + 1; r <= std::min(len, p + window); ++r) {
            if (words[r - 1] != second) continue;
            switch (slot) {
              case Slot::kBetween:
                for (int q = p + 1; q < r; ++q) add(q);
                break;
              case Slot::kBefore:
                for (int q = std::max(1, p - window); q < p; ++q) add(q);
                break;
              case Slot::kAfter:
                for (int q = r + 1; q <= std::min(len, r + window); ++q) add(q);
                break;
            }
          }
        }
        if (hits == 0) continue;
        across += within / hits;
        ++sentences;
      }
      if (sentences > 0) out.segment(offset, d) = across / sentences;
      offset += d;
    }
  }
  out.segment(offset, d) = model.target.row(i).transpose();
  out.segment(offset + d, d) = model.target.row(k).transpose();
  return out;
}

void WriteRelationVectors(std::ostream& os,
                          std::span<const RelationRepresentation> reps,
                          const Vocabulary& vocab, std::string_view header) {
  artifact::WriteCommentBlock(os, header);
  for (const auto& rep : reps) {
    os << vocab.Word(rep.i) << '\t' << vocab.Word(rep.k) << '\t'
       << rep.measure << '\t';
    for (Eigen::Index a = 0; a < rep.values.size(); ++a) {
      if (a > 0) os << ' ';
      os << artifact::FormatDouble(rep.values[a]);
    }
    os << '\n';
  }
}

std::vector<RelationVectorRow> ReadRelationVectors(std::istream& is) {
  std::vector<RelationVectorRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || artifact::IsCommentLine(line)) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) {
      throw Error("E_FORMAT", "relation vector line " + std::to_string(line_no) +
                                  ": expected 4 tab-separated fields");
    }
    RelationVectorRow row;
    row.word_i = fields[0];
    row.word_k = fields[1];
    row.measure = static_cast<int>(artifact::ParseUnsigned(fields[2], "measure"));
    std::istringstream values(fields[3]);
    std::string token;
    while (values >> token) {
      row.values.push_back(artifact::ParseDouble(token, "vector value"));
    }
    if (!rows.empty() && rows.front().values.size() != row.values.size()) {
      throw Error("E_FORMAT", "relation vector line " + std::to_string(line_no) +
                                  ": dimension differs from the first line");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace grv
