#include "grv/cli.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <type_traits>

#include <CLI11.hpp>

#include "grv/artifact.h"
#include "grv/cooccur.h"
#include "grv/corpus.h"
#include "grv/eval.h"
#include "grv/measures.h"
#include "grv/relvec.h"
#include "grv/selfcheck.h"
#include "grv/trainer.h"

namespace grv {
namespace {

struct Settings {
  std::string config;
  std::string dir = ".";
  std::string input, vocab, corpus, index, pairs, triples, model;
  std::string pair_list, dataset, output, tsv;
  std::string format = "auto";
  std::string featurizer = "r2";
  std::string first, second;
  std::string slot = "between";
  std::uint64_t min_count = 10;
  std::uint64_t seed = 1;
  int window = 10;
  int dim = 300;
  int epochs = 50;
  int measure = 2;
  int dump_measure = 0;
  int threads = 1;
  double alpha = 1e-5;
  double lambda = 1e-6;
  double learning_rate = 0.05;
  bool weighted = true;
  bool between_only = false;
  bool all_contexts = false;
};

std::string Text(const std::string& v) { return v; }
std::string Text(bool v) { return v ? "true" : "false"; }
std::string Text(int v) { return std::to_string(v); }
std::string Text(std::uint64_t v) { return std::to_string(v); }
std::string Text(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// One subcommand with its options in registration order, so the effective
// configuration can be echoed into artifact headers.
class Stage {
 public:
  Stage(CLI::App& app, const std::string& name, const std::string& help)
      : name_(name), sub_(app.add_subcommand(name, help)) {}

  template <typename T>
  void Add(const std::string& key, T* target, const std::string& help) {
    if constexpr (std::is_same_v<T, bool>) {
      sub_->add_flag("--" + key, *target, help);
    } else {
      sub_->add_option("--" + key, *target, help);
    }
    keys_.emplace_back(key, [target] { return Text(*target); });
  }

  const std::string& name() const { return name_; }
  CLI::App* sub() const { return sub_; }
  bool Has(const std::string& key) const {
    return sub_->get_option_no_throw("--" + key) != nullptr;
  }
  bool Given(const std::string& key) const {
    const auto* opt = sub_->get_option_no_throw("--" + key);
    return opt && opt->count() > 0;
  }

  std::string Echo() const {
    std::string out = "grv " + name_;
    for (const auto& [key, value] : keys_) out += " " + key + "=" + value();
    return out;
  }

 private:
  std::string name_;
  CLI::App* sub_;
  std::vector<std::pair<std::string, std::function<std::string()>>> keys_;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("E_IO", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("E_IO", "cannot open " + path);
  return in;
}

void WriteFile(const std::string& path,
               const std::function<void(std::ostream&)>& write) {
  std::ostringstream buf;
  write(buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("E_IO", "cannot write " + path);
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("E_IO", "write failed for " + path);
}

// Flat "key=value" lines; '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::string& path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
    };
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("E_CONFIG", path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

void ApplyConfigFile(const Stage& stage, const std::vector<Stage>& all,
                     const std::string& path) {
  for (const auto& [key, value] : ReadConfigFile(path)) {
    if (key == "config") throw Error("E_CONFIG", "config files cannot nest");
    auto* opt = stage.sub()->get_option_no_throw("--" + key);
    if (!opt) {
      const bool known = std::any_of(all.begin(), all.end(),
                                     [&](const Stage& s) { return s.Has(key); });
      if (!known) throw Error("E_CONFIG", "unknown config key '" + key + "'");
      continue;  // belongs to another stage
    }
    if (opt->count() > 0) continue;  // the command line wins
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error("E_CONFIG", "config key '" + key + "': " + e.what());
    }
  }
}

void DefaultPath(std::string& path, const std::string& dir, const char* name) {
  if (path.empty()) path = (std::filesystem::path(dir) / name).string();
}

void Require(bool ok, const std::string& message) {
  if (!ok) throw Error("E_CONFIG", message);
}

Vocabulary LoadVocab(const Settings& s) {
  auto in = OpenIn(s.vocab);
  return Vocabulary::Load(in);
}

SentenceStore LoadCorpus(const Settings& s, const Vocabulary& vocab) {
  auto in = OpenIn(s.corpus);
  return SentenceStore::Load(in, vocab.size());
}

InvertedIndex LoadIndex(const Settings& s, const Vocabulary& vocab) {
  auto in = OpenIn(s.index);
  auto index = InvertedIndex::Load(in);
  if (index.vocab_size() != vocab.size()) {
    throw Error("E_DIM", "index and vocabulary sizes differ");
  }
  return index;
}

TripleStats LoadTriples(const Settings& s, const Vocabulary& vocab) {
  auto in = OpenIn(s.triples);
  auto stats = TripleStats::Load(in);
  if (stats.n != vocab.size()) {
    throw Error("E_DIM", "triple statistics and vocabulary sizes differ");
  }
  return stats;
}

EmbeddingModel LoadModel(const Settings& s, const Vocabulary& vocab) {
  auto in = OpenIn(s.model);
  std::vector<std::string> words;
  auto model = EmbeddingModel::Load(in, &words);
  if (words != vocab.words()) {
    throw Error("E_DIM", "model words do not match the vocabulary");
  }
  return model;
}

// ---- stages ----

void RunPreprocess(const Settings& s, const std::string& header, std::ostream& out) {
  Require(!s.input.empty(), "preprocess needs --input");
  Require(s.min_count >= 1, "min-count must be >= 1");
  const auto sentences = Preprocess(ReadFile(s.input));
  const auto vocab = Vocabulary::Build(sentences, s.min_count);
  const auto store = EncodeCorpus(sentences, vocab);
  const auto index = InvertedIndex::Build(store);
  WriteFile(s.vocab, [&](std::ostream& os) { vocab.Save(os, header); });
  WriteFile(s.corpus, [&](std::ostream& os) { store.Save(os, header); });
  WriteFile(s.index, [&](std::ostream& os) { index.Save(os, header); });
  out << "preprocess: " << sentences.size() << " sentences read, "
      << store.size() << " kept, vocabulary " << vocab.size() << '\n';
}

void RunCountPairs(const Settings& s, const std::string& header, std::ostream& out) {
  Require(s.window >= 1, "window must be >= 1");
  const auto vocab = LoadVocab(s);
  const auto store = LoadCorpus(s, vocab);
  const auto stats = CountPairs(store, {.window = s.window, .threads = s.threads});
  WriteFile(s.pairs, [&](std::ostream& os) { stats.Save(os, header); });
  if (!s.tsv.empty()) {
    WriteFile(s.tsv, [&](std::ostream& os) { stats.SaveTsv(os, vocab, header); });
  }
  out << "count-pairs: " << stats.x.nnz() << " nonzero entries, total "
      << Text(stats.total) << '\n';
}

void RunCountTriples(const Settings& s, const std::string& header, std::ostream& out) {
  Require(s.window >= 1, "window must be >= 1");
  const auto vocab = LoadVocab(s);
  const auto store = LoadCorpus(s, vocab);
  const auto stats = CountTripleMarginals(
      store, {.window = s.window, .weighted = s.weighted, .threads = s.threads});
  WriteFile(s.triples, [&](std::ostream& os) { stats.Save(os, header); });
  out << "count-triples:";
  for (Slot slot : kAllSlots) {
    out << ' ' << SlotName(slot) << '=' << Text(stats.slot(slot).total);
  }
  out << '\n';
}

void RunTrain(const Settings& s, const std::string& header, std::ostream& out) {
  Require(s.dim >= 1, "dim must be >= 1");
  Require(s.epochs >= 1, "epochs must be >= 1");
  Require(s.alpha > 0.0, "alpha must be > 0");
  Require(s.learning_rate > 0.0, "learning-rate must be > 0");
  const auto vocab = LoadVocab(s);
  auto in = OpenIn(s.pairs);
  const auto pairs = PairStats::Load(in);
  if (pairs.n != vocab.size()) {
    throw Error("E_DIM", "pair statistics and vocabulary sizes differ");
  }
  TrainerConfig config;
  config.dim = s.dim;
  config.window = pairs.window;
  config.alpha = s.alpha;
  config.epochs = s.epochs;
  config.seed = s.seed;
  config.learning_rate = s.learning_rate;
  config.threads = s.threads;
  TrainingLog log;
  const auto model = Train(pairs, BuildContextSets(pairs, s.seed), config, &log);
  WriteFile(s.model, [&](std::ostream& os) { model.Save(os, vocab.words(), header); });
  for (std::size_t e = 0; e < log.epoch_objective.size(); ++e) {
    out << "epoch " << e + 1 << " objective " << Text(log.epoch_objective[e]) << '\n';
  }
}

// Window and weighting follow the triple statistics unless set explicitly;
// explicit values that disagree are rejected by the relation module.
void AdoptTripleSettings(const Stage& stage, Settings& s, const TripleStats& stats) {
  if (!stage.Given("window")) s.window = stats.window;
  if (!stage.Given("weighted")) s.weighted = stats.weighted;
}

RelvecConfig MakeRelvecConfig(const Settings& s, int measure) {
  RelvecConfig config;
  config.measure = measure;
  config.alpha = s.alpha;
  config.lambda = s.lambda;
  config.window = s.window;
  config.weighted = s.weighted;
  config.between_only = s.between_only;
  config.seed = s.seed;
  return config;
}

std::vector<std::pair<WordId, WordId>> ReadPairList(const std::string& path,
                                                    const Vocabulary& vocab) {
  std::istringstream in(ReadFile(path));
  std::vector<std::pair<WordId, WordId>> pairs;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream words(line);
    std::string a, b, extra;
    if (!(words >> a) || a.front() == '#') continue;
    const std::string where = path + ":" + std::to_string(line_no);
    if (!(words >> b) || (words >> extra)) {
      throw Error("E_FORMAT", where + ": expected two words");
    }
    const auto i = vocab.Find(a), k = vocab.Find(b);
    if (!i) throw Error("E_OOV", where + ": '" + a + "' not in vocabulary");
    if (!k) throw Error("E_OOV", where + ": '" + b + "' not in vocabulary");
    if (*i == *k) throw Error("E_ARG", where + ": pair repeats one word");
    pairs.emplace_back(*i, *k);
  }
  return pairs;
}

// Loaded once per evaluation run and shared by the featurizer.
struct FeatureInputs {
  Vocabulary vocab;
  EmbeddingModel model;
  std::optional<SentenceStore> store;
  std::optional<InvertedIndex> index;
  std::optional<TripleStats> stats;
};

int FeaturizerMeasure(const std::string& name) {
  if (name.size() == 2 && name[0] == 'r' && name[1] >= '1' && name[1] <= '4') {
    return name[1] - '0';
  }
  return 0;
}

Featurizer MakeFeaturizer(Stage& stage, Settings& s, FeatureInputs& in) {
  const std::string& name = s.featurizer;
  if (name == "diff") {
    return [&in](WordId i, WordId k) { return BaselineDiff(in.model, i, k); };
  }
  if (name == "conc") {
    return [&in](WordId i, WordId k) { return BaselineConc(in.model, i, k); };
  }
  if (name == "avg") {
    in.store = LoadCorpus(s, in.vocab);
    in.index = LoadIndex(s, in.vocab);
    if (!stage.Given("window")) s.window = in.model.config.window;
    const int window = s.window;
    const bool between_only = s.between_only;
    return [&in, window, between_only](WordId i, WordId k) {
      return BaselineAvg(in.model, *in.store, *in.index, i, k, window, between_only);
    };
  }
  const int measure = FeaturizerMeasure(name);
  if (measure == 0) {
    throw Error("E_CONFIG", "featurizer must be diff, conc, avg or r1..r4");
  }
  in.store = LoadCorpus(s, in.vocab);
  in.index = LoadIndex(s, in.vocab);
  in.stats = LoadTriples(s, in.vocab);
  AdoptTripleSettings(stage, s, *in.stats);
  const RelvecConfig config = MakeRelvecConfig(s, measure);
  return [&in, config](WordId i, WordId k) {
    const RelationInputs inputs{in.model, *in.store, *in.index, *in.stats};
    return ComputeRelationRepresentation(inputs, i, k, config).values;
  };
}

Dataset LoadDataset(const Settings& s, const Vocabulary& vocab, std::ostream& out) {
  Require(!s.dataset.empty(), "evaluation needs --dataset");
  const std::string text = ReadFile(s.dataset);
  std::string format = s.format;
  if (format == "auto") {
    format = "tsv";
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const auto a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos || line[a] == '#') continue;
      if (line[a] == ':') format = "analogy";
      break;
    }
  }
  std::istringstream in(text);
  Dataset data;
  if (format == "analogy") data = ParseAnalogyDataset(in, vocab);
  else if (format == "tsv") data = ParseTsvDataset(in, vocab);
  else throw Error("E_CONFIG", "format must be auto, analogy or tsv");
  std::size_t pairs = 0;
  for (const auto& rel : data.relations) pairs += rel.pairs.size();
  out << "dataset: " << data.relations.size() << " relations, " << pairs
      << " pairs; skipped oov=" << data.skipped_oov
      << " duplicate=" << data.skipped_duplicate
      << " malformed=" << data.skipped_malformed << '\n';
  return data;
}

void RunRelvec(Stage& stage, Settings& s, std::ostream& out) {
  Require(!s.pair_list.empty(), "relvec needs --pair-list");
  FeatureInputs in;
  in.vocab = LoadVocab(s);
  in.model = LoadModel(s, in.vocab);
  in.store = LoadCorpus(s, in.vocab);
  in.index = LoadIndex(s, in.vocab);
  in.stats = LoadTriples(s, in.vocab);
  AdoptTripleSettings(stage, s, *in.stats);
  const auto pairs = ReadPairList(s.pair_list, in.vocab);
  const RelationInputs inputs{in.model, *in.store, *in.index, *in.stats};
  const auto reps = ComputeRelationRepresentations(
      inputs, pairs, MakeRelvecConfig(s, s.measure), s.threads);
  const std::string header = stage.Echo();
  WriteFile(s.output, [&](std::ostream& os) {
    WriteRelationVectors(os, reps, in.vocab, header);
  });
  std::size_t empty = 0;
  for (const auto& rep : reps) {
    empty += static_cast<std::size_t>(
        std::count(rep.empty_blocks.begin(), rep.empty_blocks.end(), true));
  }
  out << "relvec: " << reps.size() << " pairs, " << empty << " empty blocks\n";
}

void RunEvalInduction(Stage& stage, Settings& s, std::ostream& out) {
  FeatureInputs in;
  in.vocab = LoadVocab(s);
  in.model = LoadModel(s, in.vocab);
  const auto data = LoadDataset(s, in.vocab, out);
  const auto featurizer = MakeFeaturizer(stage, s, in);
  InductionConfig config;
  config.seed = s.seed;
  config.threads = s.threads;
  config.vocab_size = in.vocab.size();
  const auto result = EvaluateInduction(data, featurizer, config);
  const std::string header = stage.Echo();
  WriteFile(s.output, [&](std::ostream& os) { WriteInductionTsv(os, result, header); });
  for (const auto& m : result.relations) {
    if (!m.error.empty()) out << "skipped " << m.relation << ": " << m.error << '\n';
  }
  out << "eval-induction: macro accuracy " << Text(result.macro.accuracy) << " f1 "
      << Text(result.macro.f1) << '\n';
}

void RunEvalRanking(Stage& stage, Settings& s, std::ostream& out) {
  FeatureInputs in;
  in.vocab = LoadVocab(s);
  in.model = LoadModel(s, in.vocab);
  const auto data = LoadDataset(s, in.vocab, out);
  const auto featurizer = MakeFeaturizer(stage, s, in);
  RankingConfig config;
  config.seed = s.seed;
  config.threads = s.threads;
  const auto result = EvaluateRanking(data, featurizer, config);
  const std::string header = stage.Echo();
  WriteFile(s.output, [&](std::ostream& os) { WriteRankingTsv(os, result, header); });
  for (const auto& m : result.relations) {
    if (!m.error.empty()) out << "skipped " << m.relation << ": " << m.error << '\n';
  }
  out << "eval-ranking: mean spearman " << Text(result.mean_spearman) << '\n';
}

void RunMeasuresDump(Stage& stage, Settings& s, std::ostream& out) {
  Require(!s.first.empty() && !s.second.empty(),
          "measures-dump needs --first and --second");
  Require(s.alpha > 0.0, "alpha must be > 0");
  Require(s.dump_measure >= 0 && s.dump_measure <= 4,
          "measure must be 0 (all) or 1..4");
  const auto vocab = LoadVocab(s);
  const auto store = LoadCorpus(s, vocab);
  const auto index = LoadIndex(s, vocab);
  const auto stats = LoadTriples(s, vocab);
  const Slot slot = ParseSlot(s.slot);
  const WordId i = vocab.Require(s.first);
  const WordId k = vocab.Require(s.second);
  if (i == k) throw Error("E_ARG", "measures-dump needs two distinct words");
  const auto slice =
      ExtractTripleSlice(store, index, i, k, slot, stats.window, stats.weighted);
  std::vector<WordId> contexts;
  if (s.all_contexts) {
    for (WordId j = 0; j < vocab.size(); ++j) contexts.push_back(j);
  } else {
    for (const auto& [j, y] : slice.counts) contexts.push_back(j);
  }
  const std::string header = stage.Echo();
  const auto write = [&](std::ostream& os) {
    artifact::WriteCommentBlock(os, header);
    for (WordId j : contexts) {
      for (int m = 1; m <= 4; ++m) {
        if (s.dump_measure != 0 && m != s.dump_measure) continue;
        os << vocab.Word(i) << '\t' << vocab.Word(j) << '\t' << vocab.Word(k) << '\t'
           << m << '\t'
           << artifact::FormatDouble(
                  Si(m, stats.slot(slot), stats.n, slice.Get(j), i, j, k, s.alpha))
           << '\n';
      }
    }
  };
  if (s.output.empty()) write(out);
  else WriteFile(s.output, write);
}

bool RunSelfcheckStage(const Settings& s, std::ostream& out) {
  bool ok = true;
  for (const auto& item : RunSelfcheck(s.seed)) {
    out << "selfcheck " << item.name << ' ' << (item.passed ? "PASS" : "FAIL") << ' '
        << item.detail << '\n';
    ok = ok && item.passed;
  }
  return ok;
}

std::string OneLine(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  Settings s;
  CLI::App app{"Relation vectors from global triple statistics", "grv"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::vector<Stage> stages;
  stages.reserve(9);
  const auto stage = [&](const char* name, const char* help) -> Stage& {
    Stage& st = stages.emplace_back(app, name, help);
    st.sub()->add_option("--config", s.config, "Flat key=value config file");
    return st;
  };
  const auto io = [&](Stage& st, std::initializer_list<const char*> keys) {
    st.Add("dir", &s.dir, "Directory for artifacts without an explicit path");
    for (std::string key : keys) {
      if (key == "input") st.Add(key, &s.input, "Raw UTF-8 text");
      else if (key == "vocab") st.Add(key, &s.vocab, "Vocabulary TSV (dir/vocab.tsv)");
      else if (key == "corpus") st.Add(key, &s.corpus, "Encoded corpus (dir/corpus.enc)");
      else if (key == "index") st.Add(key, &s.index, "Inverted index (dir/index.bin)");
      else if (key == "pairs") st.Add(key, &s.pairs, "Pair counts (dir/pairs.bin)");
      else if (key == "triples") st.Add(key, &s.triples, "Triple marginals (dir/triples.bin)");
      else if (key == "model") st.Add(key, &s.model, "Embedding model (dir/model.txt)");
    }
  };

  Stage& pre = stage("preprocess", "Segment, tokenize and encode raw text");
  io(pre, {"input", "vocab", "corpus", "index"});
  pre.Add("min-count", &s.min_count, "Minimum token frequency");

  Stage& cp = stage("count-pairs", "Distance-weighted pair counts");
  io(cp, {"vocab", "corpus", "pairs"});
  cp.Add("window", &s.window, "Context window W");
  cp.Add("tsv", &s.tsv, "Optional TSV export of the counts");
  cp.Add("threads", &s.threads, "Worker threads (1 = deterministic)");

  Stage& ct = stage("count-triples", "Ordered triple marginals for all slots");
  io(ct, {"vocab", "corpus", "triples"});
  ct.Add("window", &s.window, "Context window W");
  ct.Add("weighted", &s.weighted, "Distance-weight triples");
  ct.Add("threads", &s.threads, "Worker threads (1 = deterministic)");

  Stage& tr = stage("train", "Fit word vectors to smoothed PMI");
  io(tr, {"vocab", "pairs", "model"});
  tr.Add("dim", &s.dim, "Vector dimensions");
  tr.Add("epochs", &s.epochs, "Training epochs");
  tr.Add("alpha", &s.alpha, "Smoothing pseudo-count");
  tr.Add("learning-rate", &s.learning_rate, "AdaGrad step size");
  tr.Add("seed", &s.seed, "Random seed");
  tr.Add("threads", &s.threads, "Worker threads (1 = deterministic)");

  const auto relation_options = [&](Stage& st) {
    st.Add("alpha", &s.alpha, "Smoothing pseudo-count for SI");
    st.Add("lambda", &s.lambda, "Ridge penalty for relation vectors");
    st.Add("window", &s.window, "Window (defaults to the triple statistics)");
    st.Add("weighted", &s.weighted, "Weighting (defaults to the triple statistics)");
    st.Add("between-only", &s.between_only, "Use only the between slot");
    st.Add("seed", &s.seed, "Random seed");
    st.Add("threads", &s.threads, "Worker threads");
  };

  Stage& rv = stage("relvec", "Relation vectors for listed word pairs");
  io(rv, {"vocab", "corpus", "index", "triples", "model"});
  rv.Add("pair-list", &s.pair_list, "File with one 'word word' pair per line");
  rv.Add("output", &s.output, "Output TSV (dir/relvecs.tsv)");
  rv.Add("measure", &s.measure, "SI measure 1..4");
  relation_options(rv);

  const auto eval_options = [&](Stage& st) {
    io(st, {"vocab", "corpus", "index", "triples", "model"});
    st.Add("dataset", &s.dataset, "Dataset file");
    st.Add("format", &s.format, "auto, analogy or tsv");
    st.Add("featurizer", &s.featurizer, "diff, conc, avg, r1, r2, r3 or r4");
    st.Add("output", &s.output, "Metrics TSV");
    relation_options(st);
  };
  Stage& ei = stage("eval-induction", "Relation induction by per-relation SVMs");
  eval_options(ei);
  Stage& er = stage("eval-ranking", "Prototypicality ranking by ridge regression");
  eval_options(er);

  Stage& md = stage("measures-dump", "SI values for one ordered pair as TSV");
  io(md, {"vocab", "corpus", "index", "triples"});
  md.Add("first", &s.first, "First word of the pair");
  md.Add("second", &s.second, "Second word of the pair");
  md.Add("slot", &s.slot, "between, before or after");
  md.Add("measure", &s.dump_measure, "1..4, or 0 for all");
  md.Add("alpha", &s.alpha, "Smoothing pseudo-count");
  md.Add("all-contexts", &s.all_contexts, "Every context word, not only observed ones");
  md.Add("output", &s.output, "Output TSV (stdout when empty)");

  Stage& sc = stage("selfcheck", "Brute-force oracle checks on built-in corpora");
  sc.Add("seed", &s.seed, "Random seed");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error E_ARG: " << OneLine(e.what()) << '\n';
    return 2;
  }

  Stage* active = nullptr;
  for (auto& st : stages) {
    if (st.sub()->parsed()) active = &st;
  }
  if (!active) {
    err << "error E_ARG: no subcommand\n";
    return 2;
  }

  try {
    if (!s.config.empty()) ApplyConfigFile(*active, stages, s.config);
    Require(s.threads >= 1, "threads must be >= 1");
    const std::string& name = active->name();
    if (active->Has("vocab")) DefaultPath(s.vocab, s.dir, "vocab.tsv");
    if (active->Has("corpus")) DefaultPath(s.corpus, s.dir, "corpus.enc");
    if (active->Has("index")) DefaultPath(s.index, s.dir, "index.bin");
    if (active->Has("pairs")) DefaultPath(s.pairs, s.dir, "pairs.bin");
    if (active->Has("triples")) DefaultPath(s.triples, s.dir, "triples.bin");
    if (active->Has("model")) DefaultPath(s.model, s.dir, "model.txt");
    if (name == "relvec") DefaultPath(s.output, s.dir, "relvecs.tsv");
    if (name == "eval-induction") {
      DefaultPath(s.output, s.dir, ("induction-" + s.featurizer + ".tsv").c_str());
    }
    if (name == "eval-ranking") {
      DefaultPath(s.output, s.dir, ("ranking-" + s.featurizer + ".tsv").c_str());
    }

    if (name == "preprocess") RunPreprocess(s, active->Echo(), out);
    else if (name == "count-pairs") RunCountPairs(s, active->Echo(), out);
    else if (name == "count-triples") RunCountTriples(s, active->Echo(), out);
    else if (name == "train") RunTrain(s, active->Echo(), out);
    else if (name == "relvec") RunRelvec(*active, s, out);
    else if (name == "eval-induction") RunEvalInduction(*active, s, out);
    else if (name == "eval-ranking") RunEvalRanking(*active, s, out);
    else if (name == "measures-dump") RunMeasuresDump(*active, s, out);
    else if (name == "selfcheck" && !RunSelfcheckStage(s, out)) {
      err << "error E_SELFCHECK: at least one check failed\n";
      return 1;
    }
  } catch (const Error& e) {
    err << "error " << e.code() << ": " << OneLine(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error E_INTERNAL: " << OneLine(e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace grv
