#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grv/common.h"

namespace grv {

using TokenizedSentence = std::vector<std::string>;

class IngestError : public Error {
 public:
  IngestError(std::size_t byte_offset, const std::string& message)
      : Error("E_INGEST", message), byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

struct PreprocessOptions {
  // Lowercased tokens (without the final period) that do not end a
  // sentence when followed by '.', e.g. "dr" for "Dr.".
  std::vector<std::string> abbreviations = {
      "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc",
      "e.g", "i.e", "inc", "ltd", "co", "no", "fig", "approx", "cf"};
};

// Splits raw UTF-8 text into sentences of lowercase tokens. Pipeline:
// segment -> strip markup -> strip punctuation -> lowercase -> tokenize.
// Throws IngestError with the byte offset of the first malformed sequence.
std::vector<TokenizedSentence> Preprocess(
    std::string_view text, const PreprocessOptions& options = {});

class Vocabulary {
 public:
  Vocabulary() = default;

  // Keeps tokens with frequency >= min_count. Ids are assigned by
  // descending frequency, ties broken lexicographically.
  static Vocabulary Build(std::span<const TokenizedSentence> sentences,
                          std::uint64_t min_count);

  // Entries must already be in id order.
  static Vocabulary FromEntries(
      std::vector<std::pair<std::string, std::uint64_t>> entries);

  std::optional<WordId> Find(std::string_view word) const;
  WordId Require(std::string_view word) const;
  const std::string& Word(WordId id) const { return words_.at(id); }
  std::uint64_t Count(WordId id) const { return counts_.at(id); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // TSV "word<TAB>count", one line per id. Lines starting with "# " that
  // contain no tab are header comments.
  void Save(std::ostream& os, std::string_view header = {}) const;
  static Vocabulary Load(std::istream& is);

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId> index_;
};

// Integer-encoded sentences. Position p (1-based) of sentence s is
// sentences[s][p - 1].
struct SentenceStore {
  std::size_t vocab_size = 0;
  std::vector<std::vector<WordId>> sentences;

  std::size_t size() const { return sentences.size(); }

  void Save(std::ostream& os, std::string_view header = {}) const;
  static SentenceStore Load(std::istream& is, std::size_t vocab_size);
};

// Drops out-of-vocabulary tokens and sentences left empty.
SentenceStore EncodeCorpus(std::span<const TokenizedSentence> sentences,
                           const Vocabulary& vocab);
std::vector<TokenizedSentence> DecodeCorpus(const SentenceStore& store,
                                            const Vocabulary& vocab);

class InvertedIndex {
 public:
  InvertedIndex() = default;

  static InvertedIndex Build(const SentenceStore& store);

  std::span<const std::uint32_t> Postings(WordId word) const;
  // Sorted indices of sentences containing both words.
  std::vector<std::uint32_t> SentencesWithPair(WordId i, WordId k) const;

  std::size_t vocab_size() const { return postings_.size(); }
  std::size_t sentence_count() const { return sentence_count_; }

  // Text header (magic, n, sentence count) followed by per-word
  // varint-delta posting lists.
  void Save(std::ostream& os, std::string_view header = {}) const;
  static InvertedIndex Load(std::istream& is);

 private:
  std::vector<std::vector<std::uint32_t>> postings_;
  std::size_t sentence_count_ = 0;
};

}  // namespace grv
