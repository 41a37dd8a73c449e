#include "grv/corpus.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "grv/artifact.h"
#include "grv/unicode.h"

namespace grv {
namespace {

constexpr std::string_view kIndexMagic = "GRV-INDEX 1";

bool IsTerminator(char32_t cp) { return cp == '.' || cp == '!' || cp == '?'; }

// Closing quotes and brackets that may trail a terminator: `end."` or `(sic.)`.
bool IsCloser(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == 0x201D ||
         cp == 0x2019 || cp == 0xBB;
}

bool IsHyphen(char32_t cp) { return cp == '-' || cp == 0x2010; }

std::u32string DecodeAll(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    const std::size_t len = unicode::DecodeUtf8(text, pos, &cp);
    if (len == 0) {
      throw IngestError(pos, "invalid UTF-8 at byte offset " +
                                 std::to_string(pos));
    }
    out.push_back(cp);
    pos += len;
  }
  return out;
}

// Splits on sentence terminators followed by whitespace and on blank lines.
// Markup is opaque to the splitter. A period does not split after a known
// abbreviation or when the next word starts with a lowercase ASCII letter.
std::vector<std::u32string> Segment(const std::u32string& text,
                                    const PreprocessOptions& options) {
  std::vector<std::u32string> sentences;
  std::u32string current;
  const auto flush = [&] {
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
  };
  const auto last_word = [&]() {
    std::size_t end = current.size();
    std::size_t start = end;
    while (start > 0 && !unicode::IsWhitespace(current[start - 1]) &&
           current[start - 1] != '>') {
      --start;
    }
    std::string word;
    for (std::size_t k = start; k < end; ++k) {
      unicode::AppendUtf8(unicode::ToLower(current[k]), &word);
    }
    while (!word.empty() && (word.back() == '.')) word.pop_back();
    return word;
  };

  bool in_tag = false;
  std::size_t k = 0;
  while (k < text.size()) {
    const char32_t cp = text[k];
    if (in_tag) {
      current.push_back(cp);
      if (cp == '>') in_tag = false;
      ++k;
      continue;
    }
    if (cp == '<') {
      in_tag = true;
      current.push_back(cp);
      ++k;
      continue;
    }
    if (cp == '\n') {
      std::size_t look = k + 1;
      while (look < text.size() && text[look] != '\n' &&
             unicode::IsWhitespace(text[look])) {
        ++look;
      }
      if (look < text.size() && text[look] == '\n') {
        flush();
        k = look + 1;
        continue;
      }
    }
    if (!IsTerminator(cp)) {
      current.push_back(cp);
      ++k;
      continue;
    }
    // Run of terminators plus trailing closers.
    const bool is_period = cp == '.';
    const std::string word_before = last_word();
    const std::size_t run_start = k;
    std::size_t end = k;
    while (end < text.size() && IsTerminator(text[end])) {
      current.push_back(text[end]);
      ++end;
    }
    while (end < text.size() && IsCloser(text[end])) {
      current.push_back(text[end]);
      ++end;
    }
    k = end;
    if (end < text.size() && !unicode::IsWhitespace(text[end])) continue;
    if (is_period && end == run_start + 1 &&
        std::find(options.abbreviations.begin(), options.abbreviations.end(),
                  word_before) != options.abbreviations.end()) {
      continue;
    }
    std::size_t next = end;
    while (next < text.size() && unicode::IsWhitespace(text[next])) ++next;
    if (next < text.size() && text[next] >= 'a' && text[next] <= 'z') continue;
    flush();
  }
  flush();
  return sentences;
}

// Replaces tags and character entities with spaces.
std::u32string StripMarkup(const std::u32string& text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t k = 0;
  while (k < text.size()) {
    if (text[k] == '<') {
      const auto close = text.find(U'>', k);
      if (close != std::u32string::npos) {
        out.push_back(' ');
        k = close + 1;
        continue;
      }
    }
    if (text[k] == '&') {
      std::size_t end = k + 1;
      while (end < text.size() && end - k <= 10 &&
             ((text[end] >= 'a' && text[end] <= 'z') ||
              (text[end] >= 'A' && text[end] <= 'Z') ||
              (text[end] >= '0' && text[end] <= '9') || text[end] == '#')) {
        ++end;
      }
      if (end < text.size() && text[end] == ';' && end > k + 1) {
        out.push_back(' ');
        k = end + 1;
        continue;
      }
    }
    out.push_back(text[k]);
    ++k;
  }
  return out;
}

// Punctuation becomes whitespace, except hyphens with a word character on
// both sides.
std::u32string StripPunctuation(const std::u32string& text) {
  const auto is_word_char = [](char32_t cp) {
    return !unicode::IsWhitespace(cp) && !unicode::IsPunctuation(cp);
  };
  std::u32string out(text);
  for (std::size_t k = 0; k < text.size(); ++k) {
    if (!unicode::IsPunctuation(text[k])) continue;
    if (IsHyphen(text[k]) && k > 0 && k + 1 < text.size() &&
        is_word_char(text[k - 1]) && is_word_char(text[k + 1])) {
      continue;
    }
    out[k] = ' ';
  }
  return out;
}

TokenizedSentence Tokenize(const std::u32string& text) {
  TokenizedSentence tokens;
  std::string token;
  for (char32_t cp : text) {
    if (unicode::IsWhitespace(cp)) {
      if (!token.empty()) tokens.push_back(std::move(token));
      token.clear();
    } else {
      unicode::AppendUtf8(cp, &token);
    }
  }
  if (!token.empty()) tokens.push_back(std::move(token));
  return tokens;
}

}  // namespace

std::vector<TokenizedSentence> Preprocess(std::string_view text,
                                          const PreprocessOptions& options) {
  const std::u32string decoded = DecodeAll(text);
  std::vector<TokenizedSentence> result;
  for (const auto& raw : Segment(decoded, options)) {
    std::u32string cleaned = StripPunctuation(StripMarkup(raw));
    for (char32_t& cp : cleaned) cp = unicode::ToLower(cp);
    TokenizedSentence tokens = Tokenize(cleaned);
    if (!tokens.empty()) result.push_back(std::move(tokens));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary Vocabulary::Build(std::span<const TokenizedSentence> sentences,
                             std::uint64_t min_count) {
  if (min_count < 1) throw Error("E_CONFIG", "min_count must be >= 1");
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence) ++freq[token];
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [word, count] : freq) {
    if (count >= min_count) kept.emplace_back(word, count);
  }
  if (kept.empty()) {
    throw Error("E_EMPTY_VOCAB", "no token reaches min_count " +
                                     std::to_string(min_count));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return FromEntries(std::move(kept));
}

Vocabulary Vocabulary::FromEntries(
    std::vector<std::pair<std::string, std::uint64_t>> entries) {
  Vocabulary vocab;
  vocab.words_.reserve(entries.size());
  vocab.counts_.reserve(entries.size());
  for (auto& [word, count] : entries) {
    const auto id = static_cast<WordId>(vocab.words_.size());
    if (!vocab.index_.emplace(word, id).second) {
      throw Error("E_FORMAT", "duplicate vocabulary word '" + word + "'");
    }
    vocab.words_.push_back(std::move(word));
    vocab.counts_.push_back(count);
  }
  return vocab;
}

std::optional<WordId> Vocabulary::Find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::Require(std::string_view word) const {
  const auto id = Find(word);
  if (!id) {
    throw Error("E_OOV", "word '" + std::string(word) + "' not in vocabulary");
  }
  return *id;
}

void Vocabulary::Save(std::ostream& os, std::string_view header) const {
  artifact::WriteCommentBlock(os, header);
  for (std::size_t id = 0; id < words_.size(); ++id) {
    os << words_[id] << '\t' << counts_[id] << '\n';
  }
}

Vocabulary Vocabulary::Load(std::istream& is) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || artifact::IsCommentLine(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error("E_FORMAT", "malformed vocabulary line: '" + line + "'");
    }
    entries.emplace_back(
        line.substr(0, tab),
        artifact::ParseUnsigned(line.substr(tab + 1), "vocabulary count"));
  }
  return FromEntries(std::move(entries));
}

// ---------------------------------------------------------------------------
// SentenceStore

SentenceStore EncodeCorpus(std::span<const TokenizedSentence> sentences,
                           const Vocabulary& vocab) {
  SentenceStore store;
  store.vocab_size = vocab.size();
  for (const auto& sentence : sentences) {
    std::vector<WordId> ids;
    ids.reserve(sentence.size());
    for (const auto& token : sentence) {
      if (const auto id = vocab.Find(token)) ids.push_back(*id);
    }
    if (!ids.empty()) store.sentences.push_back(std::move(ids));
  }
  return store;
}

std::vector<TokenizedSentence> DecodeCorpus(const SentenceStore& store,
                                            const Vocabulary& vocab) {
  std::vector<TokenizedSentence> out;
  out.reserve(store.size());
  for (const auto& ids : store.sentences) {
    TokenizedSentence sentence;
    sentence.reserve(ids.size());
    for (WordId id : ids) sentence.push_back(vocab.Word(id));
    out.push_back(std::move(sentence));
  }
  return out;
}

void SentenceStore::Save(std::ostream& os, std::string_view header) const {
  artifact::WriteCommentBlock(os, header);
  for (const auto& ids : sentences) {
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (p > 0) os << ' ';
      os << ids[p];
    }
    os << '\n';
  }
}

SentenceStore SentenceStore::Load(std::istream& is, std::size_t vocab_size) {
  SentenceStore store;
  store.vocab_size = vocab_size;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (artifact::IsCommentLine(line)) continue;
    std::istringstream fields(line);
    std::vector<WordId> ids;
    std::string field;
    while (fields >> field) {
      const auto id = artifact::ParseUnsigned(field, "word id");
      if (id >= vocab_size) {
        throw Error("E_FORMAT", "word id " + field + " out of range on line " +
                                    std::to_string(line_no));
      }
      ids.push_back(static_cast<WordId>(id));
    }
    if (ids.empty()) {
      throw Error("E_FORMAT",
                  "empty sentence on line " + std::to_string(line_no));
    }
    store.sentences.push_back(std::move(ids));
  }
  return store;
}

// ---------------------------------------------------------------------------
// InvertedIndex

InvertedIndex InvertedIndex::Build(const SentenceStore& store) {
  InvertedIndex index;
  index.postings_.resize(store.vocab_size);
  index.sentence_count_ = store.size();
  for (std::size_t s = 0; s < store.size(); ++s) {
    for (WordId id : store.sentences[s]) {
      auto& list = index.postings_.at(id);
      if (list.empty() || list.back() != s) {
        list.push_back(static_cast<std::uint32_t>(s));
      }
    }
  }
  return index;
}

std::span<const std::uint32_t> InvertedIndex::Postings(WordId word) const {
  if (word >= postings_.size()) {
    throw Error("E_RANGE", "word id " + std::to_string(word) +
                               " outside vocabulary of size " +
                               std::to_string(postings_.size()));
  }
  return postings_[word];
}

std::vector<std::uint32_t> InvertedIndex::SentencesWithPair(WordId i,
                                                            WordId k) const {
  const auto a = Postings(i);
  const auto b = Postings(k);
  std::vector<std::uint32_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

void InvertedIndex::Save(std::ostream& os, std::string_view header) const {
  artifact::WriteHeader(os, kIndexMagic,
                        {{"n", std::to_string(postings_.size())},
                         {"sentences", std::to_string(sentence_count_)},
                         {"config", std::string(header)}});
  for (const auto& list : postings_) {
    artifact::WriteVarint(os, list.size());
    std::uint32_t previous = 0;
    for (std::size_t m = 0; m < list.size(); ++m) {
      artifact::WriteVarint(os, m == 0 ? list[m] : list[m] - previous);
      previous = list[m];
    }
  }
}

InvertedIndex InvertedIndex::Load(std::istream& is) {
  const auto fields = artifact::ReadHeader(is, kIndexMagic);
  const auto get = [&](const std::string& key) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw Error("E_FORMAT", "index header lacks " + key);
    return artifact::ParseUnsigned(it->second, key);
  };
  InvertedIndex index;
  index.postings_.resize(get("n"));
  index.sentence_count_ = get("sentences");
  for (auto& list : index.postings_) {
    const auto count = artifact::ReadVarint(is);
    list.reserve(count);
    std::uint64_t value = 0;
    for (std::uint64_t m = 0; m < count; ++m) {
      const auto delta = artifact::ReadVarint(is);
      if (m > 0 && delta == 0) {
        throw Error("E_FORMAT", "posting list not strictly ascending");
      }
      value = m == 0 ? delta : value + delta;
      if (value >= index.sentence_count_) {
        throw Error("E_FORMAT", "posting beyond sentence count");
      }
      list.push_back(static_cast<std::uint32_t>(value));
    }
  }
  return index;
}

}  // namespace grv
