#include "grv/cooccur.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <thread>

#include "grv/artifact.h"

namespace grv {
namespace {

constexpr std::string_view kPairMagic = "GRV-PAIRS 1";
constexpr std::string_view kTripleMagic = "GRV-TRIPLES 1";

std::uint64_t CellKey(WordId row, WordId col) {
  return (static_cast<std::uint64_t>(row) << 32) | col;
}

// Prefix sums of per-distance weights (1/d, or 1 when unweighted).
class DistanceWeights {
 public:
  DistanceWeights(int max_distance, bool weighted)
      : weighted_(weighted), prefix_(static_cast<std::size_t>(max_distance) + 1,
                                     0.0) {
    for (int d = 1; d <= max_distance; ++d) prefix_[d] = prefix_[d - 1] + At(d);
  }

  double At(int d) const { return weighted_ ? 1.0 / d : 1.0; }

  // Sum of At(d) for lo <= d <= hi.
  double Sum(int lo, int hi) const {
    if (hi < lo) return 0.0;
    return prefix_[hi] - prefix_[lo - 1];
  }

 private:
  bool weighted_;
  std::vector<double> prefix_;
};

// 1-based view over one sentence with per-word position lookup.
class SentenceView {
 public:
  explicit SentenceView(std::span<const WordId> words) : words_(words) {
    by_word_.reserve(words.size());
    for (std::size_t p = 0; p < words.size(); ++p) {
      by_word_.emplace_back(words[p], static_cast<int>(p + 1));
    }
    std::sort(by_word_.begin(), by_word_.end());
  }

  int length() const { return static_cast<int>(words_.size()); }
  WordId At(int p) const { return words_[static_cast<std::size_t>(p - 1)]; }

  // Calls fn(position) for occurrences of `word` within [lo, hi].
  template <typename Fn>
  void ForOccurrences(WordId word, int lo, int hi, Fn&& fn) const {
    if (hi < lo) return;
    auto it = std::lower_bound(by_word_.begin(), by_word_.end(),
                               std::make_pair(word, lo));
    for (; it != by_word_.end() && it->first == word && it->second <= hi;
         ++it) {
      fn(it->second);
    }
  }

  int CountOccurrences(WordId word, int lo, int hi) const {
    int count = 0;
    ForOccurrences(word, lo, hi, [&](int) { ++count; });
    return count;
  }

 private:
  std::span<const WordId> words_;
  std::vector<std::pair<WordId, int>> by_word_;
};

struct SlotBuilders {
  explicit SlotBuilders(std::size_t n) : ij(n), ik(n), jk(n) {}
  SparseCounts::Builder ij;
  SparseCounts::Builder ik;
  SparseCounts::Builder jk;
};

void AccumulateBetween(const SentenceView& s, int window,
                       const DistanceWeights& dw, SlotBuilders& out) {
  const int len = s.length();
  for (int p = 1; p <= len; ++p) {
    const WordId wi = s.At(p);
    const int rmax = std::min(len, p + window);
    // (p, q) -> sum over r in (q, rmax] of w(min(q - p, r - q)).
    for (int q = p + 1; q < rmax; ++q) {
      const int a = q - p;
      const int span = rmax - q;
      double sum = dw.Sum(1, std::min(a, span)) +
                   std::max(0, span - a) * dw.At(a);
      int excluded = 0;
      s.ForOccurrences(wi, q + 1, rmax, [&](int r) {
        sum -= dw.At(std::min(a, r - q));
        ++excluded;
      });
      if (excluded < span) out.ij.Add(wi, s.At(q), sum);
    }
    // (p, r) -> sum over q in (p, r) of w(min(q - p, r - q)).
    for (int r = p + 2; r <= rmax; ++r) {
      if (s.At(r) == wi) continue;
      const int d = r - p;
      out.ik.Add(wi, s.At(r), dw.Sum(1, d / 2) + dw.Sum(1, d - 1 - d / 2));
    }
  }
  for (int r = 1; r <= len; ++r) {
    const WordId wk = s.At(r);
    const int pmin = std::max(1, r - window);
    // (q, r) -> sum over p in [pmin, q) of w(min(q - p, r - q)).
    for (int q = pmin + 1; q < r; ++q) {
      const int b = r - q;
      const int span = q - pmin;
      double sum = dw.Sum(1, std::min(b, span)) +
                   std::max(0, span - b) * dw.At(b);
      int excluded = 0;
      s.ForOccurrences(wk, pmin, q - 1, [&](int p) {
        sum -= dw.At(std::min(q - p, b));
        ++excluded;
      });
      if (excluded < span) out.jk.Add(s.At(q), wk, sum);
    }
  }
}

void AccumulateBefore(const SentenceView& s, int window,
                      const DistanceWeights& dw, SlotBuilders& out) {
  const int len = s.length();
  for (int p = 1; p <= len; ++p) {
    const WordId wi = s.At(p);
    const int rmax = std::min(len, p + window);
    const int partners = (rmax - p) - s.CountOccurrences(wi, p + 1, rmax);
    if (partners == 0) continue;
    for (int q = std::max(1, p - window); q < p; ++q) {
      out.ij.Add(wi, s.At(q), partners * dw.At(p - q));
    }
    if (p > 1) {
      const double context_mass = dw.Sum(1, std::min(window, p - 1));
      for (int r = p + 1; r <= rmax; ++r) {
        if (s.At(r) != wi) out.ik.Add(wi, s.At(r), context_mass);
      }
    }
  }
  for (int r = 1; r <= len; ++r) {
    const WordId wk = s.At(r);
    // (q, r) -> sum over p in (q, r), r-p <= W, p-q <= W of w(p - q).
    for (int q = std::max(1, r - 2 * window); q <= r - 2; ++q) {
      const int lo = std::max(q + 1, r - window);
      const int hi = std::min(r - 1, q + window);
      if (lo > hi) continue;
      double sum = dw.Sum(lo - q, hi - q);
      int excluded = 0;
      s.ForOccurrences(wk, lo, hi, [&](int p) {
        sum -= dw.At(p - q);
        ++excluded;
      });
      if (excluded < hi - lo + 1) out.jk.Add(s.At(q), wk, sum);
    }
  }
}

void AccumulateAfter(const SentenceView& s, int window,
                     const DistanceWeights& dw, SlotBuilders& out) {
  const int len = s.length();
  for (int p = 1; p <= len; ++p) {
    const WordId wi = s.At(p);
    // (p, q) -> sum over r in (p, q), r-p <= W, q-r <= W of w(q - r).
    for (int q = p + 2; q <= std::min(len, p + 2 * window); ++q) {
      const int lo = std::max(p + 1, q - window);
      const int hi = std::min(q - 1, p + window);
      if (lo > hi) continue;
      double sum = dw.Sum(q - hi, q - lo);
      int excluded = 0;
      s.ForOccurrences(wi, lo, hi, [&](int r) {
        sum -= dw.At(q - r);
        ++excluded;
      });
      if (excluded < hi - lo + 1) out.ij.Add(wi, s.At(q), sum);
    }
    const int rmax = std::min(len, p + window);
    for (int r = p + 1; r <= rmax && r < len; ++r) {
      if (s.At(r) == wi) continue;
      out.ik.Add(wi, s.At(r), dw.Sum(1, std::min(window, len - r)));
    }
  }
  for (int r = 1; r <= len; ++r) {
    const WordId wk = s.At(r);
    const int pmin = std::max(1, r - window);
    const int partners = (r - pmin) - s.CountOccurrences(wk, pmin, r - 1);
    if (partners == 0) continue;
    for (int q = r + 1; q <= std::min(len, r + window); ++q) {
      out.jk.Add(s.At(q), wk, partners * dw.At(q - r));
    }
  }
}

SlotMarginals FinishSlot(const SlotBuilders& builders) {
  SlotMarginals m;
  m.ij = builders.ij.Build();
  m.ik = builders.ik.Build();
  m.jk = builders.jk.Build();
  m.i = m.ij.RowSums();
  m.j = m.ij.ColSums();
  m.k = m.ik.ColSums();
  m.total = 0.0;
  for (double v : m.i) m.total += v;
  return m;
}

std::vector<std::pair<std::size_t, std::size_t>> ShardRanges(
    std::size_t count, int threads) {
  const std::size_t shards =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t s = 0; s < shards; ++s) {
    ranges.emplace_back(count * s / shards, count * (s + 1) / shards);
  }
  return ranges;
}

// Runs fn(begin, end, shard) per shard, concurrently when threads > 1.
template <typename Fn>
void RunShards(const std::vector<std::pair<std::size_t, std::size_t>>& ranges,
               Fn&& fn) {
  if (ranges.size() == 1) {
    fn(ranges[0].first, ranges[0].second, 0);
    return;
  }
  std::vector<std::thread> workers;
  for (std::size_t s = 0; s < ranges.size(); ++s) {
    workers.emplace_back(
        [&, s] { fn(ranges[s].first, ranges[s].second, s); });
  }
  for (auto& t : workers) t.join();
}

}  // namespace

// ---------------------------------------------------------------------------
// SparseCounts

void SparseCounts::Builder::Add(WordId row, WordId col, double value) {
  cells_[CellKey(row, col)] += value;
}

void SparseCounts::Builder::Merge(const SparseCounts& other) {
  other.ForEach([&](WordId r, WordId c, double v) { Add(r, c, v); });
}

SparseCounts SparseCounts::Builder::Build() const {
  std::vector<std::pair<std::uint64_t, double>> cells(cells_.begin(),
                                                      cells_.end());
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseCounts out(n_);
  out.cols_.reserve(cells.size());
  out.values_.reserve(cells.size());
  for (const auto& [key, value] : cells) {
    const auto row = static_cast<std::size_t>(key >> 32);
    const auto col = static_cast<WordId>(key & 0xFFFFFFFFu);
    if (row >= n_ || col >= n_) {
      throw Error("E_RANGE", "sparse cell outside n=" + std::to_string(n_));
    }
    ++out.row_start_[row + 1];
    out.cols_.push_back(col);
    out.values_.push_back(value);
  }
  for (std::size_t r = 0; r < n_; ++r) {
    out.row_start_[r + 1] += out.row_start_[r];
  }
  return out;
}

double SparseCounts::Get(WordId row, WordId col) const {
  const auto cols = RowCols(row);
  const auto it = std::lower_bound(cols.begin(), cols.end(), col);
  if (it == cols.end() || *it != col) return 0.0;
  return values_[row_start_[row] + static_cast<std::size_t>(it - cols.begin())];
}

std::span<const WordId> SparseCounts::RowCols(WordId row) const {
  if (row >= n_) return {};
  return std::span<const WordId>(cols_).subspan(
      row_start_[row], row_start_[row + 1] - row_start_[row]);
}

std::span<const double> SparseCounts::RowValues(WordId row) const {
  if (row >= n_) return {};
  return std::span<const double>(values_).subspan(
      row_start_[row], row_start_[row + 1] - row_start_[row]);
}

double SparseCounts::RowSum(WordId row) const {
  double sum = 0.0;
  for (double v : RowValues(row)) sum += v;
  return sum;
}

std::vector<double> SparseCounts::RowSums() const {
  std::vector<double> sums(n_, 0.0);
  ForEach([&](WordId r, WordId, double v) { sums[r] += v; });
  return sums;
}

std::vector<double> SparseCounts::ColSums() const {
  std::vector<double> sums(n_, 0.0);
  ForEach([&](WordId, WordId c, double v) { sums[c] += v; });
  return sums;
}

void SparseCounts::WriteTriplets(std::ostream& os) const {
  artifact::WriteVarint(os, nnz());
  ForEach([&](WordId r, WordId c, double v) {
    artifact::WriteU32(os, r);
    artifact::WriteU32(os, c);
    artifact::WriteF64(os, v);
  });
}

SparseCounts SparseCounts::ReadTriplets(std::istream& is, std::size_t n) {
  const auto count = artifact::ReadVarint(is);
  Builder builder(n);
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto r = artifact::ReadU32(is);
    const auto c = artifact::ReadU32(is);
    const double v = artifact::ReadF64(is);
    if (!std::isfinite(v) || v < 0.0) {
      throw Error("E_FORMAT", "invalid count in triplet file");
    }
    builder.Add(r, c, v);
  }
  return builder.Build();
}

// ---------------------------------------------------------------------------
// Weights

double PairWeight(std::int64_t p, std::int64_t q, int window) {
  const std::int64_t d = p > q ? p - q : q - p;
  if (d == 0 || d > window) return 0.0;
  return 1.0 / static_cast<double>(d);
}

double TripleWeight(std::int64_t p, std::int64_t q, std::int64_t r,
                    int window) {
  if (!(p < q && q < r) || r - p > window) return 0.0;
  return std::max(1.0 / static_cast<double>(q - p),
                  1.0 / static_cast<double>(r - q));
}

// ---------------------------------------------------------------------------
// Counting

PairStats CountPairs(const SentenceStore& store, const CountOptions& options) {
  if (options.window < 1) throw Error("E_CONFIG", "window must be >= 1");
  const std::size_t n = store.vocab_size;
  const auto ranges = ShardRanges(store.size(), options.threads);
  // Unordered pairs keyed (min, max); a same-word position pair counts in
  // both orders, hence twice.
  std::vector<SparseCounts> partial(ranges.size());
  RunShards(ranges, [&](std::size_t begin, std::size_t end, std::size_t shard) {
    SparseCounts::Builder builder(n);
    for (std::size_t s = begin; s < end; ++s) {
      const auto& words = store.sentences[s];
      const int len = static_cast<int>(words.size());
      for (int p = 0; p < len; ++p) {
        for (int q = p + 1; q < std::min(len, p + options.window + 1); ++q) {
          const WordId a = std::min(words[p], words[q]);
          const WordId b = std::max(words[p], words[q]);
          const double w = 1.0 / (q - p);
          builder.Add(a, b, a == b ? 2.0 * w : w);
        }
      }
    }
    partial[shard] = builder.Build();
  });
  SparseCounts::Builder merged(n);
  for (const auto& part : partial) merged.Merge(part);
  const SparseCounts upper = merged.Build();

  SparseCounts::Builder full(n);
  upper.ForEach([&](WordId a, WordId b, double v) {
    full.Add(a, b, v);
    if (a != b) full.Add(b, a, v);
  });

  PairStats stats;
  stats.n = n;
  stats.window = options.window;
  stats.x = full.Build();
  stats.row_sums = stats.x.RowSums();
  for (double v : stats.row_sums) stats.total += v;
  return stats;
}

TripleStats CountTripleMarginals(const SentenceStore& store,
                                 const CountOptions& options) {
  if (options.window < 1) throw Error("E_CONFIG", "window must be >= 1");
  const std::size_t n = store.vocab_size;
  const DistanceWeights dw(options.window, options.weighted);
  const auto ranges = ShardRanges(store.size(), options.threads);

  std::vector<std::array<SparseCounts, 9>> partial(ranges.size());
  RunShards(ranges, [&](std::size_t begin, std::size_t end, std::size_t shard) {
    SlotBuilders between(n), before(n), after(n);
    for (std::size_t s = begin; s < end; ++s) {
      const SentenceView view(store.sentences[s]);
      AccumulateBetween(view, options.window, dw, between);
      AccumulateBefore(view, options.window, dw, before);
      AccumulateAfter(view, options.window, dw, after);
    }
    auto& out = partial[shard];
    const SlotBuilders* slots[] = {&between, &before, &after};
    for (int slot = 0; slot < 3; ++slot) {
      out[slot * 3 + 0] = slots[slot]->ij.Build();
      out[slot * 3 + 1] = slots[slot]->ik.Build();
      out[slot * 3 + 2] = slots[slot]->jk.Build();
    }
  });

  TripleStats stats;
  stats.n = n;
  stats.window = options.window;
  stats.weighted = options.weighted;
  for (int slot = 0; slot < 3; ++slot) {
    SlotBuilders merged(n);
    for (const auto& part : partial) {
      merged.ij.Merge(part[slot * 3 + 0]);
      merged.ik.Merge(part[slot * 3 + 1]);
      merged.jk.Merge(part[slot * 3 + 2]);
    }
    stats.slots[slot] = FinishSlot(merged);
  }
  return stats;
}

double TripleSlice::Get(WordId j) const {
  const auto it = std::lower_bound(
      counts.begin(), counts.end(), j,
      [](const auto& entry, WordId key) { return entry.first < key; });
  if (it == counts.end() || it->first != j) return 0.0;
  return it->second;
}

double TripleSlice::Sum() const {
  double sum = 0.0;
  for (const auto& [j, y] : counts) sum += y;
  return sum;
}

TripleSlice ExtractTripleSlice(const SentenceStore& store,
                               const InvertedIndex& index, WordId i, WordId k,
                               Slot slot, int window, bool weighted) {
  if (i == k) throw Error("E_ARG", "triple slice requires i != k");
  if (i >= store.vocab_size || k >= store.vocab_size) {
    throw Error("E_RANGE", "word id outside vocabulary");
  }
  const DistanceWeights dw(window, weighted);
  std::unordered_map<WordId, double> acc;
  std::vector<WordId> touched;
  const auto add = [&](WordId j, double w) {
    auto [it, inserted] = acc.emplace(j, 0.0);
    if (inserted) touched.push_back(j);
    it->second += w;
  };

  for (std::uint32_t sid : index.SentencesWithPair(i, k)) {
    const auto& words = store.sentences[sid];
    const int len = static_cast<int>(words.size());
    for (int p = 1; p <= len; ++p) {
      if (words[p - 1] != i) continue;
      for (int r = p + 1; r <= std::min(len, p + window); ++r) {
        if (words[r - 1] != k) continue;
        switch (slot) {
          case Slot::kBetween:
            for (int q = p + 1; q < r; ++q) {
              add(words[q - 1], dw.At(std::min(q - p, r - q)));
            }
            break;
          case Slot::kBefore:
            for (int q = std::max(1, p - window); q < p; ++q) {
              add(words[q - 1], dw.At(p - q));
            }
            break;
          case Slot::kAfter:
            for (int q = r + 1; q <= std::min(len, r + window); ++q) {
              add(words[q - 1], dw.At(q - r));
            }
            break;
        }
      }
    }
  }

  TripleSlice slice;
  slice.i = i;
  slice.k = k;
  slice.slot = slot;
  std::sort(touched.begin(), touched.end());
  slice.counts.reserve(touched.size());
  for (WordId j : touched) slice.counts.emplace_back(j, acc[j]);
  return slice;
}

// ---------------------------------------------------------------------------
// Persistence

void PairStats::Save(std::ostream& os, std::string_view header) const {
  artifact::WriteHeader(os, kPairMagic,
                        {{"n", std::to_string(n)},
                         {"W", std::to_string(window)},
                         {"total", artifact::FormatDouble(total)},
                         {"config", std::string(header)}});
  x.WriteTriplets(os);
}

PairStats PairStats::Load(std::istream& is) {
  const auto fields = artifact::ReadHeader(is, kPairMagic);
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw Error("E_FORMAT", "pair-count header lacks " + key);
    }
    return it->second;
  };
  PairStats stats;
  stats.n = artifact::ParseUnsigned(get("n"), "n");
  stats.window = static_cast<int>(artifact::ParseUnsigned(get("W"), "W"));
  stats.x = SparseCounts::ReadTriplets(is, stats.n);
  stats.row_sums = stats.x.RowSums();
  for (double v : stats.row_sums) stats.total += v;
  return stats;
}

void PairStats::SaveTsv(std::ostream& os, const Vocabulary& vocab,
                        std::string_view header) const {
  artifact::WriteCommentBlock(os, header);
  x.ForEach([&](WordId i, WordId j, double v) {
    os << vocab.Word(i) << '\t' << vocab.Word(j) << '\t'
       << artifact::FormatDouble(v) << '\n';
  });
}

void TripleStats::Save(std::ostream& os, std::string_view header) const {
  artifact::WriteHeader(os, kTripleMagic,
                        {{"n", std::to_string(n)},
                         {"W", std::to_string(window)},
                         {"weighted", weighted ? "1" : "0"},
                         {"config", std::string(header)}});
  for (Slot s : kAllSlots) {
    const auto& m = slot(s);
    os << "slot " << SlotName(s) << '\n';
    m.ij.WriteTriplets(os);
    m.ik.WriteTriplets(os);
    m.jk.WriteTriplets(os);
  }
}

TripleStats TripleStats::Load(std::istream& is) {
  const auto fields = artifact::ReadHeader(is, kTripleMagic);
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw Error("E_FORMAT", "triple-marginal header lacks " + key);
    }
    return it->second;
  };
  TripleStats stats;
  stats.n = artifact::ParseUnsigned(get("n"), "n");
  stats.window = static_cast<int>(artifact::ParseUnsigned(get("W"), "W"));
  stats.weighted = get("weighted") == "1";
  for (Slot s : kAllSlots) {
    std::string line;
    if (!std::getline(is, line) ||
        line != std::string("slot ") + SlotName(s)) {
      throw Error("E_FORMAT", std::string("missing section for slot ") +
                                  SlotName(s));
    }
    SlotBuilders builders(stats.n);
    builders.ij.Merge(SparseCounts::ReadTriplets(is, stats.n));
    builders.ik.Merge(SparseCounts::ReadTriplets(is, stats.n));
    builders.jk.Merge(SparseCounts::ReadTriplets(is, stats.n));
    stats.slots[static_cast<int>(s)] = FinishSlot(builders);
  }
  return stats;
}

}  // namespace grv
