#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "grv/common.h"
#include "grv/corpus.h"

namespace grv {

// Immutable sparse n x n matrix in compressed-row form, columns sorted.
class SparseCounts {
 public:
  class Builder {
   public:
    explicit Builder(std::size_t n) : n_(n) {}
    void Add(WordId row, WordId col, double value);
    // Adds every entry of `other` (entries visited in row/col order).
    void Merge(const SparseCounts& other);
    SparseCounts Build() const;

   private:
    std::size_t n_;
    std::unordered_map<std::uint64_t, double> cells_;
  };

  SparseCounts() = default;
  explicit SparseCounts(std::size_t n) : n_(n), row_start_(n + 1, 0) {}

  double Get(WordId row, WordId col) const;
  std::span<const WordId> RowCols(WordId row) const;
  std::span<const double> RowValues(WordId row) const;
  double RowSum(WordId row) const;
  std::vector<double> RowSums() const;
  std::vector<double> ColSums() const;

  std::size_t n() const { return n_; }
  std::size_t nnz() const { return cols_.size(); }

  template <typename Fn>
  void ForEach(Fn&& fn) const {
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t e = row_start_[r]; e < row_start_[r + 1]; ++e) {
        fn(static_cast<WordId>(r), cols_[e], values_[e]);
      }
    }
  }

  // Binary triplets (u32 row, u32 col, f64 value), preceded by a count.
  void WriteTriplets(std::ostream& os) const;
  static SparseCounts ReadTriplets(std::istream& is, std::size_t n);

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_start_;
  std::vector<WordId> cols_;
  std::vector<double> values_;
};

// Distance-weighted pair counts x_ij with marginals. Symmetric.
struct PairStats {
  std::size_t n = 0;
  int window = 10;
  SparseCounts x;
  std::vector<double> row_sums;  // x_{i*} (= x_{*i})
  double total = 0.0;            // x_{**}

  void Save(std::ostream& os, std::string_view header = {}) const;
  static PairStats Load(std::istream& is);
  void SaveTsv(std::ostream& os, const Vocabulary& vocab,
               std::string_view header = {}) const;
};

// Marginals of the ordered triple counts y_ijk for one slot. Role i is the
// first word of the pair, k the second, j the context word.
struct SlotMarginals {
  SparseCounts ij;  // y_{ij*}
  SparseCounts ik;  // y_{i*k}
  SparseCounts jk;  // y_{*jk}
  std::vector<double> i;  // y_{i**}
  std::vector<double> j;  // y_{*j*}
  std::vector<double> k;  // y_{**k}
  double total = 0.0;     // y_{***}
};

struct TripleStats {
  std::size_t n = 0;
  int window = 10;
  bool weighted = true;
  std::array<SlotMarginals, 3> slots;

  const SlotMarginals& slot(Slot s) const {
    return slots[static_cast<int>(s)];
  }

  void Save(std::ostream& os, std::string_view header = {}) const;
  static TripleStats Load(std::istream& is);
};

// y_ijk over contexts j for one ordered pair and slot; nonzero entries only,
// sorted by context id.
struct TripleSlice {
  WordId i = 0;
  WordId k = 0;
  Slot slot = Slot::kBetween;
  std::vector<std::pair<WordId, double>> counts;

  double Get(WordId j) const;
  double Sum() const;
};

struct CountOptions {
  int window = 10;
  // When false, every qualifying triple contributes 1 instead of its
  // distance weight (pair counts are always weighted).
  bool weighted = true;
  // Sentence shards counted concurrently and merged in shard order. With
  // more than one shard the sums agree with single-threaded counting only
  // up to floating-point reassociation.
  int threads = 1;
};

// 1/|p-q| for 0 < |p-q| <= window, else 0.
double PairWeight(std::int64_t p, std::int64_t q, int window);
// max(1/(q-p), 1/(r-q)) for p < q < r and r-p <= window, else 0.
double TripleWeight(std::int64_t p, std::int64_t q, std::int64_t r,
                    int window);

PairStats CountPairs(const SentenceStore& store, const CountOptions& options);

// Marginals for all three slots. Pairs with i == k are excluded. Marginals
// are accumulated per position pair using closed-form sums over the third
// position, never enumerating triples.
//
// Slot geometry for a sentence with i at p and k at r, p < r, r - p <= W:
//   between: j at p < q < r, weight max(1/(q-p), 1/(r-q))
//   before:  j at max(1, p-W) <= q < p, weight 1/(p-q)
//   after:   j at r < q <= r+W, weight 1/(q-r)
TripleStats CountTripleMarginals(const SentenceStore& store,
                                 const CountOptions& options);

// Collects y_ijk for the ordered pair (i, k) from the sentences containing
// both words. Requires i != k.
TripleSlice ExtractTripleSlice(const SentenceStore& store,
                               const InvertedIndex& index, WordId i, WordId k,
                               Slot slot, int window, bool weighted = true);

}  // namespace grv
