#include "grv/selfcheck.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <utility>

#include "grv/cooccur.h"
#include "grv/eval.h"
#include "grv/measures.h"
#include "grv/random.h"
#include "grv/ridge.h"

namespace grv {
namespace {

constexpr int kWindow = 4;

SentenceStore RandomCorpus(Rng& rng) {
  SentenceStore store;
  store.vocab_size = 2 + UniformIndex(rng, 7);
  const auto sentences = 1 + UniformIndex(rng, 5);
  for (std::uint64_t s = 0; s < sentences; ++s) {
    std::vector<WordId> words(1 + UniformIndex(rng, 10));
    for (auto& w : words) w = static_cast<WordId>(UniformIndex(rng, store.vocab_size));
    store.sentences.push_back(std::move(words));
  }
  return store;
}

std::vector<SentenceStore> Corpora(std::uint64_t seed) {
  std::vector<SentenceStore> out;
  out.push_back({3, {{0, 1, 2}}});
  out.push_back({4, {{0, 1, 2, 3, 0, 1}, {3, 2}, {1}}});
  Rng rng(DeriveSeed(seed, "selfcheck"));
  for (int c = 0; c < 12; ++c) out.push_back(RandomCorpus(rng));
  return out;
}

// y[i][j][k] for one slot, straight from the position tuples.
std::vector<double> EnumerateTriples(const SentenceStore& store, Slot slot) {
  const std::size_t n = store.vocab_size;
  std::vector<double> y(n * n * n, 0.0);
  for (const auto& s : store.sentences) {
    const long len = static_cast<long>(s.size());
    for (long p = 1; p <= len; ++p) {
      for (long r = p + 1; r <= std::min(len, p + kWindow); ++r) {
        if (s[p - 1] == s[r - 1]) continue;
        for (long q = 1; q <= len; ++q) {
          double w = 0.0;
          if (slot == Slot::kBetween && p < q && q < r) {
            w = std::max(1.0 / (q - p), 1.0 / (r - q));
          } else if (slot == Slot::kBefore && q < p && p - q <= kWindow) {
            w = 1.0 / (p - q);
          } else if (slot == Slot::kAfter && q > r && q - r <= kWindow) {
            w = 1.0 / (q - r);
          }
          if (w > 0.0) y[(s[p - 1] * n + s[q - 1]) * n + s[r - 1]] += w;
        }
      }
    }
  }
  return y;
}

SelfcheckItem CheckCounting(const std::vector<SentenceStore>& corpora) {
  double worst = 0.0;
  for (const auto& store : corpora) {
    const std::size_t n = store.vocab_size;
    const auto pairs = CountPairs(store, {.window = kWindow});
    std::vector<double> x(n * n, 0.0);
    for (const auto& s : store.sentences) {
      for (std::size_t p = 0; p < s.size(); ++p) {
        for (std::size_t q = 0; q < s.size(); ++q) {
          const auto d = p > q ? p - q : q - p;
          if (d > 0 && d <= kWindow) x[s[p] * n + s[q]] += 1.0 / static_cast<double>(d);
        }
      }
    }
    for (WordId i = 0; i < n; ++i) {
      for (WordId j = 0; j < n; ++j) {
        worst = std::max(worst, std::abs(pairs.x.Get(i, j) - x[i * n + j]));
      }
    }

    const auto stats = CountTripleMarginals(store, {.window = kWindow});
    const auto index = InvertedIndex::Build(store);
    for (Slot slot : kAllSlots) {
      const auto y = EnumerateTriples(store, slot);
      const auto& m = stats.slot(slot);
      std::vector<double> ij(n * n, 0.0), ik(n * n, 0.0), jk(n * n, 0.0);
      std::vector<double> mi(n, 0.0), mj(n, 0.0), mk(n, 0.0);
      double total = 0.0;
      for (WordId i = 0; i < n; ++i) {
        for (WordId j = 0; j < n; ++j) {
          for (WordId k = 0; k < n; ++k) {
            const double v = y[(i * n + j) * n + k];
            ij[i * n + j] += v;
            ik[i * n + k] += v;
            jk[j * n + k] += v;
            mi[i] += v;
            mj[j] += v;
            mk[k] += v;
            total += v;
          }
        }
      }
      for (WordId a = 0; a < n; ++a) {
        worst = std::max({worst, std::abs(m.i[a] - mi[a]), std::abs(m.j[a] - mj[a]),
                          std::abs(m.k[a] - mk[a])});
        for (WordId b = 0; b < n; ++b) {
          worst = std::max({worst, std::abs(m.ij.Get(a, b) - ij[a * n + b]),
                            std::abs(m.ik.Get(a, b) - ik[a * n + b]),
                            std::abs(m.jk.Get(a, b) - jk[a * n + b])});
          if (a == b) continue;
          const auto slice = ExtractTripleSlice(store, index, a, b, slot, kWindow);
          for (WordId j = 0; j < n; ++j) {
            worst = std::max(worst, std::abs(slice.Get(j) - y[(a * n + j) * n + b]));
          }
        }
      }
      worst = std::max(worst, std::abs(m.total - total));
    }
  }
  char detail[64];
  std::snprintf(detail, sizeof detail, "max |diff| %.3g", worst);
  return {"counting", worst <= 1e-12, detail};
}

SelfcheckItem CheckIdentities(const std::vector<SentenceStore>& corpora) {
  double worst = 0.0;
  int checked = 0;
  for (const auto& store : corpora) {
    const std::size_t n = store.vocab_size;
    const auto stats = CountTripleMarginals(store, {.window = kWindow});
    for (Slot slot : kAllSlots) {
      const auto y = EnumerateTriples(store, slot);
      const auto& m = stats.slot(slot);
      for (WordId i = 0; i < n; ++i) {
        for (WordId j = 0; j < n; ++j) {
          for (WordId k = 0; k < n; ++k) {
            const double v = y[(i * n + j) * n + k];
            if (v <= 0.0 || m.ij.Get(i, j) <= 0.0 || m.jk.Get(j, k) <= 0.0) continue;
            const double pij = TriplePmiFirstContext(m, n, i, j, 0.0);
            const double pjk = TriplePmiContextSecond(m, n, j, k, 0.0);
            const double si[] = {Si(1, m, n, v, i, j, k, 0.0), Si(2, m, n, v, i, j, k, 0.0),
                                 Si(3, m, n, v, i, j, k, 0.0), Si(4, m, n, v, i, j, k, 0.0)};
            worst = std::max({worst, std::abs(pij + pjk - si[0] - si[2]),
                              std::abs(si[1] - pij - pjk - si[3])});
            ++checked;
          }
        }
      }
    }
  }
  char detail[80];
  std::snprintf(detail, sizeof detail, "%d triples, max residual %.3g", checked, worst);
  return {"si-identities", checked > 0 && worst <= 1e-9, detail};
}

SelfcheckItem CheckNormalization(const std::vector<SentenceStore>& corpora) {
  double worst = 0.0;
  auto stores = corpora;
  stores.push_back({5, {}});
  for (const auto& store : stores) {
    const auto stats = CountTripleMarginals(store, {.window = kWindow});
    const auto index = InvertedIndex::Build(store);
    for (double alpha : {1e-3, 1e-5}) {
      for (Slot slot : kAllSlots) {
        const double sum = NormalizationCheck(store, index, stats, slot, alpha);
        worst = std::max(worst, std::abs(sum - 1.0));
      }
    }
  }
  char detail[64];
  std::snprintf(detail, sizeof detail, "max |sum - 1| %.3g", worst);
  return {"normalization", worst <= 1e-9, detail};
}

SelfcheckItem CheckRidge(std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "selfcheck", {1}));
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = static_cast<Eigen::Index>(1 + UniformIndex(rng, 12));
    const auto rows = static_cast<Eigen::Index>(1 + UniformIndex(rng, 30));
    const double lambda = std::pow(10.0, -6.0 + static_cast<double>(trial % 7));
    RowMatrix a(rows, d);
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) a(r, c) = UniformReal(rng, -1, 1);
      b[r] = UniformReal(rng, -2, 2);
    }
    const auto x = SolveRidgeNormalEquations(a, b, lambda);
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(rows + d, d);
    aug.topRows(rows) = a;
    aug.bottomRows(d).diagonal().setConstant(std::sqrt(lambda));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows + d);
    rhs.head(rows) = b;
    const Eigen::VectorXd ref = aug.colPivHouseholderQr().solve(rhs);
    worst = std::max(worst, (x - ref).norm() / std::max(1.0, ref.norm()));
  }
  char detail[64];
  std::snprintf(detail, sizeof detail, "max relative error %.3g", worst);
  return {"ridge", worst <= 1e-6, detail};
}

SelfcheckItem CheckSpearman(std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "selfcheck", {2}));
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + UniformIndex(rng, 20);
    std::vector<double> a(n), b(n);
    for (std::size_t p = 0; p < n; ++p) {
      a[p] = static_cast<double>(UniformIndex(rng, trial % 2 ? 4 : 1000));
      b[p] = static_cast<double>(UniformIndex(rng, 1000));
    }
    a[0] = -1.0;  // never constant
    b[0] = -1.0;
    // Definitional ranks: count strictly smaller values, average the ties.
    const auto ranks = [&](const std::vector<double>& v) {
      std::vector<double> r(n);
      for (std::size_t p = 0; p < n; ++p) {
        double less = 0.0, same = 0.0;
        for (double w : v) {
          less += w < v[p];
          same += w == v[p];
        }
        r[p] = less + (same + 1.0) / 2.0;
      }
      return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      sab += (ra[p] - ma) * (rb[p] - mb);
      saa += (ra[p] - ma) * (ra[p] - ma);
      sbb += (rb[p] - mb) * (rb[p] - mb);
    }
    worst = std::max(worst, std::abs(Spearman(a, b) - sab / std::sqrt(saa * sbb)));
  }
  char detail[64];
  std::snprintf(detail, sizeof detail, "max |diff| %.3g", worst);
  return {"spearman", worst <= 1e-12, detail};
}

}  // namespace

std::vector<SelfcheckItem> RunSelfcheck(std::uint64_t seed) {
  const auto corpora = Corpora(seed);
  const std::pair<const char*, std::function<SelfcheckItem()>> checks[] = {
      {"counting", [&] { return CheckCounting(corpora); }},
      {"si-identities", [&] { return CheckIdentities(corpora); }},
      {"normalization", [&] { return CheckNormalization(corpora); }},
      {"ridge", [&] { return CheckRidge(seed); }},
      {"spearman", [&] { return CheckSpearman(seed); }},
  };
  std::vector<SelfcheckItem> out;
  for (const auto& [name, check] : checks) {
    try {
      out.push_back(check());
    } catch (const Error& e) {
      out.push_back({name, false, e.code() + ": " + e.what()});
    }
  }
  return out;
}

}  // namespace grv
