#include "miest/plugin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "miest/error.hpp"

namespace miest {

namespace {

// n log2 n terms are accumulated as 128-bit fixed point with 60 fractional
// bits. Integer addition is exact and associative, so table sums do not
// depend on cell order (transposes and permutations give identical bits).
//
// log2 n is assembled from rounded logs of its prime factors. N*MI is then an
// integer combination of prime logs whose coefficients all vanish for an
// exactly independent table, so such tables give exactly zero.
using Fixed = __int128;
constexpr int kFractionBits = 60;
constexpr std::size_t kTableLimit = std::size_t{1} << 20;
constexpr std::uint64_t kFactorLimit = std::uint64_t{1} << 40;

Fixed to_fixed(long double v) { return static_cast<Fixed>(std::ldexp(v, kFractionBits)); }
double from_fixed(Fixed v) { return std::ldexp(static_cast<double>(v), -kFractionBits); }

Fixed log_prime(std::uint64_t p) { return to_fixed(std::log2(static_cast<long double>(p))); }

// Trial division; only used beyond the cached range.
Fixed log_factored(std::uint64_t n) {
  Fixed acc = 0;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      acc += log_prime(p);
      n /= p;
    }
  }
  if (n > 1) acc += log_prime(n);
  return acc;
}

Fixed n_log_n(std::uint64_t n) {
  thread_local std::vector<Fixed> table{0, 0};
  if (n < 2) return 0;
  if (n >= kTableLimit) {
    if (n >= kFactorLimit) return to_fixed(static_cast<long double>(n) * std::log2(static_cast<long double>(n)));
    return static_cast<Fixed>(n) * log_factored(n);
  }
  if (n >= table.size()) {
    const std::size_t grown =
        std::min<std::size_t>(kTableLimit, std::max<std::size_t>(n + 1, 2 * table.size()));
    // Smallest-prime-factor sieve, then log2 k = log2 spf + log2 (k / spf).
    std::vector<std::uint32_t> spf(grown, 0);
    for (std::size_t k = 2; k < grown; ++k) {
      if (spf[k] != 0) continue;
      for (std::size_t m = k; m < grown; m += k)
        if (spf[m] == 0) spf[m] = static_cast<std::uint32_t>(k);
    }
    std::vector<Fixed> lg(grown, 0);
    for (std::size_t k = 2; k < grown; ++k)
      lg[k] = spf[k] == k ? log_prime(k) : lg[spf[k]] + lg[k / spf[k]];
    table.resize(grown);
    for (std::size_t k = 2; k < grown; ++k) table[k] = static_cast<Fixed>(k) * lg[k];
  }
  return table[n];
}

double finish(Fixed n_times_bits, std::uint64_t total) {
  double v = from_fixed(n_times_bits) / static_cast<double>(total);
  if (v < 0.0 && v > -1e-12) v = 0.0;
  return v;
}

template <typename Count>
double mi_from_buffer(std::span<const Count> counts, std::size_t rows, std::size_t cols,
                      std::uint64_t total) {
  thread_local std::vector<std::uint64_t> row_sum;
  thread_local std::vector<std::uint64_t> col_sum;
  row_sum.assign(rows, 0);
  col_sum.assign(cols, 0);
  Fixed acc = n_log_n(total);
  for (std::size_t r = 0; r < rows; ++r) {
    const Count* row = counts.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::uint64_t n = row[c];
      if (n == 0) continue;
      acc += n_log_n(n);
      row_sum[r] += n;
      col_sum[c] += n;
    }
  }
  for (auto n : row_sum) acc -= n_log_n(n);
  for (auto n : col_sum) acc -= n_log_n(n);
  return finish(acc, total);
}

// Neumaier-compensated sum.
class StableSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::size_t table_size(const JointTable& jt) {
  std::size_t size = 1;
  for (auto d : jt.dims) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "joint table dimension of size 0");
    size *= d;
  }
  return size;
}

void validate(const JointTable& jt) {
  if (jt.dims.empty()) throw Error(ErrorCode::InvalidArgument, "joint table has no variables");
  if (jt.probs.size() != table_size(jt)) {
    throw Error(ErrorCode::InvalidArgument, "joint table size does not match its dimensions");
  }
  StableSum s;
  for (double p : jt.probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidArgument, "joint table has a negative or non-finite cell");
    }
    s.add(p);
  }
  if (std::abs(s.value() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "joint table is not normalized");
  }
}

}  // namespace

std::vector<std::uint64_t> ContingencyTable::row_sums() const {
  std::vector<std::uint64_t> s(rows, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) s[r] += at(r, c);
  return s;
}

std::vector<std::uint64_t> ContingencyTable::col_sums() const {
  std::vector<std::uint64_t> s(cols, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) s[c] += at(r, c);
  return s;
}

ContingencyTable ContingencyTable::transposed() const {
  ContingencyTable t;
  t.rows = cols;
  t.cols = rows;
  t.total = total;
  t.counts.resize(counts.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t.counts[c * rows + r] = at(r, c);
  return t;
}

ContingencyTable tabulate(const QuantizedVector& a, const QuantizedVector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "tabulate: length mismatch");
  if (a.size() == 0) throw Error(ErrorCode::EmptyData, "tabulate: empty vectors");
  ContingencyTable t;
  t.rows = a.levels;
  t.cols = b.levels;
  t.counts.assign(t.rows * t.cols, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.symbols[i] >= a.levels || b.symbols[i] >= b.levels) {
      throw Error(ErrorCode::InvalidArgument, "tabulate: symbol exceeds its level count");
    }
    ++t.counts[a.symbols[i] * t.cols + b.symbols[i]];
  }
  t.total = a.size();
  return t;
}

double plugin_mi(const ContingencyTable& t) {
  if (t.total == 0) throw Error(ErrorCode::EmptyData, "plugin_mi: empty table");
  if (t.counts.size() != t.rows * t.cols) {
    throw Error(ErrorCode::InvalidArgument, "plugin_mi: table shape mismatch");
  }
  const std::uint64_t sum = std::accumulate(t.counts.begin(), t.counts.end(), std::uint64_t{0});
  if (sum != t.total) throw Error(ErrorCode::InvalidArgument, "plugin_mi: total != sum of cells");
  return mi_from_buffer<std::uint64_t>(t.counts, t.rows, t.cols, t.total);
}

double plugin_mi_counts(std::span<const std::uint32_t> counts, std::size_t rows,
                        std::size_t cols, std::uint64_t total) {
  return mi_from_buffer<std::uint32_t>(counts, rows, cols, total);
}

double plugin_entropy(std::span<const std::uint64_t> counts) {
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw Error(ErrorCode::EmptyData, "plugin_entropy: all-zero histogram");
  Fixed acc = n_log_n(total);
  for (auto n : counts) acc -= n_log_n(n);
  return finish(acc, total);
}

std::vector<double> marginal(const JointTable& jt, std::span<const std::size_t> keep) {
  const std::size_t r = jt.arity();
  for (auto k : keep) {
    if (k >= r) throw Error(ErrorCode::InvalidArgument, "marginal: variable out of range");
  }
  std::size_t out_size = 1;
  for (auto k : keep) out_size *= jt.dims[k];
  std::vector<double> out(out_size, 0.0);

  std::vector<std::size_t> idx(r, 0);
  for (std::size_t cell = 0; cell < jt.probs.size(); ++cell) {
    std::size_t o = 0;
    for (auto k : keep) o = o * jt.dims[k] + idx[k];
    out[o] += jt.probs[cell];
    for (std::size_t d = r; d-- > 0;) {  // last variable fastest
      if (++idx[d] < jt.dims[d]) break;
      idx[d] = 0;
    }
  }
  return out;
}

double entropy_bits(std::span<const double> probs) {
  StableSum s;
  for (double p : probs) {
    if (p > 0.0) s.add(-p * std::log2(p));
  }
  return s.value();
}

double exact_multiinformation(const JointTable& jt) {
  validate(jt);
  StableSum s;
  for (std::size_t k = 0; k < jt.arity(); ++k) {
    const std::size_t keep[] = {k};
    s.add(entropy_bits(marginal(jt, keep)));
  }
  s.add(-entropy_bits(jt.probs));
  return std::max(0.0, s.value());
}

std::vector<double> exact_chain_terms(const JointTable& jt, std::span<const std::size_t> order) {
  validate(jt);
  const std::size_t r = jt.arity();
  std::vector<std::size_t> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() != r || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
      (r > 0 && sorted.back() >= r)) {
    throw Error(ErrorCode::InvalidArgument, "chain order is not a permutation of the variables");
  }
  std::vector<double> terms;
  for (std::size_t k = 0; k + 1 < r; ++k) {
    const std::size_t head[] = {order[k]};
    const std::span<const std::size_t> tail = order.subspan(k + 1);
    const std::span<const std::size_t> all = order.subspan(k);
    terms.push_back(entropy_bits(marginal(jt, head)) + entropy_bits(marginal(jt, tail)) -
                    entropy_bits(marginal(jt, all)));
  }
  return terms;
}

}  // namespace miest
