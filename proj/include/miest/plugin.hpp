#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "miest/quantize.hpp"

namespace miest {

// Counts of co-occurring symbols; row-major rows x cols.
struct ContingencyTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::uint64_t at(std::size_t r, std::size_t c) const { return counts[r * cols + c]; }
  std::vector<std::uint64_t> row_sums() const;
  std::vector<std::uint64_t> col_sums() const;
  ContingencyTable transposed() const;
};

ContingencyTable tabulate(const QuantizedVector& a, const QuantizedVector& b);

// Plug-in mutual information of the empirical table, in bits.
double plugin_mi(const ContingencyTable& t);

// Plug-in entropy of a histogram, in bits.
double plugin_entropy(std::span<const std::uint64_t> counts);

// Same value as plugin_mi over a raw row-major count buffer.
double plugin_mi_counts(std::span<const std::uint32_t> counts, std::size_t rows,
                        std::size_t cols, std::uint64_t total);

// Explicit probability table over a product alphabet; the last variable
// varies fastest.
struct JointTable {
  std::vector<std::size_t> dims;
  std::vector<double> probs;

  std::size_t arity() const noexcept { return dims.size(); }
};

// Marginal distribution over the variables in `keep` (in the given order).
std::vector<double> marginal(const JointTable& jt, std::span<const std::size_t> keep);

double entropy_bits(std::span<const double> probs);

double exact_multiinformation(const JointTable& jt);

// I(y_{o[k]}; y_{o[k+1]}, ..., y_{o[r-1]}) for k = 0 .. r-2. The terms sum
// to the multi-information.
std::vector<double> exact_chain_terms(const JointTable& jt, std::span<const std::size_t> order);

}  // namespace miest
