#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace miest {

using Symbol = std::uint32_t;

// A variable reduced to `levels` discrete symbols in [0, levels).
struct QuantizedVector {
  std::uint32_t levels = 0;
  std::vector<Symbol> symbols;

  std::size_t size() const noexcept { return symbols.size(); }
};

// Positions of x sorted by (value, position). The stable rank of x[order[r]]
// is r.
std::vector<std::uint32_t> stable_order(std::span<const double> x);

// Equal-population quantization: the element of stable rank r gets symbol
// floor(r * levels / N). Bin sizes differ by at most one and lower bins take
// the remainder. Depends on x only through ranks, so any strictly increasing
// transform of x leaves the result unchanged.
QuantizedVector equal_population_quantize(std::span<const double> x, std::uint32_t levels);

// Symbol of stable rank r among n elements at the given level count.
inline Symbol rank_symbol(std::size_t rank, std::size_t n, std::uint32_t levels) noexcept {
  return static_cast<Symbol>(static_cast<std::uint64_t>(rank) * levels / n);
}

// Product alphabet: symbol = a * b.levels + b, levels = a.levels * b.levels.
QuantizedVector combine(const QuantizedVector& a, const QuantizedVector& b);

// Pre-quantized integer data (e.g. ratings). Validates every value is an
// integer in [0, levels).
QuantizedVector passthrough(std::span<const double> x, std::uint32_t levels);

}  // namespace miest
