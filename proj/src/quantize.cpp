#include "miest/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "miest/error.hpp"

namespace miest {

std::vector<std::uint32_t> stable_order(std::span<const double> x) {
  std::vector<std::uint32_t> order(x.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });
  return order;
}

QuantizedVector equal_population_quantize(std::span<const double> x, std::uint32_t levels) {
  if (levels == 0) throw Error(ErrorCode::InvalidArgument, "quantization needs at least one level");
  if (levels > x.size()) {
    throw Error(ErrorCode::InsufficientSamples,
                "cannot fill " + std::to_string(levels) + " levels with " +
                    std::to_string(x.size()) + " samples");
  }
  if (x.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "vector too long");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "cannot quantize non-finite value");
  }
  QuantizedVector q;
  q.levels = levels;
  q.symbols.resize(x.size());
  const auto order = stable_order(x);
  for (std::size_t r = 0; r < order.size(); ++r) {
    q.symbols[order[r]] = rank_symbol(r, x.size(), levels);
  }
  return q;
}

QuantizedVector combine(const QuantizedVector& a, const QuantizedVector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "combine: length mismatch");
  const std::uint64_t product = std::uint64_t{a.levels} * b.levels;
  if (product > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "combine: level product overflows");
  }
  QuantizedVector q;
  q.levels = static_cast<std::uint32_t>(product);
  q.symbols.resize(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) q.symbols[t] = a.symbols[t] * b.levels + b.symbols[t];
  return q;
}

QuantizedVector passthrough(std::span<const double> x, std::uint32_t levels) {
  if (levels == 0) throw Error(ErrorCode::InvalidArgument, "passthrough needs at least one level");
  QuantizedVector q;
  q.levels = levels;
  q.symbols.reserve(x.size());
  for (double v : x) {
    if (!(v >= 0.0) || v >= levels || std::floor(v) != v) {
      throw Error(ErrorCode::InvalidArgument,
                  "pre-quantized value " + std::to_string(v) + " is not an integer symbol below " +
                      std::to_string(levels));
    }
    q.symbols.push_back(static_cast<Symbol>(v));
  }
  return q;
}

}  // namespace miest
