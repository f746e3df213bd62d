#include "miest/multiinfo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "miest/error.hpp"

namespace miest {

namespace {

void check_occupancy(const SubsampleSchedule& sched, std::size_t n, std::uint32_t b,
                     std::size_t tail_size) {
  sched.validate();
  std::uint64_t needed = 1;
  for (std::size_t i = 0; i < tail_size; ++i) needed *= b;
  const auto smallest =
      static_cast<std::uint64_t>(std::floor(sched.fractions.front() * static_cast<double>(n) + 1e-9));
  if (smallest < needed) {
    throw Error(ErrorCode::InsufficientSamples,
                "smallest subsample of " + std::to_string(smallest) + " cannot occupy the " +
                    std::to_string(needed) + "-symbol joint alphabet");
  }
}

}  // namespace

MultiInfoEstimate estimate_multiinformation(std::span<const std::span<const double>> xs,
                                            std::span<const std::size_t> order, std::uint32_t b,
                                            const SubsampleSchedule& sched, std::uint64_t seed,
                                            const MultiInfoOptions& options,
                                            std::span<const std::uint64_t> ids) {
  const std::size_t r = xs.size();
  if (r < 2) throw Error(ErrorCode::InvalidArgument, "multi-information needs at least 2 variables");
  if (b < 2) throw Error(ErrorCode::InvalidArgument, "quantization level must be at least 2");
  std::vector<std::size_t> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  bool is_permutation = sorted.size() == r;
  for (std::size_t i = 0; is_permutation && i < r; ++i) is_permutation = sorted[i] == i;
  if (!is_permutation) {
    throw Error(ErrorCode::InvalidArgument, "order is not a permutation of the inputs");
  }
  for (const auto& x : xs) {
    if (x.size() != xs.front().size()) {
      throw Error(ErrorCode::InvalidArgument, "inputs differ in length");
    }
  }
  std::vector<std::uint64_t> labels(r);
  if (ids.empty()) {
    std::iota(labels.begin(), labels.end(), std::uint64_t{0});
  } else if (ids.size() != r) {
    throw Error(ErrorCode::InvalidArgument, "one id per input required");
  } else {
    labels.assign(ids.begin(), ids.end());
  }
  check_occupancy(sched, xs.front().size(), b, r - 1);

  MultiInfoEstimate out;
  out.order.assign(order.begin(), order.end());
  double var_sum = 0.0;
  for (std::size_t k = 0; k + 1 < r; ++k) {
    const std::size_t head_pos = order[k];
    std::vector<std::size_t> tail(order.begin() + static_cast<std::ptrdiff_t>(k + 1), order.end());
    std::sort(tail.begin(), tail.end(),
              [&](std::size_t a, std::size_t c) { return labels[a] < labels[c]; });

    std::uint64_t term_seed = derive_seed(seed, {tail.size(), labels[head_pos]});
    for (auto t : tail) term_seed = derive_seed(term_seed, {labels[t]});

    const Column head[] = {Column::continuous(xs[head_pos], 0)};
    std::vector<Column> tail_cols;
    for (auto t : tail) tail_cols.push_back(Column::continuous(xs[t], 0));

    const bool last = k + 2 == r;
    const std::uint32_t cap = last ? options.inner_pair_cap.value_or(b) : b;
    out.terms.push_back(estimate_mi(head, tail_cols, cap, sched, term_seed, options.extrapolation));
    out.value_bits += out.terms.back().value_bits;
    var_sum += out.terms.back().error_bar_bits * out.terms.back().error_bar_bits;
  }
  out.error_bar_bits = std::sqrt(var_sum);
  return out;
}

TripletEstimate estimate_triplet(std::array<std::span<const double>, 3> xs, std::uint32_t b,
                                 const SubsampleSchedule& sched, std::uint32_t b_star_triplet,
                                 std::uint64_t seed, const MultiInfoOptions& options,
                                 std::array<std::uint64_t, 3> ids) {
  if (b > b_star_triplet) {
    throw Error(ErrorCode::InvalidArgument, "level " + std::to_string(b) +
                                                " exceeds the triplet level cap " +
                                                std::to_string(b_star_triplet));
  }
  TripletEstimate t;
  for (std::size_t p = 0; p < 3; ++p) {
    std::array<std::size_t, 2> rest{(p + 1) % 3, (p + 2) % 3};
    if (ids[rest[1]] < ids[rest[0]]) std::swap(rest[0], rest[1]);
    const std::size_t order[] = {p, rest[0], rest[1]};
    t.chains[p] = estimate_multiinformation(xs, order, b, sched, seed, options, ids);
    t.compositions[p] = t.chains[p].value_bits;
    t.error_bars[p] = t.chains[p].error_bar_bits;
  }
  t.mean_bits = (t.compositions[0] + t.compositions[1] + t.compositions[2]) / 3.0;
  t.spread_bits = std::max({std::abs(t.compositions[0] - t.compositions[1]),
                            std::abs(t.compositions[0] - t.compositions[2]),
                            std::abs(t.compositions[1] - t.compositions[2])});
  return t;
}

ConsistencyCheck consistency_check(const TripletEstimate& t) {
  ConsistencyCheck c;
  c.values = t.compositions;
  c.spread_bits = t.spread_bits;
  c.max_error_bar = *std::max_element(t.error_bars.begin(), t.error_bars.end());
  c.pass = c.spread_bits <= 2.0 * c.max_error_bar;
  return c;
}

double fixed_level_triplet_intercept(std::array<std::span<const double>, 3> xs, std::uint32_t b,
                                     const SubsampleSchedule& sched, std::uint64_t seed,
                                     const ExtrapolationOptions& options) {
  const Column pivot[] = {Column::continuous(xs[0], b)};
  const Column rest[] = {Column::continuous(xs[1], b), Column::continuous(xs[2], b)};
  const Column inner_head[] = {Column::continuous(xs[1], b)};
  const Column inner_tail[] = {Column::continuous(xs[2], b)};
  const auto outer = extrapolate(pivot, rest, b, sched, derive_seed(seed, {0}), options);
  const auto inner = extrapolate(inner_head, inner_tail, b, sched, derive_seed(seed, {1}), options);
  return outer.intercept_bits + inner.intercept_bits;
}

}  // namespace miest
