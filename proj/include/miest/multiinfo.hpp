#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "miest/calibrate.hpp"
#include "miest/extrapolate.hpp"

namespace miest {

struct MultiInfoOptions {
  // Level cap for the final pairwise term of the chain. Defaults to the
  // level used for the other terms.
  std::optional<std::uint32_t> inner_pair_cap;
  ExtrapolationOptions extrapolation;
};

struct MultiInfoEstimate {
  double value_bits = 0.0;
  double error_bar_bits = 0.0;   // root-sum-square of the term error bars
  std::vector<std::size_t> order;
  std::vector<MIEstimate> terms; // I(y_order[k]; y_order[k+1..])
};

// Chain-rule estimate of the multi-information of xs. Every term is a full
// per-level scan (2..b) of one variable against the product of the remaining
// tail. `ids` label the inputs for seeding (defaults to positions); term seeds
// depend only on which ids take part, so relabeling inputs together with
// their ids permutes nothing but the output order.
MultiInfoEstimate estimate_multiinformation(std::span<const std::span<const double>> xs,
                                            std::span<const std::size_t> order, std::uint32_t b,
                                            const SubsampleSchedule& sched, std::uint64_t seed,
                                            const MultiInfoOptions& options = {},
                                            std::span<const std::uint64_t> ids = {});

struct TripletEstimate {
  // compositions[p] = I(y_p; rest) + I(pair of the other two).
  std::array<double, 3> compositions{};
  std::array<double, 3> error_bars{};
  double mean_bits = 0.0;
  double spread_bits = 0.0;  // max |compositions[a] - compositions[b]|
  std::array<MultiInfoEstimate, 3> chains;
};

inline constexpr std::uint32_t kDefaultTripletLevelCap = 4;

TripletEstimate estimate_triplet(std::array<std::span<const double>, 3> xs, std::uint32_t b,
                                 const SubsampleSchedule& sched, std::uint32_t b_star_triplet,
                                 std::uint64_t seed, const MultiInfoOptions& options = {},
                                 std::array<std::uint64_t, 3> ids = {0, 1, 2});

struct ConsistencyCheck {
  bool pass = false;
  double spread_bits = 0.0;
  double max_error_bar = 0.0;
  std::array<double, 3> values{};
};

// Passes when the spread is within twice the largest composition error bar.
ConsistencyCheck consistency_check(const TripletEstimate& t);

// Fixed-level chain-rule intercept (no level selection) used by triplet
// calibration: I(x0; x1 x2) at (b, b^2) plus I(x1; x2) at (b, b).
double fixed_level_triplet_intercept(std::array<std::span<const double>, 3> xs, std::uint32_t b,
                                     const SubsampleSchedule& sched, std::uint64_t seed,
                                     const ExtrapolationOptions& options = {});

}  // namespace miest
