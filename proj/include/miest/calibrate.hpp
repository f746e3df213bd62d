#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>

#include "miest/dataset.hpp"
#include "miest/extrapolate.hpp"

namespace miest {

using LevelCurve = std::map<std::uint32_t, ExtrapolationResult>;

// Final estimate for one information term.
struct MIEstimate {
  double value_bits = 0.0;
  std::uint32_t chosen_b = 0;
  double error_bar_bits = 0.0;
  LevelCurve per_b;
  std::size_t n_joint = 0;
};

// Picks the last level whose intercept improves on the previous level by more
// than that level's error bar (level 2 when none does). Requires per_b to
// cover 2..b_star.
MIEstimate select_level(const LevelCurve& per_b, std::uint32_t b_star);

// Information between the product channel of `head` and the product channel
// of `tail`. Continuous columns are scanned at every level 2..max_level (their
// own `levels` field is ignored) and the level is chosen by select_level.
// When every column is discrete a single extrapolation is run at the columns'
// native alphabets. Level b is seeded with derive_seed(seed, {b}).
MIEstimate estimate_mi(std::span<const Column> head, std::span<const Column> tail,
                       std::uint32_t max_level, const SubsampleSchedule& sched,
                       std::uint64_t seed, const ExtrapolationOptions& options = {});

// Pairwise convenience over two continuous vectors.
MIEstimate estimate_pair(std::span<const double> x, std::span<const double> y,
                         std::uint32_t b_star, const SubsampleSchedule& sched,
                         std::uint64_t seed, const ExtrapolationOptions& options = {});

enum class ProbeOrder : int { Pairs = 2, Triplets = 3 };

struct LevelStats {
  double mean_bits = 0.0;
  double std_bits = 0.0;
  std::size_t count = 0;
};

struct CalibrationReport {
  ProbeOrder order = ProbeOrder::Pairs;
  std::map<std::uint32_t, LevelStats> per_level;
  std::optional<std::uint32_t> b_star;
  double tolerance_bits = 0.0;
  std::size_t probes = 0;

  // Throws CalibrationFailed when no level passed.
  std::uint32_t require_b_star() const;
};

struct CalibrationOptions {
  std::uint32_t b_max = 10;
  std::size_t probes = 10000;
  SubsampleSchedule schedule = make_schedule(0.7, 0.9, 21, true);
  std::uint64_t seed = 0;
  double tolerance_bits = 0.01;
  std::size_t min_joint_samples = 0;
  unsigned workers = 0;
  ExtrapolationOptions extrapolation;
};

inline constexpr std::size_t kMinCalibrationProbes = 30;

// Largest b such that every level 2..b has |mean| <= tolerance and
// |mean| <= 2 * std / sqrt(count).
std::optional<std::uint32_t> choose_b_star(const std::map<std::uint32_t, LevelStats>& per_level,
                                           double tolerance_bits);

// Shuffled-pair calibration: random pairs with one member permuted, fixed-level
// intercepts at every b in 2..b_max.
CalibrationReport determine_bstar(const Dataset& ds, const CalibrationOptions& options);

// Same for shuffled triplets through the chain-rule estimator.
CalibrationReport triplet_bstar(const Dataset& ds, const CalibrationOptions& options);

// Uniform draw of `count` distinct sorted k-subsets of [0, n); when count
// exceeds C(n, k) every subset is used and the list is cycled.
std::vector<std::vector<std::size_t>> draw_tuples(std::size_t n, std::size_t k,
                                                  std::size_t count, std::uint64_t seed);

}  // namespace miest
