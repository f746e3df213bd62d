#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miest/baseline.hpp"
#include "miest/calibrate.hpp"
#include "miest/dataset.hpp"
#include "miest/multiinfo.hpp"

namespace miest {

struct BatchConfig {
  double f1 = 0.7;
  double f3 = 0.9;
  std::size_t t1 = 21;
  bool include_full = true;
  std::uint32_t b_max = 10;
  double tolerance_bits = 0.01;
  std::size_t min_joint_samples = 200;
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::size_t probe_pairs = 10000;
  std::size_t probe_triplets = 10000;
  std::size_t baseline_tuples = 10000;
  std::size_t triplet_budget = 5000;
  // > 0: data are integer symbols in [0, discrete_levels), no quantization.
  std::uint32_t discrete_levels = 0;
  QuantizationMode quantization = QuantizationMode::PerSubsample;
  std::optional<std::uint32_t> inner_pair_cap;

  SubsampleSchedule schedule() const;
  CalibrationOptions calibration_options(ProbeOrder order) const;
  void validate() const;
};

CalibrationReport calibrate(const Dataset& ds, const BatchConfig& cfg, ProbeOrder order);

// Seed of the pair (a, b), a < b. Level l of the pair is seeded with
// derive_seed(pair_seed(...), {l}).
std::uint64_t pair_seed(std::uint64_t global, std::size_t a, std::size_t b) noexcept;

// Full pipeline for one dataset pair on its joint sample. Throws
// InsufficientSamples below min_joint_samples or the schedule's occupancy
// guard.
MIEstimate estimate_dataset_pair(const Dataset& ds, std::size_t a, std::size_t b,
                                 const BatchConfig& cfg, std::uint32_t b_star);

struct PairEntry {
  std::size_t a = 0;
  std::size_t b = 0;
  bool estimated = false;
  double value_bits = 0.0;
  std::uint32_t chosen_b = 0;
  double error_bar_bits = 0.0;
  std::size_t n_joint = 0;
  std::string skip_reason;  // empty when estimated
};

// Symmetric matrix of pair estimates with an undefined diagonal.
class MIMatrix {
public:
  MIMatrix(std::vector<std::string> names, std::vector<PairEntry> entries);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<PairEntry>& entries() const noexcept { return entries_; }
  const PairEntry& entry(std::size_t a, std::size_t b) const;
  // nullopt on the diagonal and for skipped pairs.
  std::optional<double> value(std::size_t a, std::size_t b) const;
  // Mean over estimated pairs only; nullopt when there are none.
  std::optional<double> mean_value() const;
  std::vector<PairEstimate> pair_estimates() const;

  static std::size_t pair_index(std::size_t a, std::size_t b, std::size_t n) noexcept;

private:
  std::vector<std::string> names_;
  std::vector<PairEntry> entries_;  // i < j, row-major upper triangle
};

MIMatrix estimate_all_pairs(const Dataset& ds, const BatchConfig& cfg, std::uint32_t b_star);

struct ShuffleSummary {
  std::size_t n_pairs = 0;
  std::size_t n_failed = 0;
  double mean_bits = 0.0;
  double std_bits = 0.0;
  double sem_bits = 0.0;
  double fraction_beyond_3_error_bars = 0.0;
  std::vector<double> values;
  std::vector<double> error_bars;
};

// Pipeline on random shuffled pairs at level cap `b_star`.
ShuffleSummary verify_shuffled(const Dataset& ds, const BatchConfig& cfg, std::uint32_t b_star,
                               std::size_t n_pairs);

struct StabilityReport {
  double fraction = 0.0;
  std::size_t n_compared = 0;
  std::size_t n_excluded = 0;
  std::vector<double> differences;  // reduced - full, per compared pair
  double share_above_0_1_bits = 0.0;
};

// Re-estimates every estimated pair of `full` on a random `fraction` of its
// joint sample, keeping the pair's level seeds.
StabilityReport verify_subsample_stability(const Dataset& ds, const BatchConfig& cfg,
                                           const MIMatrix& full, std::uint32_t b_star,
                                           double fraction = 2.0 / 3.0);

struct Group {
  std::string label;
  std::vector<std::size_t> members;
};

// One group per line, "label: name1,name2,...". Blank lines and '#'
// comments are ignored.
std::vector<Group> parse_groups(std::istream& in, const Dataset& ds);

struct SortedMatrix {
  std::vector<std::size_t> order;           // variables in display order
  std::vector<std::string> group_of;        // label per display position
  std::vector<std::size_t> group_starts;    // first display position per group
  std::vector<std::string> group_labels;
  double threshold_bits = 0.0;
  std::vector<double> rendered;             // n x n, display order, below-threshold = 0
};

// Groups in order of first appearance; unlabeled variables go to a trailing
// group with an empty label.
SortedMatrix sorted_matrix(const MIMatrix& m, std::span<const Group> groups);

struct TripletRecord {
  std::array<std::size_t, 3> vars{};
  std::size_t n_joint = 0;
  std::optional<TripletEstimate> estimate;
  ConsistencyCheck consistency;
  std::string skip_reason;
};

std::size_t triplet_count(std::size_t group_size) noexcept;

// Every triplet of `members` (sorted by variable index) at level b_triplet.
// Throws BudgetExceeded when C(g, 3) > cfg.triplet_budget.
std::vector<TripletRecord> estimate_group_triplets(const Dataset& ds,
                                                   std::span<const std::size_t> members,
                                                   const BatchConfig& cfg,
                                                   std::uint32_t b_triplet);

// Final values of every pair inside `members`; skipped pairs are left out.
std::vector<double> group_pair_values(const Dataset& ds, std::span<const std::size_t> members,
                                      const BatchConfig& cfg, std::uint32_t b_star);

// Non-specific baselines: random unshuffled tuples from the whole dataset.
std::vector<double> baseline_pair_values(const Dataset& ds, const BatchConfig& cfg,
                                         std::uint32_t b_star, std::size_t count);
std::vector<double> baseline_triplet_values(const Dataset& ds, const BatchConfig& cfg,
                                            std::uint32_t b_triplet, std::size_t count);

struct GroupSummary {
  std::string label;
  std::vector<std::size_t> members;
  double mean_triplet_bits = 0.0;
  double mean_pair_bits = 0.0;
  double exceedance_triplet = 0.0;
  double exceedance_pair = 0.0;
  double baseline_triplet_mean = 0.0;
  double baseline_pair_mean = 0.0;
};

// Share of group values strictly above the baseline mean.
double exceedance(std::span<const double> values, double baseline_mean);

GroupSummary group_summary(const Group& group, std::span<const double> triplet_values,
                           std::span<const double> pair_values,
                           std::span<const double> baseline_triplets,
                           std::span<const double> baseline_pairs);

}  // namespace miest
