#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "miest/quantize.hpp"
#include "miest/rng.hpp"

namespace miest {

// Subsample fractions and how many independent draws to take at each.
struct SubsampleSchedule {
  std::vector<double> fractions;       // strictly increasing, in (0, 1]
  std::vector<std::size_t> trials;     // one count per fraction
  bool include_full = true;            // one extra trial on the whole sample

  std::size_t total_trials() const noexcept;
  void validate() const;
};

// Three fractions with 1/f evenly spaced and trials proportional to 1/f^2.
SubsampleSchedule make_schedule(double f1, double f3, std::size_t t1, bool include_full = true);

struct ExtrapolationPoint {
  double inverse_size;
  double mi_bits;
};

struct ExtrapolationResult {
  std::uint32_t b = 0;                  // nominal quantization level
  std::vector<ExtrapolationPoint> points;
  double intercept_bits = 0.0;          // I_inf(b)
  double slope_bits_samples = 0.0;      // A(b)
  double error_bar_bits = 0.0;          // spread at the smallest subsample
};

struct LineFit {
  double intercept;
  double slope;
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const ExtrapolationPoint> points);

// Fit hook: builds a result from already-measured points. The error bar is
// the sample standard deviation of the estimates at the largest inverse size.
ExtrapolationResult fit_points(std::vector<ExtrapolationPoint> points, std::uint32_t b);

// One input feeding an estimation channel: either a continuous column that is
// re-quantized at `levels` inside every draw, or a pre-quantized column.
struct Column {
  std::span<const double> values;
  std::span<const Symbol> symbols;
  std::uint32_t levels = 0;
  bool discrete = false;

  static Column continuous(std::span<const double> v, std::uint32_t levels) {
    return Column{v, {}, levels, false};
  }
  static Column discrete_symbols(std::span<const Symbol> s, std::uint32_t levels) {
    return Column{{}, s, levels, true};
  }
  static Column discrete_symbols(const QuantizedVector& q) {
    return Column{{}, q.symbols, q.levels, true};
  }
  std::size_t size() const noexcept { return discrete ? symbols.size() : values.size(); }
};

enum class QuantizationMode {
  PerSubsample,  // re-quantize inside every draw
  Once,          // quantize the full sample, then subsample symbols
};

struct ExtrapolationOptions {
  QuantizationMode mode = QuantizationMode::PerSubsample;
};

// `count` distinct indices from [0, n), sorted ascending (partial
// Fisher-Yates).
std::vector<std::uint32_t> draw_subsample(std::size_t n, std::size_t count, Rng& rng);

// Seed of trial `trial` at fraction index `fraction` of an extrapolation
// seeded with `seed`. The full-sample point uses fraction index = #fractions.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t fraction, std::size_t trial) noexcept;

// Naive MI between the product channel of `a` and the product channel of `b`
// over the subsample schedule, then the 1/N fit. `nominal_b` is recorded as
// the result's level.
ExtrapolationResult extrapolate(std::span<const Column> a, std::span<const Column> b,
                                std::uint32_t nominal_b, const SubsampleSchedule& sched,
                                std::uint64_t seed, const ExtrapolationOptions& options = {});

// Two continuous vectors, both at `levels`.
ExtrapolationResult extrapolate_pair(std::span<const double> x, std::span<const double> y,
                                     std::uint32_t levels, const SubsampleSchedule& sched,
                                     std::uint64_t seed,
                                     const ExtrapolationOptions& options = {});

}  // namespace miest
