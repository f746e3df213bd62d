#include "miest/extrapolate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "miest/error.hpp"
#include "miest/plugin.hpp"

namespace miest {

namespace {

std::size_t subsample_size(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

std::uint64_t alphabet(std::span<const Column> channel) {
  std::uint64_t size = 1;
  for (const auto& c : channel) {
    if (c.levels == 0) throw Error(ErrorCode::InvalidArgument, "column with zero levels");
    size *= c.levels;
    if (size > (std::uint64_t{1} << 24)) {
      throw Error(ErrorCode::InvalidArgument, "channel alphabet too large");
    }
  }
  return size;
}

// Per-column data prepared once per extrapolation.
struct PreparedColumn {
  std::uint32_t levels = 0;
  std::vector<std::uint32_t> order;  // continuous, per-subsample mode
  std::vector<Symbol> symbols;       // discrete or quantize-once mode
  bool requantize = false;
};

PreparedColumn prepare(const Column& c, QuantizationMode mode) {
  PreparedColumn p;
  p.levels = c.levels;
  if (c.discrete) {
    for (auto s : c.symbols) {
      if (s >= c.levels) throw Error(ErrorCode::InvalidArgument, "symbol exceeds its level count");
    }
    p.symbols.assign(c.symbols.begin(), c.symbols.end());
  } else if (mode == QuantizationMode::Once) {
    p.symbols = equal_population_quantize(c.values, c.levels).symbols;
  } else {
    for (double v : c.values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "cannot quantize non-finite value");
    }
    p.order = stable_order(c.values);
    p.requantize = true;
  }
  return p;
}

// Accumulates the mixed-radix channel code of every drawn position.
void encode_channel(const std::vector<PreparedColumn>& channel,
                    std::span<const std::uint32_t> drawn, std::span<const std::uint8_t> in_draw,
                    std::vector<std::uint32_t>& code) {
  for (auto pos : drawn) code[pos] = 0;
  const std::size_t n = drawn.size();
  for (const auto& col : channel) {
    if (col.requantize) {
      std::size_t rank = 0;
      for (auto pos : col.order) {
        if (!in_draw[pos]) continue;
        code[pos] = code[pos] * col.levels + rank_symbol(rank++, n, col.levels);
      }
    } else {
      for (auto pos : drawn) code[pos] = code[pos] * col.levels + col.symbols[pos];
    }
  }
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::size_t SubsampleSchedule::total_trials() const noexcept {
  return std::accumulate(trials.begin(), trials.end(), std::size_t{0}) + (include_full ? 1 : 0);
}

void SubsampleSchedule::validate() const {
  if (fractions.empty()) throw Error(ErrorCode::InvalidArgument, "schedule has no fractions");
  if (fractions.size() != trials.size()) {
    throw Error(ErrorCode::InvalidArgument, "schedule needs one trial count per fraction");
  }
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    if (!(fractions[k] > 0.0 && fractions[k] <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "schedule fractions must lie in (0, 1]");
    }
    if (k > 0 && !(fractions[k] > fractions[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "schedule fractions must be strictly increasing");
    }
    if (trials[k] == 0) throw Error(ErrorCode::InvalidArgument, "schedule trial counts must be >= 1");
  }
}

SubsampleSchedule make_schedule(double f1, double f3, std::size_t t1, bool include_full) {
  if (!(f1 > 0.0 && f1 < f3 && f3 <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "schedule needs 0 < f1 < f3 <= 1");
  }
  if (t1 < 2) throw Error(ErrorCode::InvalidArgument, "schedule needs t1 >= 2");
  const double f2 = 2.0 * f1 * f3 / (f1 + f3);
  SubsampleSchedule s;
  s.fractions = {f1, f2, f3};
  for (double f : s.fractions) {
    const double ratio = f1 / f;
    const double t = std::floor(static_cast<double>(t1) * ratio * ratio + 1e-9);
    s.trials.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(t)));
  }
  s.include_full = include_full;
  return s;
}

LineFit fit_line(std::span<const ExtrapolationPoint> points) {
  if (points.empty()) throw Error(ErrorCode::DegenerateFit, "no points to fit");
  const double n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : points) {
    mx += p.inverse_size;
    my += p.mi_bits;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    const double dx = p.inverse_size - mx;
    sxx += dx * dx;
    sxy += dx * (p.mi_bits - my);
  }
  const bool distinct = std::any_of(points.begin(), points.end(), [&](const auto& p) {
    return p.inverse_size != points.front().inverse_size;
  });
  if (!distinct || sxx <= 0.0) {
    throw Error(ErrorCode::DegenerateFit, "fit needs at least two distinct sample sizes");
  }
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

ExtrapolationResult fit_points(std::vector<ExtrapolationPoint> points, std::uint32_t b) {
  const LineFit fit = fit_line(points);
  double smallest = 0.0;
  for (const auto& p : points) {
    if (!(p.inverse_size > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "inverse sample sizes must be positive");
    }
    smallest = std::max(smallest, p.inverse_size);
  }
  std::vector<double> at_smallest;
  for (const auto& p : points) {
    if (p.inverse_size == smallest) at_smallest.push_back(p.mi_bits);
  }
  ExtrapolationResult r;
  r.b = b;
  r.points = std::move(points);
  r.intercept_bits = fit.intercept;
  r.slope_bits_samples = fit.slope;
  r.error_bar_bits = sample_std(at_smallest);
  return r;
}

std::vector<std::uint32_t> draw_subsample(std::size_t n, std::size_t count, Rng& rng) {
  if (count > n) throw Error(ErrorCode::InvalidArgument, "subsample larger than sample");
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t fraction, std::size_t trial) noexcept {
  return derive_seed(seed, {fraction, trial});
}

ExtrapolationResult extrapolate(std::span<const Column> a, std::span<const Column> b,
                                std::uint32_t nominal_b, const SubsampleSchedule& sched,
                                std::uint64_t seed, const ExtrapolationOptions& options) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "empty channel");
  sched.validate();
  const std::size_t n = a.front().size();
  for (const auto* ch : {&a, &b}) {
    for (const auto& c : *ch) {
      if (c.size() != n) throw Error(ErrorCode::InvalidArgument, "columns differ in length");
    }
  }
  const std::uint64_t rows = alphabet(a);
  const std::uint64_t cols = alphabet(b);
  const std::size_t smallest = subsample_size(sched.fractions.front(), n);
  if (smallest < std::max(rows, cols)) {
    throw Error(ErrorCode::InsufficientSamples,
                "sample of " + std::to_string(n) + " gives subsamples of " +
                    std::to_string(smallest) + ", fewer than the " +
                    std::to_string(std::max(rows, cols)) + " levels to fill");
  }
  if (rows * cols > (std::uint64_t{1} << 26)) {
    throw Error(ErrorCode::InvalidArgument, "joint alphabet too large");
  }

  std::vector<PreparedColumn> pa;
  std::vector<PreparedColumn> pb;
  for (const auto& c : a) pa.push_back(prepare(c, options.mode));
  for (const auto& c : b) pb.push_back(prepare(c, options.mode));

  std::vector<std::uint8_t> in_draw(n, 0);
  std::vector<std::uint32_t> code_a(n, 0);
  std::vector<std::uint32_t> code_b(n, 0);
  std::vector<std::uint32_t> counts(rows * cols, 0);
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);

  std::vector<ExtrapolationPoint> points;
  points.reserve(sched.total_trials());

  auto run_trial = [&](std::span<const std::uint32_t> drawn) {
    for (auto pos : drawn) in_draw[pos] = 1;
    encode_channel(pa, drawn, in_draw, code_a);
    encode_channel(pb, drawn, in_draw, code_b);
    std::fill(counts.begin(), counts.end(), 0u);
    for (auto pos : drawn) ++counts[code_a[pos] * cols + code_b[pos]];
    for (auto pos : drawn) in_draw[pos] = 0;
    const double mi = plugin_mi_counts(counts, rows, cols, drawn.size());
    points.push_back({1.0 / static_cast<double>(drawn.size()), mi});
  };

  for (std::size_t k = 0; k < sched.fractions.size(); ++k) {
    const std::size_t m = subsample_size(sched.fractions[k], n);
    for (std::size_t t = 0; t < sched.trials[k]; ++t) {
      Rng rng(trial_seed(seed, k, t));
      run_trial(draw_subsample(n, m, rng));
    }
  }
  if (sched.include_full) run_trial(all);

  return fit_points(std::move(points), nominal_b);
}

ExtrapolationResult extrapolate_pair(std::span<const double> x, std::span<const double> y,
                                     std::uint32_t levels, const SubsampleSchedule& sched,
                                     std::uint64_t seed, const ExtrapolationOptions& options) {
  const Column a[] = {Column::continuous(x, levels)};
  const Column b[] = {Column::continuous(y, levels)};
  return extrapolate(a, b, levels, sched, seed, options);
}

}  // namespace miest
