#include "miest/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "miest/error.hpp"
#include "miest/multiinfo.hpp"
#include "miest/parallel.hpp"

namespace miest {

namespace {

constexpr std::uint64_t kTupleStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kLevelStream = 3;

std::uint64_t binomial_saturating(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  unsigned __int128 r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

std::vector<std::vector<std::size_t>> all_tuples(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> t(k);
  std::iota(t.begin(), t.end(), std::size_t{0});
  while (true) {
    out.push_back(t);
    std::size_t i = k;
    while (i > 0 && t[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++t[i - 1];
    for (std::size_t j = i; j < k; ++j) t[j] = t[j - 1] + 1;
  }
  return out;
}

LevelStats summarize(const std::vector<double>& v) {
  LevelStats s;
  s.count = v.size();
  if (v.empty()) return s;
  s.mean_bits = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean_bits) * (x - s.mean_bits);
    s.std_bits = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

void validate_options(const Dataset& ds, const CalibrationOptions& o, std::size_t arity) {
  if (o.b_max < 2) throw Error(ErrorCode::InvalidArgument, "b_max must be at least 2");
  if (ds.num_vars() < arity) {
    throw Error(ErrorCode::InvalidArgument,
                "calibration needs at least " + std::to_string(arity) + " variables");
  }
  if (o.probes < kMinCalibrationProbes) {
    throw Error(ErrorCode::InvalidArgument, "calibration needs at least " +
                                                std::to_string(kMinCalibrationProbes) +
                                                " probes (BelowMinimumProbes)");
  }
  o.schedule.validate();
}

std::size_t smallest_subsample(const SubsampleSchedule& s, std::size_t n) {
  return static_cast<std::size_t>(std::floor(s.fractions.front() * static_cast<double>(n) + 1e-9));
}

// Shuffles every column but the first, then evaluates `level_value` at every
// level whose occupancy guard holds. NaN marks skipped levels.
template <typename LevelValue>
CalibrationReport run_calibration(const Dataset& ds, const CalibrationOptions& o, ProbeOrder order,
                                  LevelValue level_value) {
  const std::size_t arity = static_cast<std::size_t>(order);
  validate_options(ds, o, arity);
  const auto tuples = draw_tuples(ds.num_vars(), arity, o.probes, derive_seed(o.seed, {kTupleStream}));
  const std::size_t n_levels = o.b_max - 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values(tuples.size() * n_levels, nan);

  parallel_for(tuples.size(), o.workers, [&](std::size_t p) {
    JointSample js = joint_sample(ds, tuples[p]);
    if (js.size() == 0 || js.size() < o.min_joint_samples) return;
    for (std::size_t c = 1; c < arity; ++c) {
      Rng rng(derive_seed(o.seed, {kShuffleStream, p, c}));
      js = shuffle_columns(js, c, rng);
    }
    const std::size_t smallest = smallest_subsample(o.schedule, js.size());
    for (std::uint32_t b = 2; b <= o.b_max; ++b) {
      std::uint64_t needed = b;
      if (order == ProbeOrder::Triplets) needed = std::uint64_t{b} * b;
      if (smallest < needed) break;
      values[p * n_levels + (b - 2)] =
          level_value(js, b, derive_seed(o.seed, {kLevelStream, p, b}));
    }
  });

  CalibrationReport report;
  report.order = order;
  report.tolerance_bits = o.tolerance_bits;
  report.probes = tuples.size();
  for (std::uint32_t b = 2; b <= o.b_max; ++b) {
    std::vector<double> v;
    for (std::size_t p = 0; p < tuples.size(); ++p) {
      const double x = values[p * n_levels + (b - 2)];
      if (!std::isnan(x)) v.push_back(x);
    }
    report.per_level[b] = summarize(v);
  }
  report.b_star = choose_b_star(report.per_level, o.tolerance_bits);
  return report;
}

}  // namespace

MIEstimate select_level(const LevelCurve& per_b, std::uint32_t b_star) {
  if (b_star < 2) throw Error(ErrorCode::InvalidArgument, "b_star must be at least 2");
  for (std::uint32_t b = 2; b <= b_star; ++b) {
    if (!per_b.count(b)) {
      throw Error(ErrorCode::InvalidArgument, "missing level " + std::to_string(b) + " in 2.." +
                                                  std::to_string(b_star));
    }
  }
  std::uint32_t chosen = 2;
  for (std::uint32_t b = 3; b <= b_star; ++b) {
    const auto& cur = per_b.at(b);
    const auto& prev = per_b.at(b - 1);
    if (cur.intercept_bits - prev.intercept_bits > cur.error_bar_bits) chosen = b;
  }
  MIEstimate est;
  est.chosen_b = chosen;
  est.value_bits = per_b.at(chosen).intercept_bits;
  est.error_bar_bits = per_b.at(chosen).error_bar_bits;
  est.per_b = per_b;
  return est;
}

MIEstimate estimate_mi(std::span<const Column> head, std::span<const Column> tail,
                       std::uint32_t max_level, const SubsampleSchedule& sched,
                       std::uint64_t seed, const ExtrapolationOptions& options) {
  if (head.empty() || tail.empty()) throw Error(ErrorCode::InvalidArgument, "empty channel");
  const bool all_discrete =
      std::all_of(head.begin(), head.end(), [](const Column& c) { return c.discrete; }) &&
      std::all_of(tail.begin(), tail.end(), [](const Column& c) { return c.discrete; });

  MIEstimate est;
  if (all_discrete) {
    const std::uint32_t native = head.front().levels;
    auto r = extrapolate(head, tail, native, sched, derive_seed(seed, {native}), options);
    est.value_bits = r.intercept_bits;
    est.error_bar_bits = r.error_bar_bits;
    est.chosen_b = native;
    est.per_b.emplace(native, std::move(r));
  } else {
    if (max_level < 2) throw Error(ErrorCode::InvalidArgument, "level cap must be at least 2");
    std::vector<Column> h(head.begin(), head.end());
    std::vector<Column> t(tail.begin(), tail.end());
    LevelCurve per_b;
    for (std::uint32_t b = 2; b <= max_level; ++b) {
      for (auto& c : h)
        if (!c.discrete) c.levels = b;
      for (auto& c : t)
        if (!c.discrete) c.levels = b;
      per_b.emplace(b, extrapolate(h, t, b, sched, derive_seed(seed, {b}), options));
    }
    est = select_level(per_b, max_level);
  }
  est.n_joint = head.front().size();
  return est;
}

MIEstimate estimate_pair(std::span<const double> x, std::span<const double> y,
                         std::uint32_t b_star, const SubsampleSchedule& sched,
                         std::uint64_t seed, const ExtrapolationOptions& options) {
  const Column a[] = {Column::continuous(x, 0)};
  const Column b[] = {Column::continuous(y, 0)};
  return estimate_mi(a, b, b_star, sched, seed, options);
}

std::uint32_t CalibrationReport::require_b_star() const {
  if (b_star) return *b_star;
  throw Error(ErrorCode::CalibrationFailed,
              "no quantization level extrapolates shuffled data to zero; lower b_max or use "
              "more samples");
}

std::optional<std::uint32_t> choose_b_star(const std::map<std::uint32_t, LevelStats>& per_level,
                                           double tolerance_bits) {
  std::optional<std::uint32_t> best;
  std::uint32_t expected = 2;
  for (const auto& [b, s] : per_level) {
    if (b != expected || s.count == 0) break;
    const double abs_mean = std::abs(s.mean_bits);
    const double sem = s.std_bits / std::sqrt(static_cast<double>(s.count));
    if (!(abs_mean <= tolerance_bits && abs_mean <= 2.0 * sem)) break;
    best = b;
    ++expected;
  }
  return best;
}

CalibrationReport determine_bstar(const Dataset& ds, const CalibrationOptions& options) {
  return run_calibration(ds, options, ProbeOrder::Pairs,
                         [&](const JointSample& js, std::uint32_t b, std::uint64_t seed) {
                           return extrapolate_pair(js.columns[0], js.columns[1], b,
                                                   options.schedule, seed, options.extrapolation)
                               .intercept_bits;
                         });
}

CalibrationReport triplet_bstar(const Dataset& ds, const CalibrationOptions& options) {
  return run_calibration(ds, options, ProbeOrder::Triplets,
                         [&](const JointSample& js, std::uint32_t b, std::uint64_t seed) {
                           return fixed_level_triplet_intercept(
                               {js.columns[0], js.columns[1], js.columns[2]}, b, options.schedule,
                               seed, options.extrapolation);
                         });
}

std::vector<std::vector<std::size_t>> draw_tuples(std::size_t n, std::size_t k, std::size_t count,
                                                  std::uint64_t seed) {
  if (k == 0 || k > n) {
    throw Error(ErrorCode::InvalidArgument, "cannot draw " + std::to_string(k) + "-tuples from " +
                                                std::to_string(n) + " variables");
  }
  std::vector<std::vector<std::size_t>> out;
  if (count == 0) return out;
  Rng rng(seed);
  const std::uint64_t total = binomial_saturating(n, k);

  if (total <= 2 * static_cast<std::uint64_t>(count)) {
    auto all = all_tuples(n, k);
    for (std::size_t i = all.size(); i > 1; --i) {
      std::swap(all[i - 1], all[static_cast<std::size_t>(uniform_below(rng, i))]);
    }
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(all[i % all.size()]);
    return out;
  }

  std::set<std::vector<std::size_t>> seen;
  out.reserve(count);
  while (out.size() < count) {
    std::vector<std::size_t> t;
    while (t.size() < k) {
      const auto v = static_cast<std::size_t>(uniform_below(rng, n));
      if (std::find(t.begin(), t.end(), v) == t.end()) t.push_back(v);
    }
    std::sort(t.begin(), t.end());
    if (seen.insert(t).second) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace miest
