#include "miest/engine.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "miest/error.hpp"
#include "miest/parallel.hpp"

namespace miest {

namespace {

constexpr std::uint64_t kPairCalibrationStream = 11;
constexpr std::uint64_t kTripletCalibrationStream = 12;
constexpr std::uint64_t kShuffleVerifyStream = 13;
constexpr std::uint64_t kStabilityStream = 14;
constexpr std::uint64_t kBaselineStream = 15;
constexpr std::uint64_t kTripletStream = 16;

std::size_t smallest_subsample(const BatchConfig& cfg, std::size_t n) {
  return static_cast<std::size_t>(std::floor(cfg.f1 * static_cast<double>(n) + 1e-9));
}

// Top level needed by a pair estimate: b_star, or the native alphabet.
std::uint32_t pair_level(const BatchConfig& cfg, std::uint32_t b_star) {
  return cfg.discrete_levels > 0 ? cfg.discrete_levels : b_star;
}

MIEstimate estimate_columns(std::span<const double> x, std::span<const double> y,
                            const BatchConfig& cfg, std::uint32_t b_star, std::uint64_t seed) {
  const ExtrapolationOptions opts{cfg.quantization};
  const auto sched = cfg.schedule();
  if (cfg.discrete_levels > 0) {
    const auto qx = passthrough(x, cfg.discrete_levels);
    const auto qy = passthrough(y, cfg.discrete_levels);
    const Column a[] = {Column::discrete_symbols(qx)};
    const Column b[] = {Column::discrete_symbols(qy)};
    return estimate_mi(a, b, cfg.discrete_levels, sched, seed, opts);
  }
  return estimate_pair(x, y, b_star, sched, seed, opts);
}

// Empty when the sample can carry an estimate, otherwise the skip reason.
std::string sample_problem(const BatchConfig& cfg, std::size_t n_joint, std::uint64_t alphabet) {
  if (n_joint == 0 || n_joint < cfg.min_joint_samples) {
    return "InsufficientJoint: " + std::to_string(n_joint) + " joint samples, need " +
           std::to_string(std::max<std::size_t>(cfg.min_joint_samples, 1));
  }
  if (smallest_subsample(cfg, n_joint) < alphabet) {
    return "InsufficientSamples: smallest subsample " +
           std::to_string(smallest_subsample(cfg, n_joint)) + " < " + std::to_string(alphabet) +
           " levels";
  }
  return {};
}

std::vector<std::pair<std::size_t, std::size_t>> all_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  return pairs;
}

std::uint64_t triplet_seed(std::uint64_t global, std::size_t i, std::size_t j, std::size_t k) {
  return derive_seed(global, {kTripletStream, i, j, k});
}

void drop_points(MultiInfoEstimate& m) {
  for (auto& term : m.terms) {
    for (auto& [b, r] : term.per_b) {
      r.points.clear();
      r.points.shrink_to_fit();
    }
  }
}

std::optional<TripletEstimate> triplet_on_dataset(const Dataset& ds, std::array<std::size_t, 3> v,
                                                  const BatchConfig& cfg, std::uint32_t b_triplet,
                                                  std::size_t& n_joint, std::string& reason) {
  if (cfg.discrete_levels > 0) {
    throw Error(ErrorCode::InvalidArgument, "triplet estimation needs continuous data");
  }
  const JointSample js = joint_sample(ds, v);
  n_joint = js.size();
  reason = sample_problem(cfg, js.size(), std::uint64_t{b_triplet} * b_triplet);
  if (!reason.empty()) return std::nullopt;
  MultiInfoOptions opts;
  opts.inner_pair_cap = cfg.inner_pair_cap;
  opts.extrapolation.mode = cfg.quantization;
  auto t = estimate_triplet({js.columns[0], js.columns[1], js.columns[2]}, b_triplet,
                            cfg.schedule(), b_triplet, triplet_seed(cfg.seed, v[0], v[1], v[2]),
                            opts, {v[0], v[1], v[2]});
  for (auto& c : t.chains) drop_points(c);
  return t;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SubsampleSchedule BatchConfig::schedule() const { return make_schedule(f1, f3, t1, include_full); }

CalibrationOptions BatchConfig::calibration_options(ProbeOrder order) const {
  CalibrationOptions o;
  o.b_max = b_max;
  o.probes = order == ProbeOrder::Pairs ? probe_pairs : probe_triplets;
  o.schedule = schedule();
  o.seed = derive_seed(seed, {order == ProbeOrder::Pairs ? kPairCalibrationStream
                                                         : kTripletCalibrationStream});
  o.tolerance_bits = tolerance_bits;
  o.min_joint_samples = min_joint_samples;
  o.workers = workers;
  o.extrapolation.mode = quantization;
  return o;
}

void BatchConfig::validate() const {
  schedule().validate();
  if (b_max < 2) throw Error(ErrorCode::InvalidArgument, "b_max must be at least 2");
  if (!(tolerance_bits >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be >= 0");
  if (discrete_levels == 1) {
    throw Error(ErrorCode::InvalidArgument, "pre-quantized data need at least 2 levels");
  }
  if (inner_pair_cap && *inner_pair_cap < 2) {
    throw Error(ErrorCode::InvalidArgument, "inner pair cap must be at least 2");
  }
}

CalibrationReport calibrate(const Dataset& ds, const BatchConfig& cfg, ProbeOrder order) {
  cfg.validate();
  if (cfg.discrete_levels > 0) {
    throw Error(ErrorCode::InvalidArgument,
                "pre-quantized data are estimated at their native alphabet; no calibration");
  }
  const auto opts = cfg.calibration_options(order);
  return order == ProbeOrder::Pairs ? determine_bstar(ds, opts) : triplet_bstar(ds, opts);
}

std::uint64_t pair_seed(std::uint64_t global, std::size_t a, std::size_t b) noexcept {
  return derive_seed(global, {std::min(a, b), std::max(a, b)});
}

MIEstimate estimate_dataset_pair(const Dataset& ds, std::size_t a, std::size_t b,
                                 const BatchConfig& cfg, std::uint32_t b_star) {
  if (a == b) throw Error(ErrorCode::InvalidArgument, "a variable paired with itself is undefined");
  const std::size_t vars[] = {a, b};
  const JointSample js = joint_sample(ds, vars);
  const std::string problem = sample_problem(cfg, js.size(), pair_level(cfg, b_star));
  if (!problem.empty()) throw Error(ErrorCode::InsufficientSamples, problem);
  return estimate_columns(js.columns[0], js.columns[1], cfg, b_star, pair_seed(cfg.seed, a, b));
}

MIMatrix::MIMatrix(std::vector<std::string> names, std::vector<PairEntry> entries)
    : names_(std::move(names)), entries_(std::move(entries)) {
  const std::size_t n = names_.size();
  if (entries_.size() != n * (n - 1) / 2) {
    throw Error(ErrorCode::InvalidArgument, "matrix needs one entry per unordered pair");
  }
}

std::size_t MIMatrix::pair_index(std::size_t a, std::size_t b, std::size_t n) noexcept {
  if (a > b) std::swap(a, b);
  return a * n - a * (a + 1) / 2 + (b - a - 1);
}

const PairEntry& MIMatrix::entry(std::size_t a, std::size_t b) const {
  if (a == b || a >= size() || b >= size()) {
    throw Error(ErrorCode::InvalidArgument, "no matrix entry for this pair");
  }
  return entries_[pair_index(a, b, size())];
}

std::optional<double> MIMatrix::value(std::size_t a, std::size_t b) const {
  if (a == b) return std::nullopt;
  const auto& e = entry(a, b);
  if (!e.estimated) return std::nullopt;
  return e.value_bits;
}

std::optional<double> MIMatrix::mean_value() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& e : entries_) {
    if (!e.estimated) continue;
    sum += e.value_bits;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::vector<PairEstimate> MIMatrix::pair_estimates() const {
  std::vector<PairEstimate> out;
  for (const auto& e : entries_) {
    if (!e.estimated) continue;
    MIEstimate est;
    est.value_bits = e.value_bits;
    est.chosen_b = e.chosen_b;
    est.error_bar_bits = e.error_bar_bits;
    est.n_joint = e.n_joint;
    out.push_back({e.a, e.b, std::move(est)});
  }
  return out;
}

MIMatrix estimate_all_pairs(const Dataset& ds, const BatchConfig& cfg, std::uint32_t b_star) {
  cfg.validate();
  const auto pairs = all_pairs(ds.num_vars());
  std::vector<PairEntry> entries(pairs.size());
  parallel_for(pairs.size(), cfg.workers, [&](std::size_t p) {
    const auto [a, b] = pairs[p];
    PairEntry& e = entries[p];
    e.a = a;
    e.b = b;
    const std::size_t vars[] = {a, b};
    const JointSample js = joint_sample(ds, vars);
    e.n_joint = js.size();
    e.skip_reason = sample_problem(cfg, js.size(), pair_level(cfg, b_star));
    if (!e.skip_reason.empty()) return;
    try {
      const auto est =
          estimate_columns(js.columns[0], js.columns[1], cfg, b_star, pair_seed(cfg.seed, a, b));
      e.estimated = true;
      e.value_bits = est.value_bits;
      e.chosen_b = est.chosen_b;
      e.error_bar_bits = est.error_bar_bits;
    } catch (const Error& err) {
      e.skip_reason = std::string(error_code_name(err.code())) + ": " + err.what();
    }
  });
  return MIMatrix(ds.names(), std::move(entries));
}

ShuffleSummary verify_shuffled(const Dataset& ds, const BatchConfig& cfg, std::uint32_t b_star,
                               std::size_t n_pairs) {
  cfg.validate();
  ShuffleSummary s;
  if (n_pairs == 0) return s;
  const auto tuples =
      draw_tuples(ds.num_vars(), 2, n_pairs, derive_seed(cfg.seed, {kShuffleVerifyStream}));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values(tuples.size(), nan);
  std::vector<double> bars(tuples.size(), nan);
  parallel_for(tuples.size(), cfg.workers, [&](std::size_t p) {
    JointSample js = joint_sample(ds, tuples[p]);
    if (!sample_problem(cfg, js.size(), pair_level(cfg, b_star)).empty()) return;
    Rng rng(derive_seed(cfg.seed, {kShuffleVerifyStream, 1, p}));
    js = shuffle_columns(js, 1, rng);
    const auto est = estimate_columns(js.columns[0], js.columns[1], cfg, b_star,
                                      derive_seed(cfg.seed, {kShuffleVerifyStream, 2, p}));
    values[p] = est.value_bits;
    bars[p] = est.error_bar_bits;
  });
  std::size_t beyond = 0;
  for (std::size_t p = 0; p < tuples.size(); ++p) {
    if (std::isnan(values[p])) {
      ++s.n_failed;
      continue;
    }
    s.values.push_back(values[p]);
    s.error_bars.push_back(bars[p]);
    if (std::abs(values[p]) > 3.0 * bars[p]) ++beyond;
  }
  s.n_pairs = s.values.size();
  if (s.n_pairs == 0) return s;
  s.mean_bits = mean_of(s.values);
  if (s.n_pairs > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean_bits) * (v - s.mean_bits);
    s.std_bits = std::sqrt(ss / static_cast<double>(s.n_pairs - 1));
  }
  s.sem_bits = s.std_bits / std::sqrt(static_cast<double>(s.n_pairs));
  s.fraction_beyond_3_error_bars = static_cast<double>(beyond) / static_cast<double>(s.n_pairs);
  return s;
}

StabilityReport verify_subsample_stability(const Dataset& ds, const BatchConfig& cfg,
                                           const MIMatrix& full, std::uint32_t b_star,
                                           double fraction) {
  cfg.validate();
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "stability fraction must lie in (0, 1]");
  }
  if (full.size() != ds.num_vars()) {
    throw Error(ErrorCode::InvalidArgument, "matrix does not belong to this dataset");
  }
  std::vector<const PairEntry*> todo;
  for (const auto& e : full.entries())
    if (e.estimated) todo.push_back(&e);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> diffs(todo.size(), nan);
  parallel_for(todo.size(), cfg.workers, [&](std::size_t p) {
    const PairEntry& e = *todo[p];
    const std::size_t vars[] = {e.a, e.b};
    const JointSample js = joint_sample(ds, vars);
    const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(js.size()) + 1e-9));
    if (m == 0 || smallest_subsample(cfg, m) < pair_level(cfg, b_star)) return;
    Rng rng(derive_seed(cfg.seed, {kStabilityStream, e.a, e.b}));
    const auto keep = draw_subsample(js.size(), m, rng);
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(m);
    y.reserve(m);
    for (auto i : keep) {
      x.push_back(js.columns[0][i]);
      y.push_back(js.columns[1][i]);
    }
    const auto est = estimate_columns(x, y, cfg, b_star, pair_seed(cfg.seed, e.a, e.b));
    diffs[p] = est.value_bits - e.value_bits;
  });

  StabilityReport r;
  r.fraction = fraction;
  std::size_t above = 0;
  for (double d : diffs) {
    if (std::isnan(d)) {
      ++r.n_excluded;
      continue;
    }
    r.differences.push_back(d);
    if (std::abs(d) > 0.1) ++above;
  }
  r.n_compared = r.differences.size();
  if (r.n_compared > 0) {
    r.share_above_0_1_bits = static_cast<double>(above) / static_cast<double>(r.n_compared);
  }
  return r;
}

std::vector<Group> parse_groups(std::istream& in, const Dataset& ds) {
  std::vector<Group> groups;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string{};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto colon = t.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::Parse, "group file line " + std::to_string(line_no) +
                                        ": expected 'label: name1,name2,...'");
    }
    Group g;
    g.label = trim(t.substr(0, colon));
    if (g.label.empty()) {
      throw Error(ErrorCode::Parse, "group file line " + std::to_string(line_no) + ": empty label");
    }
    std::stringstream names(t.substr(colon + 1));
    std::string name;
    while (std::getline(names, name, ',')) {
      name = trim(name);
      if (name.empty()) continue;
      const auto idx = ds.find(name);
      if (!idx) {
        throw Error(ErrorCode::UnknownVariable, "group file line " + std::to_string(line_no) +
                                                    ": unknown variable '" + name + "'");
      }
      if (std::find(g.members.begin(), g.members.end(), *idx) != g.members.end()) {
        throw Error(ErrorCode::Parse, "group file line " + std::to_string(line_no) +
                                          ": variable '" + name + "' listed twice");
      }
      g.members.push_back(*idx);
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

SortedMatrix sorted_matrix(const MIMatrix& m, std::span<const Group> groups) {
  const std::size_t n = m.size();
  constexpr std::size_t kUnlabeled = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> group_index(n, kUnlabeled);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto v : groups[g].members) {
      if (v >= n) throw Error(ErrorCode::InvalidArgument, "group member out of range");
      if (group_index[v] == kUnlabeled) group_index[v] = g;
    }
  }

  SortedMatrix out;
  out.threshold_bits = m.mean_value().value_or(0.0);
  auto place_group = [&](std::size_t g, const std::string& label) {
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < n; ++v)
      if (group_index[v] == g) members.push_back(v);
    if (members.empty()) return;
    std::vector<double> mean(n, 0.0);
    for (auto v : members) {
      double sum = 0.0;
      std::size_t count = 0;
      for (auto w : members) {
        if (auto val = m.value(v, w)) {
          sum += *val;
          ++count;
        }
      }
      mean[v] = count ? sum / static_cast<double>(count) : 0.0;
    }
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });
    out.group_starts.push_back(out.order.size());
    out.group_labels.push_back(label);
    for (auto v : members) {
      out.order.push_back(v);
      out.group_of.push_back(label);
    }
  };
  for (std::size_t g = 0; g < groups.size(); ++g) place_group(g, groups[g].label);
  place_group(kUnlabeled, "");

  out.rendered.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto v = m.value(out.order[i], out.order[j]);
      if (v && *v >= out.threshold_bits) out.rendered[i * n + j] = *v;
    }
  }
  return out;
}

std::size_t triplet_count(std::size_t g) noexcept {
  return g < 3 ? 0 : g * (g - 1) * (g - 2) / 6;
}

std::vector<TripletRecord> estimate_group_triplets(const Dataset& ds,
                                                   std::span<const std::size_t> members,
                                                   const BatchConfig& cfg,
                                                   std::uint32_t b_triplet) {
  cfg.validate();
  std::vector<std::size_t> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::InvalidArgument, "group lists a variable twice");
  }
  for (auto v : sorted) {
    if (v >= ds.num_vars()) throw Error(ErrorCode::InvalidArgument, "group member out of range");
  }
  const std::size_t count = triplet_count(sorted.size());
  if (count > cfg.triplet_budget) {
    throw Error(ErrorCode::BudgetExceeded,
                "group of " + std::to_string(sorted.size()) + " has " + std::to_string(count) +
                    " triplets, budget is " + std::to_string(cfg.triplet_budget));
  }
  std::vector<TripletRecord> records;
  records.reserve(count);
  const std::size_t g = sorted.size();
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = i + 1; j < g; ++j)
      for (std::size_t k = j + 1; k < g; ++k) {
        TripletRecord r;
        r.vars = {sorted[i], sorted[j], sorted[k]};
        records.push_back(r);
      }

  parallel_for(records.size(), cfg.workers, [&](std::size_t t) {
    TripletRecord& r = records[t];
    r.estimate = triplet_on_dataset(ds, r.vars, cfg, b_triplet, r.n_joint, r.skip_reason);
    if (r.estimate) r.consistency = consistency_check(*r.estimate);
  });
  return records;
}

std::vector<double> group_pair_values(const Dataset& ds, std::span<const std::size_t> members,
                                      const BatchConfig& cfg, std::uint32_t b_star) {
  std::vector<std::size_t> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = i + 1; j < sorted.size(); ++j) pairs.emplace_back(sorted[i], sorted[j]);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values(pairs.size(), nan);
  parallel_for(pairs.size(), cfg.workers, [&](std::size_t p) {
    try {
      values[p] = estimate_dataset_pair(ds, pairs[p].first, pairs[p].second, cfg, b_star).value_bits;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::InsufficientSamples) throw;
    }
  });
  std::erase_if(values, [](double v) { return std::isnan(v); });
  return values;
}

std::vector<double> baseline_pair_values(const Dataset& ds, const BatchConfig& cfg,
                                         std::uint32_t b_star, std::size_t count) {
  const auto tuples = draw_tuples(ds.num_vars(), 2, count, derive_seed(cfg.seed, {kBaselineStream, 2}));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values(tuples.size(), nan);
  parallel_for(tuples.size(), cfg.workers, [&](std::size_t p) {
    try {
      values[p] = estimate_dataset_pair(ds, tuples[p][0], tuples[p][1], cfg, b_star).value_bits;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::InsufficientSamples) throw;
    }
  });
  std::erase_if(values, [](double v) { return std::isnan(v); });
  return values;
}

std::vector<double> baseline_triplet_values(const Dataset& ds, const BatchConfig& cfg,
                                            std::uint32_t b_triplet, std::size_t count) {
  const auto tuples = draw_tuples(ds.num_vars(), 3, count, derive_seed(cfg.seed, {kBaselineStream, 3}));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values(tuples.size(), nan);
  parallel_for(tuples.size(), cfg.workers, [&](std::size_t p) {
    std::size_t n_joint = 0;
    std::string reason;
    const auto t = triplet_on_dataset(ds, {tuples[p][0], tuples[p][1], tuples[p][2]}, cfg,
                                      b_triplet, n_joint, reason);
    if (t) values[p] = t->mean_bits;
  });
  std::erase_if(values, [](double v) { return std::isnan(v); });
  return values;
}

double exceedance(std::span<const double> values, double baseline_mean) {
  if (values.empty()) return 0.0;
  const auto above = std::count_if(values.begin(), values.end(),
                                   [&](double v) { return v > baseline_mean; });
  return static_cast<double>(above) / static_cast<double>(values.size());
}

GroupSummary group_summary(const Group& group, std::span<const double> triplet_values,
                           std::span<const double> pair_values,
                           std::span<const double> baseline_triplets,
                           std::span<const double> baseline_pairs) {
  if (baseline_triplets.empty() || baseline_pairs.empty()) {
    throw Error(ErrorCode::EmptyData, "group summary needs non-empty baselines");
  }
  GroupSummary s;
  s.label = group.label;
  s.members = group.members;
  s.mean_triplet_bits = mean_of(triplet_values);
  s.mean_pair_bits = mean_of(pair_values);
  s.baseline_triplet_mean = mean_of(baseline_triplets);
  s.baseline_pair_mean = mean_of(baseline_pairs);
  s.exceedance_triplet = exceedance(triplet_values, s.baseline_triplet_mean);
  s.exceedance_pair = exceedance(pair_values, s.baseline_pair_mean);
  return s;
}

}  // namespace miest
