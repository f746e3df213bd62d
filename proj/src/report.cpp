#include "miest/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "report_format.hpp"

namespace miest::report {

namespace {

const char* order_name(ProbeOrder o) { return o == ProbeOrder::Pairs ? "pairs" : "triplets"; }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string format_double(double v) { return detail::format_double(v); }

Json to_json(const ExtrapolationResult& r, bool with_points) {
  Json j;
  j["b"] = r.b;
  j["intercept_bits"] = r.intercept_bits;
  j["slope_bits_samples"] = r.slope_bits_samples;
  j["error_bar_bits"] = r.error_bar_bits;
  j["n_points"] = r.points.size();
  if (with_points) {
    Json pts = Json::array();
    for (const auto& p : r.points) pts.push_back({p.inverse_size, p.mi_bits});
    j["points"] = std::move(pts);
  }
  return j;
}

Json to_json(const MIEstimate& e, bool with_points) {
  Json j;
  j["value_bits"] = e.value_bits;
  j["chosen_b"] = e.chosen_b;
  j["error_bar_bits"] = e.error_bar_bits;
  j["n_joint"] = e.n_joint;
  Json levels = Json::array();
  for (const auto& [b, r] : e.per_b) levels.push_back(to_json(r, with_points));
  j["per_b"] = std::move(levels);
  return j;
}

Json to_json(const CalibrationReport& r) {
  Json j;
  j["order"] = order_name(r.order);
  j["probes"] = r.probes;
  j["tolerance_bits"] = r.tolerance_bits;
  j["b_star"] = r.b_star ? Json(*r.b_star) : Json(nullptr);
  Json levels = Json::array();
  for (const auto& [b, s] : r.per_level) {
    const double sem = s.count ? s.std_bits / std::sqrt(static_cast<double>(s.count)) : 0.0;
    levels.push_back({{"b", b},
                      {"mean_intercept_bits", s.mean_bits},
                      {"std_intercept_bits", s.std_bits},
                      {"sem_bits", sem},
                      {"count", s.count}});
  }
  j["per_level"] = std::move(levels);
  return j;
}

std::string calibration_table(const CalibrationReport& r) {
  std::ostringstream os;
  os << "# shuffled " << order_name(r.order) << " calibration, " << r.probes
     << " probes, tolerance " << format_double(r.tolerance_bits) << " bits\n";
  os << std::left << std::setw(4) << "b" << std::setw(25) << "mean_bits" << std::setw(25)
     << "std_bits" << std::setw(25) << "sem_bits" << "count\n";
  for (const auto& [b, s] : r.per_level) {
    const double sem = s.count ? s.std_bits / std::sqrt(static_cast<double>(s.count)) : 0.0;
    os << std::left << std::setw(4) << b << std::setw(25) << format_double(s.mean_bits)
       << std::setw(25) << format_double(s.std_bits) << std::setw(25) << format_double(sem)
       << s.count << '\n';
  }
  os << "b_star: " << (r.b_star ? std::to_string(*r.b_star) : std::string("undefined")) << '\n';
  return os.str();
}

Json pair_report(const Dataset& ds, std::size_t a, std::size_t b, const MIEstimate& e,
                 std::optional<double> pearson_correlation) {
  Json j;
  j["var_a"] = ds.name(a);
  j["var_b"] = ds.name(b);
  j["n_joint"] = e.n_joint;
  j["value_bits"] = e.value_bits;
  j["chosen_b"] = e.chosen_b;
  j["error_bar_bits"] = e.error_bar_bits;
  j["pearson"] = pearson_correlation ? Json(*pearson_correlation) : Json(nullptr);
  Json curve = Json::array();
  for (const auto& [lvl, r] : e.per_b) {
    curve.push_back({{"b", lvl}, {"intercept_bits", r.intercept_bits},
                     {"error_bar_bits", r.error_bar_bits}});
  }
  j["intercept_vs_b"] = std::move(curve);
  Json levels = Json::array();
  for (const auto& [lvl, r] : e.per_b) levels.push_back(to_json(r, true));
  j["extrapolations"] = std::move(levels);
  return j;
}

std::string matrix_csv(const MIMatrix& m) {
  std::ostringstream os;
  const std::size_t n = m.size();
  for (std::size_t j = 0; j < n; ++j) os << ',' << csv_escape(m.names()[j]);
  os << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    os << csv_escape(m.names()[i]);
    for (std::size_t j = 0; j < n; ++j) {
      os << ',';
      if (auto v = m.value(i, j)) os << format_double(*v);
    }
    os << '\n';
  }
  return os.str();
}

Json matrix_sidecar(const MIMatrix& m) {
  Json j;
  j["names"] = m.names();
  const auto mean = m.mean_value();
  j["mean_bits"] = mean ? Json(*mean) : Json(nullptr);
  Json pairs = Json::array();
  std::size_t estimated = 0;
  for (const auto& e : m.entries()) {
    if (!e.estimated) continue;
    ++estimated;
    pairs.push_back({{"a", m.names()[e.a]},
                     {"b", m.names()[e.b]},
                     {"value_bits", e.value_bits},
                     {"chosen_b", e.chosen_b},
                     {"error_bar_bits", e.error_bar_bits},
                     {"n_joint", e.n_joint}});
  }
  j["n_estimated"] = estimated;
  j["n_skipped"] = m.entries().size() - estimated;
  j["pairs"] = std::move(pairs);
  j["skipped"] = skipped_pairs(m);
  return j;
}

Json skipped_pairs(const MIMatrix& m) {
  Json out = Json::array();
  for (const auto& e : m.entries()) {
    if (e.estimated) continue;
    out.push_back({{"a", m.names()[e.a]},
                   {"b", m.names()[e.b]},
                   {"n_joint", e.n_joint},
                   {"reason", e.skip_reason}});
  }
  return out;
}

std::string sorted_matrix_csv(const MIMatrix& m, const SortedMatrix& s) {
  std::ostringstream os;
  const std::size_t n = s.order.size();
  os << "# threshold_bits=" << format_double(s.threshold_bits) << '\n';
  os << "group,name";
  for (auto v : s.order) os << ',' << csv_escape(m.names()[v]);
  os << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    os << csv_escape(s.group_of[i]) << ',' << csv_escape(m.names()[s.order[i]]);
    for (std::size_t j = 0; j < n; ++j) os << ',' << format_double(s.rendered[i * n + j]);
    os << '\n';
  }
  return os.str();
}

Json to_json(const TripletRecord& r, const Dataset& ds) {
  Json j;
  j["vars"] = {ds.name(r.vars[0]), ds.name(r.vars[1]), ds.name(r.vars[2])};
  j["n_joint"] = r.n_joint;
  if (!r.estimate) {
    j["skipped"] = r.skip_reason;
    return j;
  }
  const auto& t = *r.estimate;
  j["compositions_bits"] = t.compositions;
  j["composition_error_bars"] = t.error_bars;
  j["mean_bits"] = t.mean_bits;
  j["spread_bits"] = t.spread_bits;
  j["consistent"] = r.consistency.pass;
  Json chains = Json::array();
  for (const auto& c : t.chains) {
    Json terms = Json::array();
    for (const auto& term : c.terms) {
      terms.push_back({{"value_bits", term.value_bits},
                       {"chosen_b", term.chosen_b},
                       {"error_bar_bits", term.error_bar_bits}});
    }
    Json order = Json::array();
    for (auto o : c.order) order.push_back(ds.name(r.vars[o]));
    chains.push_back({{"order", std::move(order)}, {"terms", std::move(terms)}});
  }
  j["chains"] = std::move(chains);
  return j;
}

Json to_json(const GroupSummary& s, const Dataset& ds) {
  Json members = Json::array();
  for (auto v : s.members) members.push_back(ds.name(v));
  return {{"label", s.label},
          {"members", std::move(members)},
          {"mean_triplet_bits", s.mean_triplet_bits},
          {"mean_pair_bits", s.mean_pair_bits},
          {"exceedance_triplet", s.exceedance_triplet},
          {"exceedance_pair", s.exceedance_pair},
          {"baseline_triplet_mean_bits", s.baseline_triplet_mean},
          {"baseline_pair_mean_bits", s.baseline_pair_mean}};
}

Json to_json(const ShuffleSummary& s) {
  return {{"n_pairs", s.n_pairs},
          {"n_failed", s.n_failed},
          {"mean_bits", s.mean_bits},
          {"std_bits", s.std_bits},
          {"sem_bits", s.sem_bits},
          {"fraction_beyond_3_error_bars", s.fraction_beyond_3_error_bars},
          {"values_bits", s.values},
          {"error_bars_bits", s.error_bars}};
}

Json to_json(const StabilityReport& s) {
  return {{"fraction", s.fraction},
          {"n_compared", s.n_compared},
          {"n_excluded", s.n_excluded},
          {"share_above_0_1_bits", s.share_above_0_1_bits},
          {"differences_bits", s.differences}};
}

std::string histogram_csv(std::span<const double> values, std::size_t bins) {
  std::ostringstream os;
  os << "lower,upper,count\n";
  if (values.empty() || bins == 0) return os.str();
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto k = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(k, bins - 1)]++;
  }
  for (std::size_t k = 0; k < bins; ++k) {
    os << format_double(lo + width * static_cast<double>(k)) << ','
       << format_double(lo + width * static_cast<double>(k + 1)) << ',' << counts[k] << '\n';
  }
  return os.str();
}

std::string compare_pc_csv(std::span<const PcMiPoint> points, const Dataset& ds) {
  std::ostringstream os;
  os << "var_a,var_b,n_joint,pc,mi_bits,gaussian_mi_bits,error\n";
  for (const auto& p : points) {
    os << csv_escape(ds.name(p.var_a)) << ',' << csv_escape(ds.name(p.var_b)) << ','
       << p.n_joint << ',';
    if (p.error) {
      os << ',' << format_double(p.mi_bits) << ",," << csv_escape(*p.error) << '\n';
    } else {
      os << format_double(p.pc) << ',' << format_double(p.mi_bits) << ','
         << format_double(p.gaussian_mi_bits) << ",\n";
    }
  }
  return os.str();
}

}  // namespace miest::report
