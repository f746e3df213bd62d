#include "miest/miest.h"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "miest/engine.hpp"
#include "miest/error.hpp"
#include "miest/report.hpp"

struct miest_dataset {
  miest::Dataset ds;
};
struct miest_config {
  miest::BatchConfig cfg;
};
struct miest_calibration {
  miest::CalibrationReport report;
};
struct miest_matrix {
  miest::MIMatrix m;
};

namespace {

thread_local std::string g_last_error;

miest_status fail(miest_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename F>
miest_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return MIEST_OK;
  } catch (const miest::Error& e) {
    return fail(static_cast<miest_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MIEST_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MIEST_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw miest::Error(miest::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  require(out, "output pointer");
  *out = dup_string(s);
}

miest::LoadOptions to_options(const miest_load_options* o) {
  miest::LoadOptions lo;
  if (!o) return lo;
  if (o->delimiter) lo.delimiter = o->delimiter;
  if (o->missing_token) lo.missing_token = o->missing_token;
  lo.orientation = o->variables_as_columns ? miest::Orientation::VariablesAsColumns
                                           : miest::Orientation::VariablesAsRows;
  lo.has_names = o->has_names != 0;
  lo.has_observation_labels = o->has_observation_labels != 0;
  return lo;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* first = v.data();
  if (!v.empty() && v.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw miest::Error(miest::ErrorCode::InvalidArgument,
                       "config " + key + ": cannot parse '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw miest::Error(miest::ErrorCode::InvalidArgument,
                     "config " + key + ": expected a boolean, got '" + v + "'");
}

miest::report::Json config_json(const miest::BatchConfig& c) {
  using miest::report::Json;
  return Json{{"f1", c.f1},
              {"f3", c.f3},
              {"t1", c.t1},
              {"include_full", c.include_full},
              {"b_max", c.b_max},
              {"tolerance", c.tolerance_bits},
              {"min_joint", c.min_joint_samples},
              {"seed", c.seed},
              {"workers", c.workers},
              {"probe_pairs", c.probe_pairs},
              {"probe_triplets", c.probe_triplets},
              {"baseline_tuples", c.baseline_tuples},
              {"triplet_budget", c.triplet_budget},
              {"discrete_levels", c.discrete_levels},
              {"quantization",
               c.quantization == miest::QuantizationMode::Once ? "once" : "per-subsample"},
              {"inner_pair_cap", c.inner_pair_cap.value_or(0)}};
}

std::vector<miest::Group> groups_from_text(const char* text, const miest::Dataset& ds) {
  require(text, "group text");
  std::istringstream in(text);
  return miest::parse_groups(in, ds);
}

}  // namespace

extern "C" {

const char* miest_version(void) { return "0.1.0"; }

const char* miest_last_error(void) { return g_last_error.c_str(); }

const char* miest_status_name(miest_status status) {
  switch (status) {
    case MIEST_OK: return "Ok";
    case MIEST_INTERNAL: return "Internal";
    default:
      if (status >= MIEST_INVALID_ARGUMENT && status <= MIEST_IO) {
        return miest::error_code_name(static_cast<miest::ErrorCode>(status));
      }
      return "Unknown";
  }
}

void miest_string_free(char* s) { std::free(s); }

void miest_load_options_default(miest_load_options* opts) {
  if (!opts) return;
  opts->delimiter = ',';
  opts->missing_token = "NA";
  opts->variables_as_columns = 0;
  opts->has_names = 1;
  opts->has_observation_labels = 0;
}

miest_status miest_dataset_load(const char* path, const miest_load_options* opts,
                                miest_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output pointer");
    *out = new miest_dataset{miest::load_dataset_file(path, to_options(opts))};
  });
}

miest_status miest_dataset_parse(const char* text, const miest_load_options* opts,
                                 miest_dataset** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "output pointer");
    std::istringstream in(text);
    *out = new miest_dataset{miest::load_dataset(in, to_options(opts))};
  });
}

void miest_dataset_free(miest_dataset* ds) { delete ds; }

size_t miest_dataset_num_vars(const miest_dataset* ds) { return ds ? ds->ds.num_vars() : 0; }

size_t miest_dataset_num_obs(const miest_dataset* ds) { return ds ? ds->ds.num_obs() : 0; }

const char* miest_dataset_var_name(const miest_dataset* ds, size_t var) {
  if (!ds || var >= ds->ds.num_vars()) return nullptr;
  return ds->ds.name(var).c_str();
}

miest_status miest_dataset_find(const miest_dataset* ds, const char* name, size_t* out) {
  return guarded([&] {
    require(ds, "dataset");
    require(name, "name");
    require(out, "output pointer");
    *out = ds->ds.index_of(name);
  });
}

miest_status miest_config_create(miest_config** out) {
  return guarded([&] {
    require(out, "output pointer");
    *out = new miest_config{};
  });
}

void miest_config_free(miest_config* cfg) { delete cfg; }

miest_status miest_config_set(miest_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    const std::string k = key;
    const std::string v = value;
    miest::BatchConfig next = cfg->cfg;
    if (k == "f1") next.f1 = parse_number<double>(k, v);
    else if (k == "f3") next.f3 = parse_number<double>(k, v);
    else if (k == "t1") next.t1 = parse_number<std::size_t>(k, v);
    else if (k == "include_full") next.include_full = parse_bool(k, v);
    else if (k == "b_max") next.b_max = parse_number<std::uint32_t>(k, v);
    else if (k == "tolerance") next.tolerance_bits = parse_number<double>(k, v);
    else if (k == "min_joint") next.min_joint_samples = parse_number<std::size_t>(k, v);
    else if (k == "seed") next.seed = parse_number<std::uint64_t>(k, v);
    else if (k == "workers") next.workers = parse_number<unsigned>(k, v);
    else if (k == "probe_pairs") next.probe_pairs = parse_number<std::size_t>(k, v);
    else if (k == "probe_triplets") next.probe_triplets = parse_number<std::size_t>(k, v);
    else if (k == "baseline_tuples") next.baseline_tuples = parse_number<std::size_t>(k, v);
    else if (k == "triplet_budget") next.triplet_budget = parse_number<std::size_t>(k, v);
    else if (k == "discrete_levels") next.discrete_levels = parse_number<std::uint32_t>(k, v);
    else if (k == "quantization") {
      if (v == "per-subsample") next.quantization = miest::QuantizationMode::PerSubsample;
      else if (v == "once") next.quantization = miest::QuantizationMode::Once;
      else throw miest::Error(miest::ErrorCode::InvalidArgument,
                              "config quantization: expected per-subsample or once");
    } else if (k == "inner_pair_cap") {
      const auto cap = parse_number<std::uint32_t>(k, v);
      next.inner_pair_cap = cap ? std::optional<std::uint32_t>(cap) : std::nullopt;
    } else {
      throw miest::Error(miest::ErrorCode::InvalidArgument, "unknown config key '" + k + "'");
    }
    cfg->cfg = next;
  });
}

miest_status miest_config_get(const miest_config* cfg, const char* key, char** value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    const auto j = config_json(cfg->cfg);
    if (!j.contains(key)) {
      throw miest::Error(miest::ErrorCode::InvalidArgument,
                         "unknown config key '" + std::string(key) + "'");
    }
    const auto& field = j.at(key);
    emit(value, field.is_string() ? field.get<std::string>() : field.dump());
  });
}

miest_status miest_config_to_json(const miest_config* cfg, char** json) {
  return guarded([&] {
    require(cfg, "config");
    emit(json, config_json(cfg->cfg).dump(2));
  });
}

miest_status miest_calibrate(const miest_dataset* ds, const miest_config* cfg, miest_order order,
                             miest_calibration** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(cfg, "config");
    require(out, "output pointer");
    if (order != MIEST_PAIRS && order != MIEST_TRIPLETS) {
      throw miest::Error(miest::ErrorCode::InvalidArgument, "order must be 2 or 3");
    }
    *out = new miest_calibration{
        miest::calibrate(ds->ds, cfg->cfg, static_cast<miest::ProbeOrder>(order))};
  });
}

void miest_calibration_free(miest_calibration* cal) { delete cal; }

uint32_t miest_calibration_b_star(const miest_calibration* cal) {
  return cal && cal->report.b_star ? *cal->report.b_star : 0;
}

miest_status miest_calibration_to_json(const miest_calibration* cal, char** json) {
  return guarded([&] {
    require(cal, "calibration");
    emit(json, miest::report::to_json(cal->report).dump(2));
  });
}

miest_status miest_calibration_table(const miest_calibration* cal, char** text) {
  return guarded([&] {
    require(cal, "calibration");
    emit(text, miest::report::calibration_table(cal->report));
  });
}

miest_status miest_pair_report(const miest_dataset* ds, const miest_config* cfg, size_t a,
                               size_t b, uint32_t b_star, char** json) {
  return guarded([&] {
    require(ds, "dataset");
    require(cfg, "config");
    const auto est = miest::estimate_dataset_pair(ds->ds, a, b, cfg->cfg, b_star);
    std::optional<double> pc;
    const std::size_t vars[] = {a, b};
    const auto js = miest::joint_sample(ds->ds, vars);
    try {
      pc = miest::pearson(js.columns[0], js.columns[1]);
    } catch (const miest::Error&) {
    }
    auto j = miest::report::pair_report(ds->ds, a, b, est, pc);
    j["b_star"] = b_star;
    emit(json, j.dump(2));
  });
}

miest_status miest_matrix_estimate(const miest_dataset* ds, const miest_config* cfg,
                                   uint32_t b_star, miest_matrix** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(cfg, "config");
    require(out, "output pointer");
    *out = new miest_matrix{miest::estimate_all_pairs(ds->ds, cfg->cfg, b_star)};
  });
}

void miest_matrix_free(miest_matrix* m) { delete m; }

size_t miest_matrix_size(const miest_matrix* m) { return m ? m->m.size() : 0; }

miest_status miest_matrix_value(const miest_matrix* m, size_t a, size_t b, double* out) {
  return guarded([&] {
    require(m, "matrix");
    require(out, "output pointer");
    if (a >= m->m.size() || b >= m->m.size()) {
      throw miest::Error(miest::ErrorCode::InvalidArgument, "variable index out of range");
    }
    const auto v = m->m.value(a, b);
    if (!v) {
      throw miest::Error(miest::ErrorCode::InsufficientSamples,
                         a == b ? "diagonal is undefined" : m->m.entry(a, b).skip_reason);
    }
    *out = *v;
  });
}

miest_status miest_matrix_to_csv(const miest_matrix* m, char** csv) {
  return guarded([&] {
    require(m, "matrix");
    emit(csv, miest::report::matrix_csv(m->m));
  });
}

miest_status miest_matrix_sidecar_json(const miest_matrix* m, char** json) {
  return guarded([&] {
    require(m, "matrix");
    emit(json, miest::report::matrix_sidecar(m->m).dump(2));
  });
}

miest_status miest_matrix_sorted_csv(const miest_matrix* m, const miest_dataset* ds,
                                     const char* group_text, char** csv) {
  return guarded([&] {
    require(m, "matrix");
    require(ds, "dataset");
    const auto groups = groups_from_text(group_text, ds->ds);
    emit(csv, miest::report::sorted_matrix_csv(m->m, miest::sorted_matrix(m->m, groups)));
  });
}

miest_status miest_triplets_report(const miest_dataset* ds, const miest_config* cfg,
                                   const char* group_text, uint32_t b_triplet, uint32_t b_pair,
                                   char** json) {
  return guarded([&] {
    using miest::report::Json;
    require(ds, "dataset");
    require(cfg, "config");
    const auto& d = ds->ds;
    const auto& c = cfg->cfg;
    const auto groups = groups_from_text(group_text, d);
    const auto base_t = miest::baseline_triplet_values(d, c, b_triplet, c.baseline_tuples);
    const auto base_p = miest::baseline_pair_values(d, c, b_pair, c.baseline_tuples);

    Json out;
    out["b_triplet"] = b_triplet;
    out["b_pair"] = b_pair;
    Json jg = Json::array();
    for (const auto& g : groups) {
      const auto records = miest::estimate_group_triplets(d, g.members, c, b_triplet);
      std::vector<double> tv;
      Json jt = Json::array();
      std::size_t inconsistent = 0;
      for (const auto& r : records) {
        if (r.estimate) {
          tv.push_back(r.estimate->mean_bits);
          if (!r.consistency.pass) ++inconsistent;
        }
        jt.push_back(miest::report::to_json(r, d));
      }
      const auto pv = miest::group_pair_values(d, g.members, c, b_pair);
      Json entry;
      if (tv.empty() || pv.empty()) {
        entry["label"] = g.label;
        entry["summary"] = nullptr;
        entry["error"] = "no estimable triplets or pairs in group";
      } else {
        entry = miest::report::to_json(miest::group_summary(g, tv, pv, base_t, base_p), d);
      }
      entry["n_triplets"] = records.size();
      entry["n_estimated"] = tv.size();
      entry["n_inconsistent"] = inconsistent;
      entry["triplets"] = std::move(jt);
      jg.push_back(std::move(entry));
    }
    out["groups"] = std::move(jg);
    emit(json, out.dump(2));
  });
}

miest_status miest_verify_shuffled(const miest_dataset* ds, const miest_config* cfg,
                                   uint32_t b_star, size_t n_pairs, char** json) {
  return guarded([&] {
    require(ds, "dataset");
    require(cfg, "config");
    const auto s = miest::verify_shuffled(ds->ds, cfg->cfg, b_star, n_pairs);
    emit(json, miest::report::to_json(s).dump(2));
  });
}

miest_status miest_verify_stability(const miest_dataset* ds, const miest_config* cfg,
                                    const miest_matrix* full, uint32_t b_star, double fraction,
                                    size_t bins, char** json, char** histogram_csv) {
  return guarded([&] {
    require(ds, "dataset");
    require(cfg, "config");
    require(full, "matrix");
    const auto s = miest::verify_subsample_stability(ds->ds, cfg->cfg, full->m, b_star, fraction);
    emit(json, miest::report::to_json(s).dump(2));
    if (histogram_csv) *histogram_csv = dup_string(miest::report::histogram_csv(s.differences, bins));
  });
}

miest_status miest_compare_pc(const miest_dataset* ds, const miest_matrix* m, char** csv) {
  return guarded([&] {
    require(ds, "dataset");
    require(m, "matrix");
    const auto estimates = m->m.pair_estimates();
    const auto points = miest::compare_report(estimates, ds->ds);
    emit(csv, miest::report::compare_pc_csv(points, ds->ds));
  });
}

}  // extern "C"
