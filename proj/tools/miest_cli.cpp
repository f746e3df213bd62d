// miest command-line driver. Thin sequential layer over the C API.

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "miest/miest.h"

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kCalibration = 3 };

struct Failure {
  int exit_code;
  std::string message;
};

// Keys passed straight to miest_config_set.
const std::vector<std::string> kEngineKeys = {
    "f1",          "f3",          "t1",          "include_full",   "b_max",
    "tolerance",   "min_joint",   "seed",        "workers",        "probe_pairs",
    "probe_triplets", "baseline_tuples", "triplet_budget", "discrete_levels",
    "quantization", "inner_pair_cap"};

struct KeySpec {
  std::string key;
  std::string def;
  std::string help;
};

// Driver-level keys, i.e. everything not owned by the engine config.
const std::vector<KeySpec> kDriverKeys = {
    {"input", "", "input table"},
    {"orientation", "rows", "rows: one line per variable; columns: one column per variable"},
    {"delimiter", ",", "field delimiter"},
    {"missing", "NA", "token marking a missing value"},
    {"names", "true", "input carries variable names"},
    {"obs_labels", "false", "input carries observation labels"},
    {"out", ".", "output directory"},
    {"b_star", "0", "pair level cap; 0 runs the shuffle calibration"},
    {"b_triplet", "4", "triplet level cap"},
    {"calibrate_triplets", "false", "also calibrate the triplet level cap"},
    {"a", "", "first variable"},
    {"b", "", "second variable"},
    {"groups", "", "group file, one 'label: name1,name2' line per group"},
    {"shuffle_pairs", "1000", "shuffled pairs for the zero check"},
    {"fraction", "0.6666666666666666", "kept fraction for the stability check"},
    {"bins", "40", "histogram bins"},
};

std::string flag_of(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

std::string env_of(const std::string& key) {
  std::string e = "MIEST_";
  for (char c : key) e += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return e;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_known(const std::string& key) {
  if (std::find(kEngineKeys.begin(), kEngineKeys.end(), key) != kEngineKeys.end()) return true;
  return std::any_of(kDriverKeys.begin(), kDriverKeys.end(),
                     [&](const KeySpec& k) { return k.key == key; });
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes" || v == "on"; }

struct CString {
  char* p = nullptr;
  ~CString() { miest_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int exit_for(miest_status s) {
  switch (s) {
    case MIEST_OK: return kOk;
    case MIEST_INVALID_ARGUMENT: return kUsage;
    case MIEST_CALIBRATION_FAILED: return kCalibration;
    default: return kData;
  }
}

void check(miest_status s, const std::string& what) {
  if (s == MIEST_OK) return;
  throw Failure{exit_for(s), what + ": " + miest_status_name(s) + ": " + miest_last_error()};
}

// Config file: JSON (its "config" object or the top level), or key=value
// lines; "#config key=value" lines embedded in CSV outputs are accepted too.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kData, "cannot open config file " + path};
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::map<std::string, std::string> out;
  if (trim(text).rfind('{', 0) == 0) {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      throw Failure{kData, "config file " + path + ": " + e.what()};
    }
    const Json& c = j.contains("config") ? j["config"] : j;
    for (const auto& [k, v] : c.items()) {
      if (!is_known(k)) continue;
      out[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    line = trim(line);
    if (line.rfind("#config ", 0) == 0) line = trim(line.substr(8));
    else if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string k = trim(line.substr(0, eq));
    if (!is_known(k)) throw Failure{kUsage, "config file " + path + ": unknown key '" + k + "'"};
    out[k] = trim(line.substr(eq + 1));
  }
  return out;
}

class Run {
public:
  // Layers resolved from lowest to highest precedence.
  void resolve(const std::string& config_path, const std::map<std::string, std::string>& flags) {
    miest_config* raw = nullptr;
    check(miest_config_create(&raw), "config");
    cfg_.reset(raw);
    for (const auto& k : kEngineKeys) {
      CString v;
      check(miest_config_get(cfg_.get(), k.c_str(), &v.p), "config");
      values_[k] = v.str();
    }
    for (const auto& k : kDriverKeys) values_[k.key] = k.def;
    if (!config_path.empty()) {
      for (const auto& [k, v] : read_config_file(config_path)) values_[k] = v;
    }
    for (auto& [k, v] : values_) {
      if (const char* e = std::getenv(env_of(k).c_str())) v = e;
    }
    for (const auto& [k, v] : flags) values_[k] = v;

    for (const auto& k : kEngineKeys) {
      check(miest_config_set(cfg_.get(), k.c_str(), values_[k].c_str()), "config " + k);
    }
    if (std::stoull(values_["b_max"]) < 2) throw Failure{kUsage, "b_max must be at least 2"};
    for (const char* k : {"probe_pairs", "probe_triplets"}) {
      if (std::stoull(values_[k]) < 30) {
        throw Failure{kUsage, std::string("BelowMinimumProbes: ") + k + " must be at least 30"};
      }
    }
  }

  const std::string& get(const std::string& k) const { return values_.at(k); }
  std::uint32_t get_u32(const std::string& k) const {
    try {
      return static_cast<std::uint32_t>(std::stoul(get(k)));
    } catch (const std::exception&) {
      throw Failure{kUsage, k + ": expected an unsigned integer, got '" + get(k) + "'"};
    }
  }
  double get_double(const std::string& k) const {
    try {
      return std::stod(get(k));
    } catch (const std::exception&) {
      throw Failure{kUsage, k + ": expected a number, got '" + get(k) + "'"};
    }
  }
  miest_config* cfg() const { return cfg_.get(); }

  Json config_json() const {
    Json j;
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }
  std::string config_comment() const {
    std::string s;
    for (const auto& [k, v] : values_) s += "#config " + k + "=" + v + "\n";
    return s;
  }

  miest_dataset* dataset() {
    if (ds_) return ds_.get();
    if (get("input").empty()) throw Failure{kUsage, "--input is required"};
    miest_load_options o;
    miest_load_options_default(&o);
    if (get("delimiter").size() != 1) throw Failure{kUsage, "delimiter must be one character"};
    o.delimiter = get("delimiter")[0];
    o.missing_token = get("missing").c_str();
    if (get("orientation") == "columns") o.variables_as_columns = 1;
    else if (get("orientation") != "rows") throw Failure{kUsage, "orientation must be rows or columns"};
    o.has_names = truthy(get("names"));
    o.has_observation_labels = truthy(get("obs_labels"));
    miest_dataset* raw = nullptr;
    check(miest_dataset_load(get("input").c_str(), &o, &raw), "load " + get("input"));
    ds_.reset(raw);
    return raw;
  }

  // Pair level cap: the override, or a fresh pairwise calibration.
  std::uint32_t pair_level(Json* calibration_out = nullptr) {
    const auto fixed = get_u32("b_star");
    if (fixed) return fixed;
    if (get_u32("discrete_levels") > 0) return get_u32("discrete_levels");
    miest_calibration* raw = nullptr;
    check(miest_calibrate(dataset(), cfg_.get(), MIEST_PAIRS, &raw), "calibration");
    std::unique_ptr<miest_calibration, decltype(&miest_calibration_free)> cal(
        raw, miest_calibration_free);
    CString j;
    check(miest_calibration_to_json(raw, &j.p), "calibration");
    if (calibration_out) *calibration_out = Json::parse(j.str());
    const auto b = miest_calibration_b_star(raw);
    if (b == 0) {
      throw Failure{kCalibration,
                    "no quantization level extrapolates shuffled data to zero; lower --b-max or "
                    "supply --b-star"};
    }
    std::cerr << "calibrated b* = " << b << '\n';
    return b;
  }

  fs::path out_path(const std::string& name) const { return fs::path(get("out")) / name; }

private:
  struct ConfigFree {
    void operator()(miest_config* c) const { miest_config_free(c); }
  };
  struct DatasetFree {
    void operator()(miest_dataset* d) const { miest_dataset_free(d); }
  };
  std::map<std::string, std::string> values_;
  std::unique_ptr<miest_config, ConfigFree> cfg_;
  std::unique_ptr<miest_dataset, DatasetFree> ds_;
};

void write_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Failure{kData, "cannot write " + tmp.string()};
    out << content;
    out.flush();
    if (!out) throw Failure{kData, "write failed for " + tmp.string()};
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Failure{kData, "cannot rename to " + path.string() + ": " + ec.message()};
  }
  std::cerr << "wrote " << path.string() << '\n';
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kData, "cannot open " + path};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json with_config(const Run& run, Json body) {
  Json j;
  j["config"] = run.config_json();
  for (auto& [k, v] : body.items()) j[k] = std::move(v);
  return j;
}

struct Matrix {
  miest_matrix* m = nullptr;
  ~Matrix() { miest_matrix_free(m); }
};

void estimate_matrix(Run& run, std::uint32_t b_star, Matrix& out) {
  check(miest_matrix_estimate(run.dataset(), run.cfg(), b_star, &out.m), "matrix");
}

Json sidecar(const Matrix& m) {
  CString j;
  check(miest_matrix_sidecar_json(m.m, &j.p), "matrix");
  return Json::parse(j.str());
}

void write_error_report(Run& run, const std::string& name, Json items) {
  write_atomic(run.out_path(name),
               with_config(run, Json{{"errors", std::move(items)}}).dump(2) + "\n");
}

int cmd_calibrate(Run& run) {
  Json pairs;
  Json body;
  std::uint32_t b = 0;
  int code = kOk;
  try {
    b = run.pair_level(&pairs);
  } catch (const Failure& f) {
    if (f.exit_code != kCalibration) throw;
    std::cerr << f.message << '\n';
    code = kCalibration;
  }
  // pair_level returns early for an explicit b_star; calibration is the point here.
  if (pairs.is_null()) {
    miest_calibration* raw = nullptr;
    check(miest_calibrate(run.dataset(), run.cfg(), MIEST_PAIRS, &raw), "calibration");
    CString j;
    check(miest_calibration_to_json(raw, &j.p), "calibration");
    b = miest_calibration_b_star(raw);
    miest_calibration_free(raw);
    pairs = Json::parse(j.str());
    if (b == 0) code = kCalibration;
  }
  body["pairs"] = pairs;
  body["b_star"] = b ? Json(b) : Json(nullptr);
  std::string table;
  if (truthy(run.get("calibrate_triplets"))) {
    miest_calibration* raw = nullptr;
    check(miest_calibrate(run.dataset(), run.cfg(), MIEST_TRIPLETS, &raw), "triplet calibration");
    CString j;
    CString t;
    check(miest_calibration_to_json(raw, &j.p), "triplet calibration");
    check(miest_calibration_table(raw, &t.p), "triplet calibration");
    const auto bt = miest_calibration_b_star(raw);
    miest_calibration_free(raw);
    body["triplets"] = Json::parse(j.str());
    body["b_star_triplet"] = bt ? Json(bt) : Json(nullptr);
    table = t.str();
  }
  std::ostringstream txt;
  txt << "# pairs\n";
  for (const auto& lvl : pairs["per_level"]) {
    txt << "b=" << lvl["b"] << " mean=" << lvl["mean_intercept_bits"].dump()
        << " std=" << lvl["std_intercept_bits"].dump() << " sem=" << lvl["sem_bits"].dump()
        << " count=" << lvl["count"] << '\n';
  }
  txt << "b_star: " << (b ? std::to_string(b) : std::string("undefined")) << '\n';
  if (!table.empty()) txt << table;
  std::cout << txt.str();
  write_atomic(run.out_path("calibration.json"), with_config(run, body).dump(2) + "\n");
  write_atomic(run.out_path("calibration.txt"), run.config_comment() + txt.str());
  if (code == kCalibration) std::cerr << "b* is undefined\n";
  return code;
}

int cmd_pair(Run& run) {
  auto* ds = run.dataset();
  if (run.get("a").empty() || run.get("b").empty()) throw Failure{kUsage, "--a and --b are required"};
  std::size_t a = 0;
  std::size_t b = 0;
  check(miest_dataset_find(ds, run.get("a").c_str(), &a), "variable");
  check(miest_dataset_find(ds, run.get("b").c_str(), &b), "variable");
  if (a == b) throw Failure{kUsage, "a variable paired with itself is undefined"};
  const auto b_star = run.pair_level();
  CString j;
  check(miest_pair_report(ds, run.cfg(), a, b, b_star, &j.p), "pair");
  const Json report = Json::parse(j.str());
  std::cout << run.get("a") << ' ' << run.get("b") << ' ' << report["value_bits"].dump()
            << " bits (b=" << report["chosen_b"] << ", +/- " << report["error_bar_bits"].dump()
            << ")\n";
  write_atomic(run.out_path("pair_" + run.get("a") + "_" + run.get("b") + ".json"),
               with_config(run, report).dump(2) + "\n");
  return kOk;
}

int cmd_matrix(Run& run) {
  const auto b_star = run.pair_level();
  const std::string groups = run.get("groups").empty() ? "" : read_text(run.get("groups"));
  Matrix m;
  estimate_matrix(run, b_star, m);
  CString csv;
  check(miest_matrix_to_csv(m.m, &csv.p), "matrix");
  // Everything is computed before the first write so a failing run leaves no
  // partial outputs behind.
  CString sorted;
  if (!groups.empty()) {
    check(miest_matrix_sorted_csv(m.m, run.dataset(), groups.c_str(), &sorted.p), "sorted matrix");
  }
  Json side = sidecar(m);
  side["b_star"] = b_star;
  write_atomic(run.out_path("matrix.csv"), run.config_comment() + csv.str());
  write_atomic(run.out_path("matrix.json"), with_config(run, side).dump(2) + "\n");
  if (!groups.empty()) {
    write_atomic(run.out_path("matrix_sorted.csv"), run.config_comment() + sorted.str());
  }
  write_error_report(run, "matrix_errors.json", side["skipped"]);
  std::cout << side["n_estimated"] << " pairs estimated, " << side["n_skipped"] << " skipped\n";
  return kOk;
}

int cmd_triplets(Run& run) {
  if (run.get("groups").empty()) throw Failure{kUsage, "--groups is required"};
  const std::string groups = read_text(run.get("groups"));
  const auto b_pair = run.pair_level();
  std::uint32_t b_triplet = run.get_u32("b_triplet");
  if (truthy(run.get("calibrate_triplets"))) {
    miest_calibration* raw = nullptr;
    check(miest_calibrate(run.dataset(), run.cfg(), MIEST_TRIPLETS, &raw), "triplet calibration");
    const auto bt = miest_calibration_b_star(raw);
    miest_calibration_free(raw);
    if (bt == 0) throw Failure{kCalibration, "triplet b* is undefined"};
    b_triplet = bt;
  }
  CString j;
  check(miest_triplets_report(run.dataset(), run.cfg(), groups.c_str(), b_triplet, b_pair, &j.p),
        "triplets");
  Json report = Json::parse(j.str());
  Json errors = Json::array();
  for (const auto& g : report["groups"]) {
    if (g.contains("error")) errors.push_back({{"group", g["label"]}, {"reason", g["error"]}});
    for (const auto& t : g["triplets"]) {
      if (t.contains("skipped")) {
        errors.push_back({{"group", g["label"]}, {"vars", t["vars"]}, {"reason", t["skipped"]}});
      }
    }
    std::cout << g["label"].get<std::string>() << ": " << g["n_estimated"] << " of "
              << g["n_triplets"] << " triplets estimated\n";
  }
  write_atomic(run.out_path("triplets.json"), with_config(run, report).dump(2) + "\n");
  write_error_report(run, "triplets_errors.json", std::move(errors));
  return kOk;
}

int cmd_verify(Run& run) {
  const auto b_star = run.pair_level();
  CString shuffled;
  check(miest_verify_shuffled(run.dataset(), run.cfg(), b_star,
                              std::stoull(run.get("shuffle_pairs")), &shuffled.p),
        "shuffle check");
  Matrix m;
  estimate_matrix(run, b_star, m);
  CString stab;
  CString hist;
  check(miest_verify_stability(run.dataset(), run.cfg(), m.m, b_star, run.get_double("fraction"),
                               run.get_u32("bins"), &stab.p, &hist.p),
        "stability check");
  Json body;
  body["b_star"] = b_star;
  body["shuffled"] = Json::parse(shuffled.str());
  body["stability"] = Json::parse(stab.str());
  std::cout << "shuffled mean " << body["shuffled"]["mean_bits"].dump() << " bits (sem "
            << body["shuffled"]["sem_bits"].dump() << "); stability share above 0.1 bits "
            << body["stability"]["share_above_0_1_bits"].dump() << '\n';
  write_atomic(run.out_path("verify.json"), with_config(run, body).dump(2) + "\n");
  write_atomic(run.out_path("stability_histogram.csv"), run.config_comment() + hist.str());
  write_error_report(run, "verify_errors.json", sidecar(m)["skipped"]);
  return kOk;
}

int cmd_compare_pc(Run& run) {
  const auto b_star = run.pair_level();
  Matrix m;
  estimate_matrix(run, b_star, m);
  CString csv;
  check(miest_compare_pc(run.dataset(), m.m, &csv.p), "compare-pc");
  write_atomic(run.out_path("compare_pc.csv"), run.config_comment() + csv.str());
  Json errors = sidecar(m)["skipped"];
  std::istringstream rows(csv.str());
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    if (line.back() != ',') errors.push_back({{"row", line}});
  }
  write_error_report(run, "compare_pc_errors.json", std::move(errors));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bias-corrected mutual information and multi-information estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(miest_version()));

  std::string config_path;
  std::map<std::string, std::string> flags;

  struct Sub {
    CLI::App* app;
    int (*fn)(Run&);
  };
  const std::vector<std::pair<std::string, std::string>> subs_info = {
      {"calibrate", "shuffle calibration of the level cap b*"},
      {"pair", "one pair with full extrapolation detail"},
      {"matrix", "all-pairs MI matrix with metadata sidecar"},
      {"triplets", "chain-rule triplets within groups"},
      {"verify", "shuffle-zero and subsample-stability checks"},
      {"compare-pc", "Pearson correlation against MI per pair"}};
  int (*fns[])(Run&) = {cmd_calibrate, cmd_pair, cmd_matrix, cmd_triplets, cmd_verify,
                        cmd_compare_pc};

  std::vector<Sub> subs;
  std::vector<std::string> all_keys = kEngineKeys;
  for (const auto& k : kDriverKeys) all_keys.push_back(k.key);
  for (std::size_t i = 0; i < subs_info.size(); ++i) {
    auto* sc = app.add_subcommand(subs_info[i].first, subs_info[i].second);
    sc->add_option("--config", config_path, "key=value, JSON or previous output file");
    for (const auto& key : all_keys) {
      sc->add_option_function<std::string>(
          flag_of(key), [&flags, key](const std::string& v) { flags[key] = v; },
          "sets " + key + " (env " + env_of(key) + ")");
    }
    sc->add_option_function<std::string>(
        "--probes", [&flags](const std::string& v) { flags["probe_pairs"] = v; },
        "alias of --probe-pairs");
    subs.push_back({sc, fns[i]});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    Run run;
    run.resolve(config_path, flags);
    for (const auto& s : subs) {
      if (s.app->parsed()) return s.fn(run);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
