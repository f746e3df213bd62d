#include "miest/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "miest/error.hpp"
#include "report_format.hpp"

namespace miest {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

struct Cell {
  double value = 0.0;
  bool present = false;
};

Cell parse_cell(std::string_view cell, const LoadOptions& options, std::size_t line_no) {
  if (cell.empty() || cell == options.missing_token) return {};
  std::string_view digits = cell;
  if (digits.front() == '+') digits.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec == std::errc::result_out_of_range) {
    throw Error(ErrorCode::NonFinite, "line " + std::to_string(line_no) +
                                          ": value out of range: '" + std::string(cell) + "'");
  }
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) +
                                      ": not a number or missing token: '" + std::string(cell) +
                                      "'");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::NonFinite, "line " + std::to_string(line_no) +
                                          ": non-finite value '" + std::string(cell) + "'");
  }
  return {v, true};
}

std::string default_name(std::size_t i) { return "v" + std::to_string(i); }

}  // namespace

Dataset::Dataset(std::vector<std::string> names, std::size_t n_obs, std::vector<double> values,
                 std::vector<std::uint8_t> present)
    : names_(std::move(names)),
      n_obs_(n_obs),
      values_(std::move(values)),
      present_(std::move(present)) {
  if (names_.empty() || n_obs_ == 0) {
    throw Error(ErrorCode::EmptyData, "dataset needs at least one variable and one observation");
  }
  if (values_.size() != names_.size() * n_obs_ || present_.size() != values_.size()) {
    throw Error(ErrorCode::InvalidArgument, "values and mask must both be n_vars x n_obs");
  }
  index_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw Error(ErrorCode::DuplicateName, "duplicate variable name '" + names_[i] + "'");
    }
  }
}

std::span<const double> Dataset::values(std::size_t var) const {
  if (var >= num_vars()) throw Error(ErrorCode::InvalidArgument, "variable index out of range");
  return {values_.data() + var * n_obs_, n_obs_};
}

std::span<const std::uint8_t> Dataset::present(std::size_t var) const {
  if (var >= num_vars()) throw Error(ErrorCode::InvalidArgument, "variable index out of range");
  return {present_.data() + var * n_obs_, n_obs_};
}

bool Dataset::is_present(std::size_t var, std::size_t obs) const {
  return present(var)[obs] != 0;
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dataset::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
}

Dataset load_dataset(std::istream& in, const LoadOptions& options) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    for (auto c : split(line, options.delimiter)) cells.emplace_back(c);
    rows.push_back(std::move(cells));
    line_numbers.push_back(line_no);
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read error");

  const bool rows_are_vars = options.orientation == Orientation::VariablesAsRows;
  const bool header_line = rows_are_vars ? options.has_observation_labels : options.has_names;
  const bool label_column = rows_are_vars ? options.has_names : options.has_observation_labels;

  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (header_line) {
    if (rows.empty()) throw Error(ErrorCode::EmptyData, "missing header line");
    header = rows.front();
    first_data = 1;
  }
  const std::size_t n_lines = rows.size() - first_data;
  if (n_lines == 0) throw Error(ErrorCode::EmptyData, "no data lines");

  const std::size_t width = rows[first_data].size();
  const std::size_t skip = label_column ? 1 : 0;
  if (width <= skip) throw Error(ErrorCode::EmptyData, "no data columns");
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw Error(ErrorCode::RaggedRows, "line " + std::to_string(line_numbers[r]) + " has " +
                                             std::to_string(rows[r].size()) + " cells, expected " +
                                             std::to_string(width));
    }
  }
  if (header_line && header.size() != width) {
    throw Error(ErrorCode::RaggedRows, "header has " + std::to_string(header.size()) +
                                           " cells, expected " + std::to_string(width));
  }

  const std::size_t n_cols = width - skip;
  const std::size_t n_vars = rows_are_vars ? n_lines : n_cols;
  const std::size_t n_obs = rows_are_vars ? n_cols : n_lines;

  std::vector<std::string> names(n_vars);
  for (std::size_t v = 0; v < n_vars; ++v) {
    if (rows_are_vars) {
      names[v] = options.has_names ? rows[first_data + v][0] : default_name(v);
    } else {
      names[v] = options.has_names ? header[skip + v] : default_name(v);
    }
    if (names[v].empty()) {
      throw Error(ErrorCode::Parse, "empty variable name for variable " + std::to_string(v));
    }
  }

  std::vector<double> values(n_vars * n_obs, 0.0);
  std::vector<std::uint8_t> present(n_vars * n_obs, 0);
  for (std::size_t r = 0; r < n_lines; ++r) {
    const auto& cells = rows[first_data + r];
    for (std::size_t c = 0; c < n_cols; ++c) {
      const Cell cell = parse_cell(cells[skip + c], options, line_numbers[first_data + r]);
      const std::size_t var = rows_are_vars ? r : c;
      const std::size_t obs = rows_are_vars ? c : r;
      values[var * n_obs + obs] = cell.present ? cell.value : 0.0;
      present[var * n_obs + obs] = cell.present ? 1 : 0;
    }
  }
  return Dataset(std::move(names), n_obs, std::move(values), std::move(present));
}

Dataset load_dataset_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return load_dataset(in, options);
}

void write_dataset(std::ostream& out, const Dataset& ds, const LoadOptions& options) {
  const char d = options.delimiter;
  auto cell = [&](std::size_t var, std::size_t obs) {
    return ds.is_present(var, obs) ? detail::format_double(ds.values(var)[obs])
                                   : options.missing_token;
  };
  if (options.orientation == Orientation::VariablesAsRows) {
    if (options.has_observation_labels) {
      if (options.has_names) out << "id";
      for (std::size_t o = 0; o < ds.num_obs(); ++o) {
        if (o > 0 || options.has_names) out << d;
        out << "obs" << o;
      }
      out << '\n';
    }
    for (std::size_t v = 0; v < ds.num_vars(); ++v) {
      if (options.has_names) out << ds.name(v);
      for (std::size_t o = 0; o < ds.num_obs(); ++o) {
        if (o > 0 || options.has_names) out << d;
        out << cell(v, o);
      }
      out << '\n';
    }
  } else {
    if (options.has_names) {
      if (options.has_observation_labels) out << "id";
      for (std::size_t v = 0; v < ds.num_vars(); ++v) {
        if (v > 0 || options.has_observation_labels) out << d;
        out << ds.name(v);
      }
      out << '\n';
    }
    for (std::size_t o = 0; o < ds.num_obs(); ++o) {
      if (options.has_observation_labels) out << "obs" << o;
      for (std::size_t v = 0; v < ds.num_vars(); ++v) {
        if (v > 0 || options.has_observation_labels) out << d;
        out << cell(v, o);
      }
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write error");
}

JointSample joint_sample(const Dataset& ds, std::span<const std::size_t> vars) {
  if (vars.empty()) throw Error(ErrorCode::InvalidArgument, "joint_sample needs variables");
  for (auto v : vars) {
    if (v >= ds.num_vars()) throw Error(ErrorCode::InvalidArgument, "variable index out of range");
  }
  JointSample js;
  for (std::size_t o = 0; o < ds.num_obs(); ++o) {
    const bool all = std::all_of(vars.begin(), vars.end(),
                                 [&](std::size_t v) { return ds.is_present(v, o); });
    if (all) js.indices.push_back(o);
  }
  js.columns.resize(vars.size());
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const auto x = ds.values(vars[k]);
    auto& col = js.columns[k];
    col.reserve(js.indices.size());
    for (auto o : js.indices) col.push_back(x[o]);
  }
  return js;
}

JointSample shuffle_columns(const JointSample& js, std::size_t which, Rng& rng) {
  if (which >= js.columns.size()) {
    throw Error(ErrorCode::InvalidArgument, "shuffle column out of range");
  }
  JointSample out = js;
  auto& col = out.columns[which];
  for (std::size_t i = col.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(col[i - 1], col[j]);
  }
  return out;
}

}  // namespace miest
