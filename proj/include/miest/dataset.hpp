#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "miest/rng.hpp"

namespace miest {

enum class Orientation {
  VariablesAsRows,     // one line per variable: name, obs1, obs2, ...
  VariablesAsColumns,  // header line of names, one line per observation
};

struct LoadOptions {
  char delimiter = ',';
  std::string missing_token = "NA";
  Orientation orientation = Orientation::VariablesAsRows;
  // Variable names are present (first column for rows, first line for
  // columns). Without them variables are named v0, v1, ...
  bool has_names = true;
  // An extra line (rows) or leading column (columns) of observation labels
  // that is skipped.
  bool has_observation_labels = false;
};

// Variables x observations matrix with an explicit missing-value mask.
// Immutable after construction.
class Dataset {
public:
  Dataset(std::vector<std::string> names, std::size_t n_obs,
          std::vector<double> values, std::vector<std::uint8_t> present);

  std::size_t num_vars() const noexcept { return names_.size(); }
  std::size_t num_obs() const noexcept { return n_obs_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t var) const { return names_.at(var); }

  std::span<const double> values(std::size_t var) const;
  std::span<const std::uint8_t> present(std::size_t var) const;
  bool is_present(std::size_t var, std::size_t obs) const;

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws UnknownVariable.
  std::size_t index_of(std::string_view name) const;

private:
  std::vector<std::string> names_;
  std::size_t n_obs_;
  std::vector<double> values_;
  std::vector<std::uint8_t> present_;
  std::unordered_map<std::string, std::size_t> index_;
};

Dataset load_dataset(std::istream& in, const LoadOptions& options = {});
Dataset load_dataset_file(const std::string& path, const LoadOptions& options = {});

// Writes a dataset in the layout described by `options` so that
// load_dataset(write_dataset(ds)) reproduces values and mask exactly.
void write_dataset(std::ostream& out, const Dataset& ds, const LoadOptions& options = {});

// Observations where every requested variable is present.
struct JointSample {
  std::vector<std::size_t> indices;          // strictly increasing
  std::vector<std::vector<double>> columns;  // one per requested variable

  std::size_t size() const noexcept { return indices.size(); }
};

JointSample joint_sample(const Dataset& ds, std::span<const std::size_t> vars);

// Copy of `js` with column `which` uniformly permuted.
JointSample shuffle_columns(const JointSample& js, std::size_t which, Rng& rng);

}  // namespace miest
