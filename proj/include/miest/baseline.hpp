#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miest/calibrate.hpp"
#include "miest/dataset.hpp"

namespace miest {

// Pearson correlation with population (n) denominators.
double pearson(std::span<const double> u, std::span<const double> v);

// MI of a bivariate Gaussian with correlation pc: -0.5 log2(1 - pc^2).
double gaussian_mi(double pc);

struct PcMiPoint {
  std::size_t var_a = 0;
  std::size_t var_b = 0;
  double pc = 0.0;
  double mi_bits = 0.0;
  double gaussian_mi_bits = 0.0;
  std::size_t n_joint = 0;
  std::optional<std::string> error;  // set when pc or its Gaussian MI failed
};

struct PairEstimate {
  std::size_t var_a;
  std::size_t var_b;
  MIEstimate estimate;
};

// One point per pair, Pearson taken on the pair's joint sample; sorted by
// (var_a, var_b).
std::vector<PcMiPoint> compare_report(std::span<const PairEstimate> estimates, const Dataset& ds);

}  // namespace miest
