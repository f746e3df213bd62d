#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "miest/dataset.hpp"
#include "miest/rng.hpp"

namespace testing {

// Box-Muller on the library RNG so streams are identical across platforms.
inline double standard_normal(miest::Rng& rng) {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  double u1 = 0.0;
  while (u1 == 0.0) u1 = static_cast<double>(rng() >> 11) * kScale;
  const double u2 = static_cast<double>(rng() >> 11) * kScale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double uniform01(miest::Rng& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline std::vector<double> normals(std::size_t n, miest::Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = standard_normal(rng);
  return v;
}

inline std::vector<double> uniforms(std::size_t n, miest::Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform01(rng);
  return v;
}

// (x, y) standard bivariate normal with correlation rho.
inline std::pair<std::vector<double>, std::vector<double>> correlated(std::size_t n, double rho,
                                                                      miest::Rng& rng) {
  std::vector<double> x(n);
  std::vector<double> y(n);
  const double s = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = standard_normal(rng);
    y[i] = rho * x[i] + s * standard_normal(rng);
  }
  return {x, y};
}

// Continuous carriers whose signs form a parity triple. The four sign
// patterns of (x, y) occur exactly n/4 times each, so every carrier has equal
// numbers of positive and negative values and a median split at b = 2
// reproduces the signs on the full sample.
struct ParityTriple {
  std::vector<double> x, y, z;
};

inline ParityTriple balanced_parity(std::size_t n, miest::Rng& rng) {
  std::vector<unsigned> pattern(n);
  for (std::size_t i = 0; i < n; ++i) pattern[i] = static_cast<unsigned>(i % 4);
  for (std::size_t i = n; i > 1; --i) std::swap(pattern[i - 1], pattern[miest::uniform_below(rng, i)]);
  ParityTriple t;
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = pattern[i] & 1u;
    const bool b = pattern[i] & 2u;
    auto carrier = [&](bool positive) {
      const double m = std::abs(standard_normal(rng));
      return positive ? m : -m;
    };
    t.x.push_back(carrier(a));
    t.y.push_back(carrier(b));
    t.z.push_back(carrier(a != b));
  }
  return t;
}

// Fully observed dataset from columns named v0, v1, ...
inline miest::Dataset make_dataset(const std::vector<std::vector<double>>& vars) {
  std::vector<std::string> names;
  std::vector<double> values;
  std::size_t n = vars.empty() ? 0 : vars.front().size();
  for (std::size_t i = 0; i < vars.size(); ++i) {
    names.push_back("v" + std::to_string(i));
    values.insert(values.end(), vars[i].begin(), vars[i].end());
  }
  std::vector<std::uint8_t> present(values.size(), 1);
  return miest::Dataset(std::move(names), n, std::move(values), std::move(present));
}

// Plug-in MI straight from the definition, in bits. Used as an oracle.
inline double naive_mi(const std::vector<std::vector<double>>& counts) {
  double total = 0.0;
  std::vector<double> rows(counts.size(), 0.0);
  std::vector<double> cols(counts.front().size(), 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      total += counts[i][j];
      rows[i] += counts[i][j];
      cols[j] += counts[i][j];
    }
  double mi = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      const double p = counts[i][j] / total;
      if (p > 0) mi += p * std::log2(p / ((rows[i] / total) * (cols[j] / total)));
    }
  return mi;
}

}  // namespace testing
