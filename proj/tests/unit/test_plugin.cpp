#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "miest/error.hpp"
#include "miest/plugin.hpp"
#include "miest/quantize.hpp"
#include "support.hpp"

using namespace miest;

namespace {

ContingencyTable table(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> counts) {
  ContingencyTable t;
  t.rows = rows;
  t.cols = cols;
  t.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  t.counts = std::move(counts);
  return t;
}

// Random joint table over dims; some cells forced to zero.
JointTable random_table(const std::vector<std::size_t>& dims, Rng& rng) {
  JointTable jt;
  jt.dims = dims;
  std::size_t cells = 1;
  for (auto d : dims) cells *= d;
  jt.probs.resize(cells);
  for (auto& p : jt.probs) p = (rng() % 5 == 0) ? 0.0 : testing::uniform01(rng);
  jt.probs[0] += 0.1;
  const double s = std::accumulate(jt.probs.begin(), jt.probs.end(), 0.0);
  for (auto& p : jt.probs) p /= s;
  const double s2 = std::accumulate(jt.probs.begin(), jt.probs.end(), 0.0);
  jt.probs[0] += 1.0 - s2;
  return jt;
}

}  // namespace

TEST_CASE("plug-in MI of fixed tables") {
  const auto t = table(2, 2, {40, 10, 10, 40});
  CHECK(plugin_mi(t) == doctest::Approx(testing::naive_mi({{40, 10}, {10, 40}})).epsilon(1e-12));
  CHECK(plugin_mi(t) == doctest::Approx(0.2780719051126377).epsilon(1e-12));
  CHECK(plugin_mi(table(2, 2, {25, 25, 25, 25})) == 0.0);
  CHECK(plugin_mi(table(3, 3, {5, 0, 0, 0, 5, 0, 0, 0, 5})) ==
        doctest::Approx(std::log2(3.0)).epsilon(1e-12));
}

TEST_CASE("plug-in entropy") {
  const std::vector<std::uint64_t> c{75, 25};
  const double oracle = -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25));
  CHECK(plugin_entropy(c) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(plugin_entropy(c) == doctest::Approx(0.8112781244591328).epsilon(1e-12));
  const std::vector<std::uint64_t> one{0, 9, 0};
  CHECK(plugin_entropy(one) == 0.0);
}

TEST_CASE("plug-in MI equals its definition on random tables") {
  Rng rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t r = 1 + rng() % 6;
    const std::size_t c = 1 + rng() % 6;
    std::vector<std::uint64_t> counts(r * c);
    std::vector<std::vector<double>> nested(r, std::vector<double>(c));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        counts[i * c + j] = rng() % 3 == 0 ? 0 : rng() % 1000;
        nested[i][j] = static_cast<double>(counts[i * c + j]);
      }
    counts[0] += 1;
    nested[0][0] += 1;
    const auto t = table(r, c, counts);
    const double v = plugin_mi(t);
    CHECK(v >= 0.0);
    CHECK(v == doctest::Approx(testing::naive_mi(nested)).epsilon(1e-10).scale(1.0));
    // Exact accumulation makes orientation and cell order irrelevant to the bit.
    CHECK(plugin_mi(t.transposed()) == v);
    std::vector<std::uint32_t> c32(counts.begin(), counts.end());
    CHECK(plugin_mi_counts(c32, r, c, t.total) == v);
  }
}

TEST_CASE("permuting rows or columns leaves the value bit-identical") {
  Rng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t r = 2 + rng() % 5;
    const std::size_t c = 2 + rng() % 5;
    std::vector<std::uint64_t> counts(r * c);
    for (auto& x : counts) x = rng() % 200;
    counts[0] += 1;
    std::vector<std::size_t> pr(r);
    std::vector<std::size_t> pc(c);
    std::iota(pr.begin(), pr.end(), 0);
    std::iota(pc.begin(), pc.end(), 0);
    std::shuffle(pr.begin(), pr.end(), rng);
    std::shuffle(pc.begin(), pc.end(), rng);
    std::vector<std::uint64_t> permuted(r * c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) permuted[pr[i] * c + pc[j]] = counts[i * c + j];
    CHECK(plugin_mi(table(r, c, counts)) == plugin_mi(table(r, c, permuted)));
  }
}

TEST_CASE("coarsening never increases plug-in MI") {
  Rng rng(29);
  for (int rep = 0; rep < 30; ++rep) {
    auto [x, y] = testing::correlated(500, 0.5, rng);
    const auto qx = equal_population_quantize(x, 8);
    const auto qy = equal_population_quantize(y, 8);
    QuantizedVector cx{4, {}};
    for (auto s : qx.symbols) cx.symbols.push_back(s / 2);
    const double fine = plugin_mi(tabulate(qx, qy));
    const double coarse = plugin_mi(tabulate(cx, qy));
    CHECK(coarse <= fine + 1e-12);
  }
}

TEST_CASE("tabulate counts co-occurrences") {
  QuantizedVector a{2, {0, 0, 1, 1, 1}};
  QuantizedVector b{3, {0, 2, 2, 2, 1}};
  const auto t = tabulate(a, b);
  CHECK(t.counts == std::vector<std::uint64_t>{1, 0, 1, 0, 1, 2});
  CHECK(t.total == 5);
  CHECK(t.row_sums() == std::vector<std::uint64_t>{2, 3});
  CHECK(t.col_sums() == std::vector<std::uint64_t>{1, 1, 3});
}

TEST_CASE("exact multi-information of XOR and copy") {
  JointTable xor3{{2, 2, 2}, std::vector<double>(8, 0.0)};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) xor3.probs[a * 4 + b * 2 + (a ^ b)] = 0.25;
  CHECK(exact_multiinformation(xor3) == doctest::Approx(1.0).epsilon(1e-12));
  const std::size_t ab[] = {0, 1};
  CHECK(entropy_bits(marginal(xor3, ab)) == doctest::Approx(2.0));

  JointTable copy{{2, 2}, {0.5, 0.0, 0.0, 0.5}};
  CHECK(exact_multiinformation(copy) == doctest::Approx(1.0));

  JointTable bad{{2, 2}, {0.5, 0.2, 0.2, 0.2}};
  CHECK_THROWS_AS(exact_multiinformation(bad), Error);
}

TEST_CASE("chain terms sum to the multi-information for every ordering") {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t r = 2 + rng() % 3;
    std::vector<std::size_t> dims(r);
    for (auto& d : dims) d = 1 + rng() % 4;
    const auto jt = random_table(dims, rng);
    const double total = exact_multiinformation(jt);
    std::vector<std::size_t> order(r);
    std::iota(order.begin(), order.end(), 0);
    do {
      const auto terms = exact_chain_terms(jt, order);
      REQUIRE(terms.size() == r - 1);
      double sum = 0.0;
      for (double t : terms) {
        CHECK(t >= -1e-12);
        sum += t;
      }
      CHECK(std::abs(sum - total) <= 1e-10);
    } while (std::next_permutation(order.begin(), order.end()));
  }
}

TEST_CASE("exactly independent count tables give exactly zero") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 2 + rng() % 5;
    const std::size_t cols = 2 + rng() % 5;
    std::vector<std::uint64_t> r(rows);
    std::vector<std::uint64_t> c(cols);
    for (auto& v : r) v = 1 + rng() % 97;
    for (auto& v : c) v = 1 + rng() % 89;
    std::vector<std::uint64_t> counts;
    for (auto a : r)
      for (auto b : c) counts.push_back(a * b);
    CHECK(plugin_mi(table(rows, cols, counts)) == 0.0);
  }
}
