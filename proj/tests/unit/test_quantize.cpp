#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "miest/error.hpp"
#include "miest/quantize.hpp"
#include "support.hpp"

using namespace miest;

TEST_CASE("ties are broken by position") {
  const std::vector<double> x{1, 1, 1, 1, 2, 2};
  const auto q = equal_population_quantize(x, 2);
  CHECK(q.levels == 2);
  CHECK(q.symbols == std::vector<Symbol>{0, 0, 0, 1, 1, 1});
  CHECK(stable_order(x) == std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("symbols follow rank") {
  const std::vector<double> x{0.3, -1.0, 7.0, 2.0, 0.0};
  const auto q = equal_population_quantize(x, 5);
  CHECK(q.symbols == std::vector<Symbol>{2, 0, 4, 3, 1});
  CHECK(rank_symbol(4, 10, 3) == 1);
  CHECK(rank_symbol(9, 10, 3) == 2);
}

TEST_CASE("bins differ in size by at most one") {
  Rng rng(5);
  for (std::size_t n : {7u, 10u, 101u, 1000u}) {
    const auto x = testing::normals(n, rng);
    for (std::uint32_t b = 1; b <= std::min<std::size_t>(n, 12); ++b) {
      const auto q = equal_population_quantize(x, b);
      std::vector<std::size_t> counts(b, 0);
      for (auto s : q.symbols) {
        REQUIRE(s < b);
        ++counts[s];
      }
      const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
      CHECK(*hi - *lo <= 1);
      CHECK(*lo == n / b);
    }
  }
}

TEST_CASE("strictly increasing transforms leave symbols unchanged") {
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    auto x = testing::normals(300, rng);
    for (std::size_t i = 0; i < x.size(); i += 17) x[i] = 0.25;  // ties
    std::vector<double> t(x.size());
    std::transform(x.begin(), x.end(), t.begin(), [](double v) { return std::exp(3 * v) - 2.0; });
    for (std::uint32_t b : {2u, 3u, 7u}) {
      CHECK(equal_population_quantize(x, b).symbols == equal_population_quantize(t, b).symbols);
    }
  }
}

TEST_CASE("invalid levels") {
  const std::vector<double> x{1, 2, 3};
  CHECK_THROWS_AS(equal_population_quantize(x, 0), Error);
  CHECK_THROWS_AS(equal_population_quantize(x, 4), Error);
  const std::vector<double> bad{1, NAN, 3};
  CHECK_THROWS_AS(equal_population_quantize(bad, 2), Error);
}

TEST_CASE("combine builds the product alphabet") {
  QuantizedVector a{3, {0, 1, 2, 2}};
  QuantizedVector b{2, {1, 0, 1, 0}};
  const auto c = combine(a, b);
  CHECK(c.levels == 6);
  CHECK(c.symbols == std::vector<Symbol>{1, 2, 5, 4});
  QuantizedVector shorter{2, {1}};
  CHECK_THROWS_AS(combine(a, shorter), Error);
}

TEST_CASE("passthrough validates integer symbols") {
  const std::vector<double> ok{0, 5, 3, 1};
  CHECK(passthrough(ok, 6).symbols == std::vector<Symbol>{0, 5, 3, 1});
  const std::vector<double> frac{0, 1.5};
  CHECK_THROWS_AS(passthrough(frac, 6), Error);
  const std::vector<double> high{0, 6};
  CHECK_THROWS_AS(passthrough(high, 6), Error);
  const std::vector<double> neg{-1, 0};
  CHECK_THROWS_AS(passthrough(neg, 6), Error);
}
