#include <doctest.h>

#include <cmath>

#include "miest/baseline.hpp"
#include "miest/error.hpp"
#include "support.hpp"

using namespace miest;

TEST_CASE("pearson correlation") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{1, 3, 2};
  CHECK(pearson(a, b) == doctest::Approx(0.5));
  const std::vector<double> c{3, 2, 1};
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  CHECK(pearson(a, a) == 1.0);
  const std::vector<double> flat{2, 2, 2};
  CHECK_THROWS_AS(pearson(a, flat), Error);
  const std::vector<double> one{1};
  CHECK_THROWS_AS(pearson(one, one), Error);
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(pearson(a, two), Error);
}

TEST_CASE("gaussian MI") {
  CHECK(gaussian_mi(0.6) == doctest::Approx(-0.5 * std::log2(0.64)));
  CHECK(gaussian_mi(0.6) == doctest::Approx(0.32192809488736235));
  CHECK(gaussian_mi(0.0) == 0.0);
  CHECK(gaussian_mi(-0.6) == gaussian_mi(0.6));
  try {
    gaussian_mi(1.0);
    FAIL("expected Divergent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Divergent);
  }
}

TEST_CASE("comparison report recomputes correlation on the joint sample") {
  std::vector<std::string> names{"a", "b", "c"};
  // b is missing where a and b would disagree; c is constant.
  std::vector<double> values{1, 2, 3, 4, 9, 2, 3, 4, 5, 0, 5, 5, 5, 5};
  values.resize(15, 5.0);
  std::vector<std::uint8_t> present(15, 1);
  present[5] = 0;
  present[9] = 0;
  const Dataset ds(names, 5, values, present);
  MIEstimate e1;
  e1.value_bits = 0.7;
  MIEstimate e2;
  e2.value_bits = 0.1;
  std::vector<PairEstimate> ests{{2, 0, e2}, {0, 1, e1}};
  const auto pts = compare_report(ests, ds);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].var_a == 0);
  CHECK(pts[0].var_b == 1);
  CHECK(pts[0].n_joint == 3);
  CHECK(pts[0].pc == doctest::Approx(1.0));
  CHECK(pts[0].error);  // perfectly correlated: Gaussian MI diverges
  CHECK(pts[1].var_a == 0);
  CHECK(pts[1].var_b == 2);
  CHECK(pts[1].mi_bits == 0.1);
  REQUIRE(pts[1].error);
  CHECK(pts[1].error->find("zero variance") != std::string::npos);
}

TEST_CASE("high MI can coexist with near-zero correlation") {
  Rng rng(8);
  const auto x = testing::normals(4000, rng);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * x[i] + 0.3 * testing::standard_normal(rng);
  CHECK(std::abs(pearson(x, y)) < 0.1);
  const auto e = estimate_pair(x, y, 6, make_schedule(0.7, 0.9, 21), 1);
  CHECK(e.value_bits > 0.5);
}
