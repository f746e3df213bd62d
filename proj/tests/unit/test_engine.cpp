#include <doctest.h>

#include <cmath>
#include <sstream>

#include "miest/engine.hpp"
#include "miest/error.hpp"
#include "support.hpp"

using namespace miest;

namespace {

// v0..v2 share a latent factor, v3..v5 share another, v6 is noise.
Dataset blocks(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const auto f1 = testing::normals(n, rng);
  const auto f2 = testing::normals(n, rng);
  std::vector<std::vector<double>> vars;
  for (int i = 0; i < 3; ++i) {
    auto v = testing::normals(n, rng);
    for (std::size_t k = 0; k < n; ++k) v[k] = f1[k] + 0.5 * v[k];
    vars.push_back(v);
  }
  for (int i = 0; i < 3; ++i) {
    auto v = testing::normals(n, rng);
    for (std::size_t k = 0; k < n; ++k) v[k] = f2[k] + 0.7 * v[k];
    vars.push_back(v);
  }
  vars.push_back(testing::normals(n, rng));
  return testing::make_dataset(vars);
}

BatchConfig small_config() {
  BatchConfig c;
  c.probe_pairs = 30;
  c.probe_triplets = 30;
  c.baseline_tuples = 30;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  BatchConfig c;
  CHECK_NOTHROW(c.validate());
  c.b_max = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.f1 = 0.95;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.discrete_levels = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.inner_pair_cap = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  CHECK(c.schedule().total_trials() == 50);
  CHECK(c.calibration_options(ProbeOrder::Pairs).seed !=
        c.calibration_options(ProbeOrder::Triplets).seed);
}

TEST_CASE("all-pairs matrix is symmetric with an undefined diagonal") {
  const auto ds = blocks(400, 1);
  auto cfg = small_config();
  const auto m = estimate_all_pairs(ds, cfg, 5);
  CHECK(m.size() == 7);
  CHECK(m.entries().size() == 21);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK_FALSE(m.value(i, i));
    for (std::size_t j = 0; j < 7; ++j) {
      if (i != j) CHECK(m.value(i, j) == m.value(j, i));
    }
  }
  CHECK(*m.value(0, 1) > 0.5);
  CHECK(*m.value(0, 1) > *m.value(0, 4) + 0.3);
  CHECK(std::abs(*m.value(6, 3)) < 0.1);
  CHECK(MIMatrix::pair_index(0, 1, 7) == 0);
  CHECK(MIMatrix::pair_index(5, 6, 7) == 20);
  CHECK(m.pair_estimates().size() == 21);
  CHECK(m.entry(3, 0).a == 0);
}

TEST_CASE("matrix is identical for any worker count") {
  const auto ds = blocks(300, 2);
  auto cfg = small_config();
  const auto a = estimate_all_pairs(ds, cfg, 4);
  cfg.workers = 4;
  const auto b = estimate_all_pairs(ds, cfg, 4);
  for (std::size_t p = 0; p < a.entries().size(); ++p) {
    CHECK(a.entries()[p].value_bits == b.entries()[p].value_bits);
    CHECK(a.entries()[p].error_bar_bits == b.entries()[p].error_bar_bits);
    CHECK(a.entries()[p].chosen_b == b.entries()[p].chosen_b);
  }
}

TEST_CASE("a pair's value does not depend on the rest of the dataset") {
  const auto ds = blocks(300, 3);
  auto cfg = small_config();
  const auto m = estimate_all_pairs(ds, cfg, 4);
  const auto e = estimate_dataset_pair(ds, 4, 2, cfg, 4);
  CHECK(e.value_bits == *m.value(2, 4));
  CHECK_THROWS_AS(estimate_dataset_pair(ds, 2, 2, cfg, 4), Error);
}

TEST_CASE("pairs with too few joint samples are skipped with a reason") {
  std::vector<std::string> names{"a", "b", "c"};
  const std::size_t n = 300;
  Rng rng(4);
  std::vector<double> values = testing::normals(3 * n, rng);
  std::vector<std::uint8_t> present(3 * n, 1);
  for (std::size_t i = 0; i < 150; ++i) present[2 * n + i] = 0;  // c observed 150 times
  const Dataset ds(names, n, values, present);
  auto cfg = small_config();
  const auto m = estimate_all_pairs(ds, cfg, 4);
  CHECK(m.value(0, 1));
  CHECK_FALSE(m.value(0, 2));
  CHECK(m.entry(0, 2).n_joint == 150);
  CHECK(m.entry(0, 2).skip_reason.rfind("InsufficientJoint", 0) == 0);
  CHECK(m.mean_value() == *m.value(0, 1));
  try {
    estimate_dataset_pair(ds, 0, 2, cfg, 4);
    FAIL("expected InsufficientSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientSamples);
  }
  cfg.min_joint_samples = 0;
  CHECK(estimate_all_pairs(ds, cfg, 4).value(0, 2));
}

TEST_CASE("calibration through the batch config") {
  const auto ds = blocks(300, 5);
  auto cfg = small_config();
  cfg.b_max = 5;
  const auto r = calibrate(ds, cfg, ProbeOrder::Pairs);
  CHECK(r.per_level.size() == 4);
  cfg.discrete_levels = 4;
  CHECK_THROWS_AS(calibrate(ds, cfg, ProbeOrder::Pairs), Error);
}

TEST_CASE("pre-quantized data run at their native alphabet") {
  Rng rng(6);
  const std::size_t n = 1500;
  std::vector<double> a(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = static_cast<double>(rng() % 6);
    b[i] = rng() % 2 ? a[i] : static_cast<double>(rng() % 6);
  }
  const auto ds = testing::make_dataset({a, b});
  auto cfg = small_config();
  cfg.discrete_levels = 6;
  const auto e = estimate_dataset_pair(ds, 0, 1, cfg, 0);
  CHECK(e.chosen_b == 6);
  CHECK(e.per_b.size() == 1);
  CHECK(e.value_bits > 0.5);
  cfg.discrete_levels = 5;
  CHECK_THROWS_AS(estimate_dataset_pair(ds, 0, 1, cfg, 0), Error);
}

TEST_CASE("shuffle verification") {
  const auto ds = blocks(400, 7);
  auto cfg = small_config();
  const auto s = verify_shuffled(ds, cfg, 4, 21);
  CHECK(s.n_pairs == 21);
  CHECK(s.n_failed == 0);
  CHECK(s.values.size() == 21);
  CHECK(std::abs(s.mean_bits) < 0.05);
  CHECK(s.sem_bits == doctest::Approx(s.std_bits / std::sqrt(21.0)));
}

TEST_CASE("stability with the whole sample reproduces the matrix") {
  const auto ds = blocks(300, 8);
  auto cfg = small_config();
  const auto m = estimate_all_pairs(ds, cfg, 4);
  const auto same = verify_subsample_stability(ds, cfg, m, 4, 1.0);
  CHECK(same.n_compared == 21);
  for (double d : same.differences) CHECK(d == 0.0);
  const auto part = verify_subsample_stability(ds, cfg, m, 4, 2.0 / 3.0);
  CHECK(part.n_compared == 21);
  CHECK(part.share_above_0_1_bits <= 0.5);
  CHECK_THROWS_AS(verify_subsample_stability(ds, cfg, m, 4, 0.0), Error);
}

TEST_CASE("group file parsing") {
  const auto ds = blocks(50, 9);
  std::istringstream ok("# comment\n\nA: v0, v1,v2\nB:v3,v5\n");
  const auto g = parse_groups(ok, ds);
  REQUIRE(g.size() == 2);
  CHECK(g[0].label == "A");
  CHECK(g[0].members == std::vector<std::size_t>{0, 1, 2});
  CHECK(g[1].members == std::vector<std::size_t>{3, 5});
  std::istringstream unknown("A: v0,q\n");
  CHECK_THROWS_AS(parse_groups(unknown, ds), Error);
  std::istringstream nolabel("v0,v1\n");
  CHECK_THROWS_AS(parse_groups(nolabel, ds), Error);
  std::istringstream twice("A: v0,v0\n");
  CHECK_THROWS_AS(parse_groups(twice, ds), Error);
}

TEST_CASE("sorted matrix groups, orders and thresholds") {
  const auto ds = blocks(400, 10);
  auto cfg = small_config();
  const auto m = estimate_all_pairs(ds, cfg, 4);
  const std::vector<Group> groups{{"second", {3, 4, 5}}, {"first", {0, 1, 2}}};
  const auto s = sorted_matrix(m, groups);
  REQUIRE(s.order.size() == 7);
  CHECK(s.group_labels == std::vector<std::string>{"second", "first", ""});
  CHECK(s.group_starts == std::vector<std::size_t>{0, 3, 6});
  CHECK(s.order[6] == 6);
  CHECK(s.threshold_bits == *m.mean_value());
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(s.rendered[i * 7 + i] == 0.0);
    for (std::size_t j = 0; j < 7; ++j) {
      const double v = s.rendered[i * 7 + j];
      CHECK((v == 0.0 || v >= s.threshold_bits));
    }
  }
}

TEST_CASE("triplet counts and budget") {
  CHECK(triplet_count(27) == 2925);
  CHECK(triplet_count(2) == 0);
  CHECK(triplet_count(3) == 1);
  const auto ds = blocks(400, 11);
  auto cfg = small_config();
  cfg.triplet_budget = 3;
  const std::vector<std::size_t> members{0, 1, 2, 3};
  CHECK_THROWS_AS(estimate_group_triplets(ds, members, cfg, 3), Error);
  cfg.triplet_budget = 4;
  const auto recs = estimate_group_triplets(ds, members, cfg, 3);
  REQUIRE(recs.size() == 4);
  CHECK(recs[0].vars == std::array<std::size_t, 3>{0, 1, 2});
  REQUIRE(recs[0].estimate);
  CHECK(recs[0].estimate->mean_bits > recs[3].estimate->mean_bits);
  CHECK(recs[0].estimate->chains[0].terms[0].per_b.at(2).points.empty());
}

TEST_CASE("exceedance and group summary") {
  const std::vector<double> v{0.1, 0.2, 0.3, 0.4};
  CHECK(exceedance(v, 0.2) == 0.5);
  CHECK(exceedance(v, 1.0) == 0.0);
  const Group g{"G", {0, 1, 2}};
  const std::vector<double> bt{0.0, 0.2};
  const std::vector<double> bp{0.05, 0.15};
  const auto s = group_summary(g, v, v, bt, bp);
  CHECK(s.label == "G");
  CHECK(s.mean_triplet_bits == doctest::Approx(0.25));
  CHECK(s.baseline_triplet_mean == doctest::Approx(0.1));
  CHECK(s.exceedance_triplet == 0.75);
  CHECK(s.exceedance_pair == 0.75);
  CHECK_THROWS_AS(group_summary(g, v, v, {}, bp), Error);
}

TEST_CASE("baselines draw unshuffled tuples") {
  const auto ds = blocks(300, 12);
  auto cfg = small_config();
  const auto p = baseline_pair_values(ds, cfg, 4, 10);
  CHECK(p.size() == 10);
  const auto t = baseline_triplet_values(ds, cfg, 2, 5);
  CHECK(t.size() == 5);
  const std::vector<std::size_t> members{0, 1, 2};
  CHECK(group_pair_values(ds, members, cfg, 4).size() == 3);
}
