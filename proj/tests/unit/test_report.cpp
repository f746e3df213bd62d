#include <doctest.h>

#include <charconv>
#include <cmath>
#include <sstream>

#include "miest/report.hpp"
#include "support.hpp"

using namespace miest;

TEST_CASE("numbers round-trip through their text form") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = testing::standard_normal(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    const std::string s = report::format_double(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(report::format_double(0.5) == "0.5");
  CHECK(report::format_double(NAN) == "nan");
}

TEST_CASE("matrix csv leaves the diagonal and skipped pairs empty") {
  std::vector<PairEntry> entries(3);
  entries[0] = {0, 1, true, 0.25, 3, 0.01, 300, ""};
  entries[1] = {0, 2, false, 0.0, 0, 0.0, 10, "InsufficientJoint: 10"};
  entries[2] = {1, 2, true, 0.125, 2, 0.02, 300, ""};
  const MIMatrix m({"a", "b", "c,d"}, entries);
  const std::string csv = report::matrix_csv(m);
  CHECK(csv == ",a,b,\"c,d\"\na,,0.25,\nb,0.25,,0.125\n\"c,d\",,0.125,\n");
  const auto side = report::matrix_sidecar(m);
  CHECK(side["n_estimated"] == 2);
  CHECK(side["n_skipped"] == 1);
  CHECK(side["pairs"][1]["chosen_b"] == 2);
  CHECK(side["skipped"][0]["reason"] == "InsufficientJoint: 10");
  CHECK(side["mean_bits"].get<double>() == 0.1875);
}

TEST_CASE("pair report carries every trial point") {
  Rng rng(2);
  auto [x, y] = testing::correlated(600, 0.5, rng);
  const auto ds = testing::make_dataset({x, y});
  const auto e = estimate_pair(x, y, 4, make_schedule(0.7, 0.9, 21), 1);
  const auto j = report::pair_report(ds, 0, 1, e, 0.5);
  CHECK(j["var_b"] == "v1");
  CHECK(j["intercept_vs_b"].size() == 3);
  CHECK(j["extrapolations"][0]["points"].size() == 50);
  CHECK(j["extrapolations"][2]["intercept_bits"].get<double>() == e.per_b.at(4).intercept_bits);
  CHECK(j["pearson"].get<double>() == 0.5);
  CHECK(report::pair_report(ds, 0, 1, e, std::nullopt)["pearson"].is_null());
}

TEST_CASE("calibration table and json") {
  CalibrationReport r;
  r.order = ProbeOrder::Triplets;
  r.per_level[2] = {0.001, 0.01, 100};
  r.per_level[3] = {0.02, 0.01, 100};
  r.b_star = 2;
  r.probes = 100;
  const auto t = report::calibration_table(r);
  CHECK(t.find("triplets") != std::string::npos);
  CHECK(t.find("b_star: 2") != std::string::npos);
  const auto j = report::to_json(r);
  CHECK(j["per_level"][1]["sem_bits"].get<double>() == doctest::Approx(0.001));
  r.b_star.reset();
  CHECK(report::to_json(r)["b_star"].is_null());
}

TEST_CASE("histogram bins cover the range") {
  const std::vector<double> v{0.0, 0.1, 0.2, 0.3, 1.0};
  const auto h = report::histogram_csv(v, 2);
  CHECK(h == "lower,upper,count\n0,0.5,4\n0.5,1,1\n");
  CHECK(report::histogram_csv({}, 3) == "lower,upper,count\n");
}

TEST_CASE("pc comparison table") {
  const auto ds = testing::make_dataset({{1, 2, 3}, {1, 3, 2}});
  std::vector<PcMiPoint> pts(2);
  pts[0] = {0, 1, 0.5, 0.2, 0.2075187496394219, 3, std::nullopt};
  pts[1] = {0, 1, 1.0, 0.9, 0.0, 3, std::string("Divergent: pc")};
  CHECK(report::compare_pc_csv(pts, ds) ==
        "var_a,var_b,n_joint,pc,mi_bits,gaussian_mi_bits,error\n"
        "v0,v1,3,0.5,0.2,0.2075187496394219,\n"
        "v0,v1,3,,0.9,,Divergent: pc\n");
}
