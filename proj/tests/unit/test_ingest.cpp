#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "miest/dataset.hpp"
#include "miest/error.hpp"
#include "support.hpp"

using namespace miest;

namespace {

Dataset parse(const std::string& text, LoadOptions opts = {}) {
  std::istringstream in(text);
  return load_dataset(in, opts);
}

ErrorCode code_of(const std::string& text, LoadOptions opts = {}) {
  try {
    parse(text, opts);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("rows layout with missing values") {
  const auto ds = parse("a,1,2,NA,4\nb,5,,7,8\n");
  CHECK(ds.num_vars() == 2);
  CHECK(ds.num_obs() == 4);
  CHECK(ds.name(1) == "b");
  CHECK_FALSE(ds.is_present(0, 2));
  CHECK_FALSE(ds.is_present(1, 1));
  CHECK(ds.is_present(1, 2));
  CHECK(ds.values(1)[3] == 8.0);
  CHECK(ds.index_of("b") == 1);
  CHECK_FALSE(ds.find("c"));
  CHECK_THROWS_AS(ds.index_of("c"), Error);
}

TEST_CASE("columns layout with observation labels") {
  LoadOptions o;
  o.orientation = Orientation::VariablesAsColumns;
  o.has_observation_labels = true;
  o.delimiter = '\t';
  const auto ds = parse("id\tx\ty\nr1\t1.5\t-2\nr2\t+3\tNA\n", o);
  CHECK(ds.num_vars() == 2);
  CHECK(ds.num_obs() == 2);
  CHECK(ds.values(0)[1] == 3.0);
  CHECK(ds.values(1)[0] == -2.0);
  CHECK_FALSE(ds.is_present(1, 1));
}

TEST_CASE("unnamed variables get positional names") {
  LoadOptions o;
  o.has_names = false;
  const auto ds = parse("1,2,3\n4,5,6\n", o);
  CHECK(ds.name(0) == "v0");
  CHECK(ds.name(1) == "v1");
  CHECK(ds.num_obs() == 3);
}

TEST_CASE("malformed input") {
  CHECK(code_of("a,1,2\nb,1\n") == ErrorCode::RaggedRows);
  CHECK(code_of("a,1,2\na,3,4\n") == ErrorCode::DuplicateName);
  CHECK(code_of("a,1,x\n") == ErrorCode::Parse);
  CHECK(code_of("a,1,inf\n") == ErrorCode::NonFinite);
  CHECK(code_of("a,1,nan\n") == ErrorCode::NonFinite);
  CHECK(code_of("") == ErrorCode::EmptyData);
  CHECK_THROWS_AS(load_dataset_file("/nonexistent/file.csv"), Error);
}

TEST_CASE("write then load reproduces values and mask exactly") {
  Rng rng(7);
  std::vector<std::string> names{"x", "y", "z"};
  const std::size_t n = 50;
  std::vector<double> values;
  std::vector<std::uint8_t> present;
  for (std::size_t i = 0; i < 3 * n; ++i) {
    values.push_back(testing::standard_normal(rng) * 1e-3 + 1.0 / 3.0);
    present.push_back(rng() % 7 != 0);
  }
  const Dataset ds(names, n, values, present);
  for (auto orient : {Orientation::VariablesAsRows, Orientation::VariablesAsColumns}) {
    LoadOptions o;
    o.orientation = orient;
    std::stringstream buf;
    write_dataset(buf, ds, o);
    const auto back = load_dataset(buf, o);
    REQUIRE(back.num_vars() == 3);
    REQUIRE(back.num_obs() == n);
    for (std::size_t v = 0; v < 3; ++v) {
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(back.is_present(v, i) == ds.is_present(v, i));
        if (ds.is_present(v, i)) CHECK(back.values(v)[i] == ds.values(v)[i]);
      }
    }
  }
}

TEST_CASE("joint sample keeps only jointly observed positions") {
  const auto ds = parse("a,1,2,NA,4,5\nb,6,NA,8,9,10\nc,NA,1,1,1,1\n");
  const std::size_t ab[] = {0, 1};
  const auto js = joint_sample(ds, ab);
  CHECK(js.indices == std::vector<std::size_t>{0, 3, 4});
  CHECK(js.columns[0] == std::vector<double>{1, 4, 5});
  CHECK(js.columns[1] == std::vector<double>{6, 9, 10});
  const std::size_t abc[] = {0, 1, 2};
  CHECK(joint_sample(ds, abc).indices == std::vector<std::size_t>{3, 4});
}

TEST_CASE("shuffle permutes one column and keeps its multiset") {
  Rng data_rng(3);
  const auto x = testing::normals(200, data_rng);
  const auto y = testing::normals(200, data_rng);
  const auto ds = testing::make_dataset({x, y});
  const std::size_t vars[] = {0, 1};
  const auto js = joint_sample(ds, vars);
  Rng rng(11);
  const auto sh = shuffle_columns(js, 1, rng);
  CHECK(sh.columns[0] == js.columns[0]);
  CHECK(sh.columns[1] != js.columns[1]);
  auto a = sh.columns[1];
  auto b = js.columns[1];
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}
