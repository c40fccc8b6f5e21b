#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "frbc/dataset.hpp"

using namespace frbc;

namespace {

double col_mean(const Matrix& x, std::size_t j, std::size_t r0, std::size_t r1) {
  double s = 0.0;
  for (std::size_t i = r0; i < r1; ++i) s += x(i, j);
  return s / static_cast<double>(r1 - r0);
}

double col_std(const Matrix& x, std::size_t j, std::size_t r0, std::size_t r1) {
  const double m = col_mean(x, j, r0, r1);
  double ss = 0.0;
  for (std::size_t i = r0; i < r1; ++i) ss += (x(i, j) - m) * (x(i, j) - m);
  return std::sqrt(ss / static_cast<double>(r1 - r0 - 1));
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("synthetic1 shape and label blocks") {
  const auto d = generate_synthetic1(42);
  CHECK(d.size() == 300);
  CHECK(d.feature_count() == 6);
  CHECK(d.class_count == 3);
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK(d.labels[i] == static_cast<int>(i / 100) + 1);
  }
  CHECK(d.feature_names[0] == "x1");
  CHECK(d.feature_names[5] == "x6");
}

TEST_CASE("synthetic1 determinism") {
  const auto a = generate_synthetic1(7);
  const auto b = generate_synthetic1(7);
  CHECK(a.features == b.features);
  const auto c = generate_synthetic1(8);
  CHECK_FALSE(a.features == c.features);
}

TEST_CASE("synthetic1 cell statistics match the declared distributions") {
  const auto d = generate_synthetic1(3);
  // class 1 block, characteristic feature x1 ~ N(0, 0.5)
  CHECK(std::abs(col_mean(d.features, 0, 0, 100)) < 0.2);
  CHECK(std::abs(col_std(d.features, 0, 0, 100) - 0.5) < 0.15);
  // uniform cells stay inside [-10, 10]
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t j = 2; j < 6; ++j) {
      CHECK(d.features(i, j) >= -10.0);
      CHECK(d.features(i, j) <= 10.0);
    }
  }
}

TEST_CASE("synthetic2 appends noisy copies and keeps the synthetic1 realization") {
  const auto d1 = generate_synthetic1(11);
  const auto d2 = generate_synthetic2(11);
  CHECK(d2.size() == 300);
  CHECK(d2.feature_count() == 8);
  for (std::size_t i = 0; i < 300; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(d2.features(i, j) == d1.features(i, j));
    }
  }
  // class-1 rows: x7 - x1 is the N(0, 0.1) noise column
  double m = 0.0;
  for (std::size_t i = 0; i < 100; ++i) m += d2.features(i, 6) - d2.features(i, 0);
  m /= 100.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const double v = d2.features(i, 6) - d2.features(i, 0) - m;
    ss += v * v;
  }
  CHECK(std::abs(std::sqrt(ss / 99.0) - 0.1) < 0.05);
  // near-perfect class-1 correlation between x1 and x7
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  const double mx = col_mean(d2.features, 0, 0, 100), my = col_mean(d2.features, 6, 0, 100);
  for (std::size_t i = 0; i < 100; ++i) {
    const double a = d2.features(i, 0) - mx, b = d2.features(i, 6) - my;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  CHECK(sxy / std::sqrt(sxx * syy) > 0.97);
}

TEST_CASE("synthetic3 block structure") {
  const auto d = generate_synthetic3(5);
  CHECK(d.size() == 400);
  CHECK(d.feature_count() == 4);
  CHECK(d.class_count == 2);
  int c1 = 0;
  for (int y : d.labels) c1 += (y == 1);
  CHECK(c1 == 200);
  CHECK(std::abs(col_mean(d.features, 1, 0, 100) - (-5.0)) < 0.2);    // x2 of rows 1..100
  CHECK(std::abs(col_mean(d.features, 0, 300, 400) - 5.0) < 0.2);     // x1 of rows 301..400
  const auto again = generate_synthetic3(5);
  CHECK(d.features == again.features);
}

TEST_CASE("csv round trip") {
  const auto d = generate_synthetic1(9);
  const auto path = temp_file("frbc_roundtrip.csv");
  save_csv(d, path);
  // 300 data lines + header
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 301);
  const auto back = load_csv(path, std::string("y"), true);
  CHECK(back.size() == d.size());
  CHECK(back.class_count == d.class_count);
  CHECK(back.feature_names == d.feature_names);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.labels[i] == d.labels[i]);
    for (std::size_t j = 0; j < d.feature_count(); ++j) {
      CHECK(back.features(i, j) == doctest::Approx(d.features(i, j)).epsilon(1e-12));
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("save_csv creates missing parent directories") {
  const auto dir = temp_file("frbc_nested_dir");
  std::filesystem::remove_all(dir);
  const auto d = generate_synthetic3(2);
  save_csv(d, dir / "deep" / "data.csv");
  CHECK(std::filesystem::exists(dir / "deep" / "data.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("load_csv parses headers, string labels and label column selection") {
  const auto path = temp_file("frbc_small.csv");
  std::ofstream(path) << "a,b,y\n1,2,pos\n3,4,neg\n5,6,pos\n";
  const auto d = load_csv(path, std::string("y"), true);
  CHECK(d.feature_count() == 2);
  CHECK(d.class_count == 2);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  // first-appearance order: pos -> 1, neg -> 2
  CHECK(d.labels == std::vector<int>{1, 2, 1});
  // same file by column index
  const auto d2 = load_csv(path, std::size_t{2}, true);
  CHECK(d2.labels == d.labels);
  std::filesystem::remove(path);
}

TEST_CASE("load_csv error paths") {
  CHECK_THROWS_WITH_AS(load_csv("/nonexistent/file.csv", std::size_t{0}, false),
                       doctest::Contains("cannot open"), std::runtime_error);

  const auto blank = temp_file("frbc_blank.csv");
  std::ofstream(blank) << "a,b,y\n1,,1\n2,3,2\n";
  CHECK_THROWS_WITH_AS(load_csv(blank, std::string("y"), true),
                       doctest::Contains("row 1, column 2"), std::runtime_error);
  std::filesystem::remove(blank);

  const auto gap = temp_file("frbc_gap.csv");
  std::ofstream(gap) << "a,y\n1,1\n2,3\n3,3\n";  // class 2 missing
  CHECK_THROWS_WITH_AS(load_csv(gap, std::string("y"), true),
                       doctest::Contains("class 2 has no instances"), std::runtime_error);
  std::filesystem::remove(gap);

  const auto ragged = temp_file("frbc_ragged.csv");
  std::ofstream(ragged) << "a,b,y\n1,2,1\n1,2\n";
  CHECK_THROWS_WITH_AS(load_csv(ragged, std::string("y"), true), doctest::Contains("columns"),
                       std::runtime_error);
  std::filesystem::remove(ragged);
}

TEST_CASE("dataset invariants are enforced") {
  Matrix x(2, 1);
  x(0, 0) = 1.0;
  x(1, 0) = std::nan("");
  CHECK_THROWS_WITH_AS(Dataset::from_parts(std::move(x), {1, 2}, {"a"}),
                       doctest::Contains("non-finite"), std::runtime_error);

  Matrix x2(2, 1, 0.0);
  CHECK_THROWS_AS(Dataset::from_parts(std::move(x2), {1, 3}, {"a"}), std::runtime_error);
}

TEST_CASE("holdout split is stratified and seeded") {
  const auto d = generate_synthetic1(4);
  const auto split = split_holdout(d, 0.25, 99);
  CHECK(split.test.size() == 75);
  CHECK(split.train.size() == 225);
  CHECK(split.train.class_count == 3);
  CHECK(split.test.class_count == 3);
  const auto split2 = split_holdout(d, 0.25, 99);
  CHECK(split.test.features == split2.test.features);
}
