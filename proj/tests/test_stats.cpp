#include <doctest.h>

#include <cmath>

#include "frbc/rng.hpp"
#include "frbc/stats.hpp"

using namespace frbc;

TEST_CASE("pearson basic values") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  CHECK(pearson(a, a).value == doctest::Approx(1.0));

  std::vector<double> b(3);
  for (std::size_t i = 0; i < 3; ++i) b[i] = -3.0 * a[i] + 7.0;
  CHECK(pearson(a, b).value == doctest::Approx(-1.0));

  // closed form: cov = 1.5, sd_a = 1, sd_b = sqrt(7/3)
  const std::vector<double> c{1.0, 2.0, 4.0};
  CHECK(pearson(a, c).value == doctest::Approx(1.5 / std::sqrt(7.0 / 3.0)).epsilon(1e-12));
  CHECK(pearson(a, c).value == doctest::Approx(0.98198).epsilon(1e-4));
}

TEST_CASE("pearson error and degenerate paths") {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(pearson(a, bad), std::runtime_error);
  CHECK_THROWS_AS(pearson(bad, bad), std::runtime_error);

  const std::vector<double> flat{5.0, 5.0, 5.0};
  const std::vector<double> c{1.0, 2.0, 3.0};
  const auto r = pearson(flat, c);
  CHECK(r.degenerate);
  CHECK(r.value == 0.0);
}

TEST_CASE("pearson symmetry and affine behaviour") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(20), b(20);
    for (std::size_t i = 0; i < 20; ++i) {
      a[i] = rng.normal(0, 2);
      b[i] = rng.normal(1, 3);
    }
    const double r = pearson(a, b).value;
    CHECK(r == doctest::Approx(pearson(b, a).value).epsilon(1e-12));
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    // positive affine map leaves it unchanged; negative slope negates
    std::vector<double> scaled(20), flipped(20);
    for (std::size_t i = 0; i < 20; ++i) {
      scaled[i] = 2.5 * b[i] + 4.0;
      flipped[i] = -1.5 * b[i] + 1.0;
    }
    CHECK(pearson(a, scaled).value == doctest::Approx(r).epsilon(1e-10));
    CHECK(pearson(a, flipped).value == doctest::Approx(-r).epsilon(1e-10));
  }
}

TEST_CASE("correlation_set separates class-conditional dependence") {
  const auto d = generate_synthetic2(19);
  const auto corr = correlation_set(d);
  REQUIRE(corr.class_rho.size() == 3);
  // x1 (index 0) and x7 (index 6): near-duplicate within class 1 only
  const double rho1 = corr.class_rho[0](0, 6);
  CHECK(rho1 * rho1 > 0.94);
  const double rho_g = corr.global_rho(0, 6);
  CHECK(rho_g * rho_g < 0.1);
  // symmetry
  for (std::size_t j = 0; j < 8; ++j) {
    for (std::size_t m = 0; m < 8; ++m) {
      CHECK(corr.global_rho(j, m) == doctest::Approx(corr.global_rho(m, j)).epsilon(1e-12));
    }
  }
  for (std::size_t j = 0; j < 8; ++j) CHECK(corr.global_rho(j, j) == doctest::Approx(1.0));
}

TEST_CASE("correlation_set flags constant columns instead of producing NaN") {
  Matrix x(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    x(i, 0) = 3.0;  // constant
    x(i, 1) = static_cast<double>(i);
  }
  const auto d = Dataset::from_parts(std::move(x), {1, 1, 2, 2}, {"a", "b"});
  const auto corr = correlation_set(d);
  CHECK(corr.global_rho(0, 0) == 0.0);
  CHECK(corr.global_rho(0, 1) == 0.0);
  CHECK(corr.global_rho(1, 1) == 1.0);
  for (double v : corr.global_rho.flat()) CHECK(std::isfinite(v));
}

TEST_CASE("correlation_set needs two instances per class") {
  Matrix x(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = static_cast<double>(i * i);
  }
  const auto d = Dataset::from_parts(std::move(x), {1, 1, 2}, {"a", "b"});
  CHECK_THROWS_WITH_AS(correlation_set(d), doctest::Contains("fewer than 2"), std::runtime_error);
}
