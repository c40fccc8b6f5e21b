#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "frbc/modulators.hpp"
#include "frbc/rng.hpp"
#include "frbc/rulebase.hpp"

using namespace frbc;

namespace {

// Adjusted Rand index between two labelings; independent oracle for the
// cluster-recovery checks.
double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  REQUIRE(a.size() == b.size());
  std::map<std::pair<int, int>, double> cont;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cont[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto comb2 = [](double v) { return v * (v - 1.0) / 2.0; };
  double sum = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [k, v] : cont) sum += comb2(v);
  for (const auto& [k, v] : ra) sa += comb2(v);
  for (const auto& [k, v] : rb) sb += comb2(v);
  const double total = comb2(static_cast<double>(a.size()));
  const double expected = sa * sb / total;
  return (sum - expected) / ((sa + sb) / 2.0 - expected);
}

Matrix two_blobs(std::size_t per_blob, double cx, double cy, double dx, double dy,
                 std::uint64_t seed) {
  Rng rng(seed);
  Matrix pts(2 * per_blob, 2);
  for (std::size_t i = 0; i < per_blob; ++i) {
    pts(i, 0) = rng.normal(cx, 0.3);
    pts(i, 1) = rng.normal(cy, 0.3);
    pts(per_blob + i, 0) = rng.normal(dx, 0.3);
    pts(per_blob + i, 1) = rng.normal(dy, 0.3);
  }
  return pts;
}

}  // namespace

TEST_CASE("kmeans with one cluster returns the column means") {
  Matrix pts(4, 2);
  double vals[4][2] = {{1, 2}, {3, 4}, {5, 6}, {7, 10}};
  for (std::size_t i = 0; i < 4; ++i) {
    pts(i, 0) = vals[i][0];
    pts(i, 1) = vals[i][1];
  }
  const auto res = kmeans(pts, 1, 123);
  CHECK(res.centroids(0, 0) == doctest::Approx(4.0));
  CHECK(res.centroids(0, 1) == doctest::Approx(5.5));
}

TEST_CASE("kmeans separates two well-separated blobs") {
  const auto pts = two_blobs(50, 0.0, 0.0, 8.0, 8.0, 17);
  const auto res = kmeans(pts, 2, 17);
  // blob sample means, computed independently
  double m0[2] = {0, 0}, m1[2] = {0, 0};
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      m0[j] += pts(i, j) / 50.0;
      m1[j] += pts(50 + i, j) / 50.0;
    }
  }
  // match centroids to blobs by first coordinate
  const std::size_t a = res.centroids(0, 0) < res.centroids(1, 0) ? 0 : 1;
  const std::size_t b = 1 - a;
  CHECK(std::abs(res.centroids(a, 0) - m0[0]) < 0.5);
  CHECK(std::abs(res.centroids(a, 1) - m0[1]) < 0.5);
  CHECK(std::abs(res.centroids(b, 0) - m1[0]) < 0.5);
  CHECK(std::abs(res.centroids(b, 1) - m1[1]) < 0.5);
}

TEST_CASE("kmeans with k equal to the point count gives zero distance") {
  Matrix pts(3, 1);
  pts(0, 0) = 1.0;
  pts(1, 0) = 5.0;
  pts(2, 0) = 9.0;
  const auto res = kmeans(pts, 3, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double d = pts(i, 0) - res.centroids(static_cast<std::size_t>(res.assignments[i]), 0);
    total += d * d;
  }
  CHECK(total == doctest::Approx(0.0));
}

TEST_CASE("kmeans rejects k larger than the point count") {
  Matrix pts(2, 1, 0.0);
  CHECK_THROWS_AS(kmeans(pts, 3, 1), std::runtime_error);
}

TEST_CASE("kmeans is deterministic in the seed") {
  const auto pts = two_blobs(30, 0, 0, 5, 5, 3);
  const auto r1 = kmeans(pts, 2, 77);
  const auto r2 = kmeans(pts, 2, 77);
  CHECK(r1.centroids == r2.centroids);
  CHECK(r1.assignments == r2.assignments);
}

TEST_CASE("build_rulebase on synthetic1 puts class-1 centers near the generating means") {
  const auto d = generate_synthetic1(31);
  const auto rb = build_rulebase(d, {1, 1, 1}, 31);
  CHECK(rb.rule_count() == 3);
  CHECK(rb.rules[0].class_index == 1);
  CHECK(std::abs(rb.rules[0].antecedents[0].center) < 0.2);
  CHECK(std::abs(rb.rules[0].antecedents[1].center) < 0.2);
  for (std::size_t j = 2; j < 6; ++j) {
    CHECK(std::abs(rb.rules[0].antecedents[j].center) < 2.0);  // uniform sample mean
  }
  // spread floor binds for the characteristic features
  const double range = 20.0;
  CHECK(rb.rules[0].antecedents[0].spread == doctest::Approx(0.05 * range).epsilon(0.1));
}

TEST_CASE("build_rulebase recovers synthetic3 substructures (adjusted Rand >= 0.9)") {
  const auto d = generate_synthetic3(13);
  RuleBaseConfig cfg;
  const auto idx = d.class_indices(1);
  Matrix pts(idx.size(), d.feature_count());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < d.feature_count(); ++j) pts(i, j) = d.features(idx[i], j);
  }
  const auto km = kmeans(pts, 2, 13);
  const auto refined = refine_clusters_gmm(pts, km.centroids, km.assignments, cfg.gmm);
  std::vector<int> truth(200);
  for (std::size_t i = 0; i < 200; ++i) truth[i] = i < 100 ? 0 : 1;
  CHECK(adjusted_rand(refined.assignments, truth) >= 0.9);
}

TEST_CASE("build_rulebase rejects classes with too few instances") {
  const auto d = generate_synthetic1(1);
  CHECK_THROWS_WITH_AS(build_rulebase(d, {101, 1, 1}, 1), doctest::Contains("fewer"),
                       std::runtime_error);
}

TEST_CASE("membership values") {
  const FuzzySet fs{2.0, 0.7};
  CHECK(membership(2.0, fs) == doctest::Approx(1.0));
  CHECK(membership(2.7, fs) == doctest::Approx(std::exp(-0.5)));
  // symmetry about the center
  CHECK(membership(2.9, fs) == doctest::Approx(membership(1.1, fs)));
  // log form agrees where the direct form is representable
  CHECK(log_membership(3.1, fs) == doctest::Approx(std::log(membership(3.1, fs))).epsilon(1e-12));
  // clamp keeps far values finite and nonzero
  CHECK(membership(1e6, fs) > 0.0);
  CHECK(log_membership(1e6, fs) == doctest::Approx(-700.0));
}

TEST_CASE("firing strength behaviour") {
  Rule rule;
  rule.class_index = 1;
  rule.antecedents = {{0.0, 1.0}, {1.0, 2.0}, {-2.0, 0.5}};
  const std::vector<double> at_center{0.0, 1.0, -2.0};
  const std::vector<double> ones{1.0, 1.0, 1.0};
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  const std::vector<double> x{0.4, -0.3, 0.8};

  CHECK(firing_strength(rule, at_center, ones) == doctest::Approx(1.0));
  CHECK(firing_strength(rule, x, zeros) == doctest::Approx(1.0));  // mu^0 = 1

  double prod = 1.0;
  for (std::size_t j = 0; j < 3; ++j) prod *= membership(x[j], rule.antecedents[j]);
  CHECK(firing_strength(rule, x, ones) == doctest::Approx(prod).epsilon(1e-12));

  // monotone non-increasing in each modulator when mu < 1
  std::vector<double> m{0.5, 0.5, 0.5};
  const double base = firing_strength(rule, x, m);
  m[1] = 0.8;
  CHECK(firing_strength(rule, x, m) <= base);
}

TEST_CASE("classify and predict_label") {
  const auto d = generate_synthetic1(21);
  const auto rb = build_rulebase(d, {1, 1, 1}, 21);
  const auto bank = identity_bank(Granularity::kGlobal, rb, 6);

  // at the class-1 rule center every class-1 membership is 1
  std::vector<double> x(6);
  for (std::size_t j = 0; j < 6; ++j) x[j] = rb.rules[0].antecedents[j].center;
  const auto res = classify(rb, bank, x);
  CHECK(res.outputs[0] == doctest::Approx(1.0));
  CHECK(res.winning_rule[0] == 0);
  CHECK(predict_label(res.outputs).label == 1);

  // all modulators ~ 0 pushes every support to 1
  auto closed = init_bank(Granularity::kGlobal, rb, 6, 5, 0.0);
  for (double& v : closed.lambdas.flat()) v = 40.0;
  const auto res2 = classify(rb, closed, x);
  for (double o : res2.outputs) CHECK(o == doctest::Approx(1.0));
  const auto pred = predict_label(res2.outputs);
  CHECK(pred.label == 1);
  CHECK(pred.tie);
}

TEST_CASE("classify is invariant to rule order within a class") {
  const auto d = generate_synthetic3(8);
  auto rb = build_rulebase(d, {2, 2}, 8);
  const auto bank = identity_bank(Granularity::kGlobal, rb, 4);
  const std::vector<double> x{0.3, -4.6, 1.0, 2.0};
  const auto before = classify(rb, bank, x);
  std::swap(rb.rules[0], rb.rules[1]);  // same class, different order
  const auto after = classify(rb, bank, x);
  CHECK(before.outputs[0] == doctest::Approx(after.outputs[0]).epsilon(1e-15));
  CHECK(before.outputs[1] == doctest::Approx(after.outputs[1]).epsilon(1e-15));
}

TEST_CASE("predict_label examples") {
  const std::vector<double> o1{0.9, 0.1, 0.3};
  CHECK(predict_label(o1).label == 1);
  const std::vector<double> o2{0.5, 0.5};
  const auto p = predict_label(o2);
  CHECK(p.label == 1);
  CHECK(p.tie);
  const std::vector<double> o3{0.1, 0.3, 0.9};
  CHECK(predict_label(o3).label == 3);
}

TEST_CASE("rulebase JSON round trip") {
  const auto d = generate_synthetic3(77);
  const auto rb = build_rulebase(d, {2, 2}, 77);
  const auto back = RuleBase::from_json_string(rb.to_json_string());
  CHECK(back.rules_per_class == rb.rules_per_class);
  REQUIRE(back.rule_count() == rb.rule_count());
  for (int r = 0; r < rb.rule_count(); ++r) {
    const auto& a = rb.rules[static_cast<std::size_t>(r)];
    const auto& b = back.rules[static_cast<std::size_t>(r)];
    CHECK(a.class_index == b.class_index);
    for (std::size_t j = 0; j < a.antecedents.size(); ++j) {
      CHECK(a.antecedents[j].center == b.antecedents[j].center);
      CHECK(a.antecedents[j].spread == b.antecedents[j].spread);
    }
  }
}
