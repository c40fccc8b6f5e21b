#ifndef FRBC_RULEBASE_HPP
#define FRBC_RULEBASE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "frbc/dataset.hpp"
#include "frbc/matrix.hpp"

namespace frbc {

struct ModulatorBank;  // modulators.hpp

// Gaussian fuzzy set "close to center" with width spread (> 0).
struct FuzzySet {
  double center = 0.0;
  double spread = 1.0;
};

// One IF-THEN rule: a fuzzy set per feature, consequent class in 1..C.
struct Rule {
  int class_index = 0;
  std::vector<FuzzySet> antecedents;
};

// Rules grouped by class; rules_per_class[k-1] rules for class k.
struct RuleBase {
  std::vector<int> rules_per_class;
  std::vector<Rule> rules;

  int class_count() const { return static_cast<int>(rules_per_class.size()); }
  int rule_count() const { return static_cast<int>(rules.size()); }
  std::size_t feature_count() const { return rules.empty() ? 0 : rules.front().antecedents.size(); }

  // Flat index of rule l (1-based) of class k (1-based).
  int rule_index(int k, int l) const;
  // Half-open range [begin, end) of class k's rules in `rules`.
  std::pair<int, int> class_range(int k) const;

  std::string to_json_string() const;
  static RuleBase from_json_string(const std::string& text);
};

struct KMeansResult {
  Matrix centroids;             // k x P
  std::vector<int> assignments; // length m, values in 0..k-1
  int iterations = 0;
};

// Lloyd's algorithm with seeded k-means++ initialization. Empty clusters are
// reseeded to the point farthest from its current centroid.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters = 300);

struct GmmRefineConfig {
  int max_iters = 200;
  double rel_tol = 1e-10;        // on log-likelihood
  double var_floor_frac = 0.01;  // variance floor = (frac * feature range)^2
};

// Diagonal-covariance Gaussian-mixture EM seeded from a hard partition.
// Recovers clusters confined to different feature subspaces, which plain
// k-means cannot (axis variances enter the model, not just means).
struct GmmRefineResult {
  Matrix means;                  // k x P
  std::vector<int> assignments;  // hard assignment by max responsibility
  int iterations = 0;
};
GmmRefineResult refine_clusters_gmm(const Matrix& points, const Matrix& init_centroids,
                                    const std::vector<int>& init_assignments,
                                    const GmmRefineConfig& cfg = {});

struct RuleBaseConfig {
  double spread_floor_frac = 0.05;  // floor = frac * global range of the feature
  bool gmm_refine = true;           // refine multi-rule classes with diagonal-GMM EM
  GmmRefineConfig gmm;
};

// Clusters each class's instances and turns centroids into rules. Spread of
// antecedent (j,k,l) is the member std of feature j floored by
// spread_floor_frac times the feature's global range.
RuleBase build_rulebase(const Dataset& d, const std::vector<int>& rules_per_class,
                        std::uint64_t seed, const RuleBaseConfig& cfg = {});

double membership(double x, const FuzzySet& fs);
// Clamped at -700 so exp() never underflows to exactly zero.
double log_membership(double x, const FuzzySet& fs);

// Product T-norm of modulated memberships: prod_j mu_j^{m_j}, evaluated as
// exp(sum m_j log mu_j). m_row holds the modulator values M(lambda).
double firing_strength(const Rule& rule, std::span<const double> x, std::span<const double> m_row);
double log_firing_strength(const Rule& rule, std::span<const double> x,
                           std::span<const double> m_row);

struct ClassifyResult {
  std::vector<double> outputs;      // o_k = max firing strength over class-k rules
  std::vector<int> winning_rule;    // flat rule index per class (lowest index on tie)
};
ClassifyResult classify(const RuleBase& rb, const ModulatorBank& bank, std::span<const double> x);

struct Prediction {
  int label = 0;  // 1-based class
  bool tie = false;
};
// Argmax over supports; ties go to the lowest class index and are flagged.
Prediction predict_label(std::span<const double> outputs);

// classify() over every instance of a dataset.
struct BatchClassify {
  Matrix outputs;                // n x C
  std::vector<int> winning_rule; // n x C row-major, flat rule indices
};
BatchClassify classify_dataset(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d);

}  // namespace frbc

#endif
