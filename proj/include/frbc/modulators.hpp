#ifndef FRBC_MODULATORS_HPP
#define FRBC_MODULATORS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "frbc/matrix.hpp"
#include "frbc/rulebase.hpp"

namespace frbc {

enum class Granularity { kGlobal, kClassSpecific, kRuleSpecific };

std::string granularity_name(Granularity g);
Granularity granularity_from_name(const std::string& name);

// M(lambda) = exp(-lambda^2), in (0,1]; M ~ 1 passes the feature through,
// M ~ 0 removes it from the rule product.
double modulator_value(double lambda);
// dM/dlambda = -2 lambda exp(-lambda^2).
double modulator_derivative(double lambda);

// Trainable lambda parameters. Row layout by granularity:
//   Global        1 x P
//   ClassSpecific C x P   (row k-1 governs all rules of class k)
//   RuleSpecific  n_rule x P (flat rule order, grouped by class)
struct ModulatorBank {
  Granularity granularity = Granularity::kGlobal;
  Matrix lambdas;
  std::vector<int> rules_per_class;  // binding to the rule base

  std::size_t feature_count() const { return lambdas.cols(); }
  int class_count() const { return static_cast<int>(rules_per_class.size()); }

  // Row of lambdas that governs rule l (1-based) of class k (1-based).
  std::size_t row_for(int k, int l) const;
  // M(lambda) values for that rule.
  std::vector<double> modulator_row(int k, int l) const;

  void check_compatible(const RuleBase& rb) const;

  std::string to_json_string() const;
  static ModulatorBank from_json_string(const std::string& text);
};

// lambda = 2 + N(0, sigma_init^2) per entry: training starts from rejection.
ModulatorBank init_bank(Granularity g, const RuleBase& rb, std::size_t feature_count,
                        std::uint64_t seed, double sigma_init = 0.1);

// All lambda = 0 (M = 1 everywhere): the unmodulated FRBC.
ModulatorBank identity_bank(Granularity g, const RuleBase& rb, std::size_t feature_count);

struct SelectionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<bool> selected;  // row-major, shaped like lambdas

  bool at(std::size_t r, std::size_t c) const { return selected[r * cols + c]; }
};

// Entry true iff M(lambda) >= threshold. threshold must be in (0,1).
SelectionMask selection_mask(const ModulatorBank& bank, double threshold);

}  // namespace frbc

#endif
