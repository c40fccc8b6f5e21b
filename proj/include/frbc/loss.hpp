#ifndef FRBC_LOSS_HPP
#define FRBC_LOSS_HPP

#include "frbc/dataset.hpp"
#include "frbc/matrix.hpp"
#include "frbc/modulators.hpp"
#include "frbc/rulebase.hpp"
#include "frbc/stats.hpp"

namespace frbc {

struct LossBreakdown {
  double e_cl = 0.0;
  double e_select = 0.0;  // in [0, 0.25]
  double e_red = 0.0;     // in [0, 1]
  double total = 0.0;     // e_cl + c1 * e_select + c2 * e_red
  double c1 = 0.0;
  double c2 = 0.0;
};

struct LossOptions {
  double c1 = 1.0;
  double c2 = 1.0;
  // Divide the classification error by n. The raw sum is faithful to the
  // written objective, but its gradient scale grows with n; at lr=0.2 and
  // n~300 the raw sum overshoots the modulators into frozen saturation.
  bool normalize_ecl = false;
  double eps_red = 1e-12;  // sqrt smoothing used by gradients (value stays exact)
};

// Sum of squared output-vs-target entries (no averaging).
double classification_error(const Matrix& outputs, const Matrix& targets);

// p(1-p) penalty with p = M(lambda), averaged per granularity:
//   Global         (1/P)  sum_j
//   ClassSpecific  (1/CP) sum_k sum_j
//   RuleSpecific   (1/CP) sum_k (1/n_k) sum_l sum_j
double selection_regularizer(const ModulatorBank& bank);

// sqrt(p_j p_m rho^2) penalty over ordered pairs j != m; Global uses the
// all-instance correlations, ClassSpecific the per-class ones. RuleSpecific
// banks are rejected: redundancy control is not defined at that granularity.
double redundancy_regularizer(const ModulatorBank& bank, const CorrelationSet& corr);
// Same sum with sqrt(x + eps) per term; this is the branch gradients target.
double redundancy_regularizer_smoothed(const ModulatorBank& bank, const CorrelationSet& corr,
                                       double eps);

// corr may be null when opts.c2 == 0; the redundancy term is skipped entirely.
LossBreakdown total_loss(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                         const CorrelationSet* corr, const LossOptions& opts);

}  // namespace frbc

#endif
