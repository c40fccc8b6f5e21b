#ifndef FRBC_TRAINER_HPP
#define FRBC_TRAINER_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "frbc/dataset.hpp"
#include "frbc/loss.hpp"
#include "frbc/modulators.hpp"
#include "frbc/rulebase.hpp"
#include "frbc/stats.hpp"

namespace frbc {

struct TrainConfig {
  double learning_rate = 0.2;
  int max_iters = 2000;
  double tolerance = 1e-9;  // stop when |delta total| drops below this
  double c1 = 1.0;
  double c2 = 1.0;
  std::uint64_t seed = 0;
  bool normalize_ecl = false;
  int batch_size = 0;  // 0 or >= n: full batch; otherwise seeded shuffled minibatches
  double eps_red = 1e-12;
  int checkpoint_interval = 0;  // iterations between checkpoint files; 0 disables
  std::filesystem::path checkpoint_path;
};

struct TrainedModel {
  RuleBase rulebase;
  ModulatorBank bank;
  std::vector<LossBreakdown> trace;  // one entry per iteration run
  int iterations_run = 0;
  bool converged = false;       // tolerance reached before max_iters
  bool loss_increased = false;  // final total above the first recorded total
};

// Exact gradient of the differentiable surrogate of the total loss with
// respect to every lambda. The classification term routes through each
// class's argmax rule (subgradient of max, ties to the lowest rule index);
// the redundancy term is the eps-smoothed sqrt branch.
Matrix analytic_gradient(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                         const CorrelationSet* corr, const LossOptions& opts);

// Central differences of the same surrogate with rule routing frozen at the
// base point, so both sides of each difference stay on one smooth branch.
Matrix finite_difference_gradient(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                                  const CorrelationSet* corr, const LossOptions& opts, double h);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;  // coordinates with |analytic| above the floor
};

// Compares analytic and finite-difference gradients on coordinates with
// |gradient| > grad_floor.
GradCheckResult gradient_check(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                               const CorrelationSet* corr, const LossOptions& opts,
                               double h = 1e-5, double grad_floor = 1e-8);

// Full-batch gradient descent on the modulators; the rule base stays fixed.
TrainedModel train(const RuleBase& rb, const ModulatorBank& initial, const Dataset& d,
                   const TrainConfig& cfg);

struct GradCheckTrial {
  std::size_t n = 0, features = 0;
  int classes = 0;
  Granularity granularity = Granularity::kGlobal;
  double c2 = 0.0;
  double max_rel_error = 0.0;
};

struct GradCheckSuite {
  std::vector<GradCheckTrial> trials;
  double worst = 0.0;
};

// Randomized small instances (n <= 20, P <= 5, C in {2,3}) cycling through
// all granularities and c2 in {0,1}; each trial compares the analytic
// gradient against central differences at step h.
GradCheckSuite gradient_check_suite(int trials, std::uint64_t seed, double h = 1e-5);

void write_trace_csv(const std::vector<LossBreakdown>& trace, const std::filesystem::path& path);

}  // namespace frbc

#endif
