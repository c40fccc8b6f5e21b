#ifndef FRBC_STATS_HPP
#define FRBC_STATS_HPP

#include <filesystem>
#include <span>
#include <vector>

#include "frbc/dataset.hpp"
#include "frbc/matrix.hpp"

namespace frbc {

struct PearsonResult {
  double value = 0.0;
  bool degenerate = false;  // variance below threshold: value reported as 0
};

// Sample Pearson correlation. Inputs must have equal length >= 2.
PearsonResult pearson(std::span<const double> a, std::span<const double> b);

// Feature-pair correlations: one P x P matrix over all instances plus one per
// class over that class's instances only. Computed once from training data;
// they do not depend on the modulators.
struct CorrelationSet {
  Matrix global_rho;
  std::vector<Matrix> class_rho;  // index k-1 for class k
};

CorrelationSet correlation_set(const Dataset& d);

void dump_correlations_csv(const CorrelationSet& corr,
                           const std::vector<std::string>& feature_names,
                           const std::filesystem::path& path);

}  // namespace frbc

#endif
