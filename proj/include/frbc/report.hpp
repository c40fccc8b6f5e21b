#ifndef FRBC_REPORT_HPP
#define FRBC_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "frbc/dataset.hpp"
#include "frbc/trainer.hpp"

namespace frbc {

// Thresholded view of a trained model: which features each scope kept,
// plus accuracies on the evaluation data.
struct SelectionReport {
  Granularity granularity = Granularity::kGlobal;
  double threshold = 0.5;
  std::uint64_t run_seed = 0;

  // Selected feature names per scope. Global fills `global_subset`;
  // class-specific fills `class_subsets[k-1]`; rule-specific fills
  // `rule_subsets` in flat rule order (and `class_subsets` stays empty).
  std::vector<std::string> global_subset;
  std::vector<std::vector<std::string>> class_subsets;
  struct RuleSubset {
    int class_index = 0;
    int rule_index = 0;  // 1-based within the class
    std::vector<std::string> features;
  };
  std::vector<RuleSubset> rule_subsets;

  Matrix modulator_values;  // M(lambda), shaped like the bank
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  double tie_rate = 0.0;  // share of instances with tied top support
};

double accuracy(const TrainedModel& model, const Dataset& d);
std::vector<double> per_class_accuracy(const TrainedModel& model, const Dataset& d);

SelectionReport build_selection_report(const TrainedModel& model, const Dataset& d,
                                       double threshold);

// One line per rule, listing only antecedents whose modulator passes the
// threshold, e.g.  R1 (class 1): If x1 is close-to(0.02, sd 0.98) and ...
std::string render_rules(const TrainedModel& model, double threshold);

// JSON document for a single run. `hyperparameters` is emitted verbatim so
// every knob that produced the run is on record.
std::string report_to_json(const SelectionReport& report, const TrainedModel& model,
                           const std::map<std::string, double>& hyperparameters,
                           const std::string& evaluation_protocol);

}  // namespace frbc

#endif
