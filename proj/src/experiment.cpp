#include "frbc/experiment.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace frbc {

ExperimentPreset make_preset(const std::string& name) {
  ExperimentPreset p;
  p.name = name;
  if (name == "exp1") {
    p.generator = &generate_synthetic1;
    p.rules_per_class = {1, 1, 1};
    p.c1 = 4.0;
    p.modes = {
        {"class_specific", Granularity::kClassSpecific, 0.0, true, 11},
        {"global", Granularity::kGlobal, 0.0, true, 13},
        {"all_features", Granularity::kGlobal, 0.0, false, 0},
    };
  } else if (name == "exp2") {
    p.generator = &generate_synthetic2;
    p.rules_per_class = {1, 1, 1};
    p.c1 = 1.0;
    p.modes = {
        {"no_redundancy", Granularity::kClassSpecific, 0.0, true, 11},
        {"redundancy", Granularity::kClassSpecific, 5.0, true, 11},
    };
  } else if (name == "exp3") {
    p.generator = &generate_synthetic3;
    p.rules_per_class = {2, 2};
    p.c1 = 1.0;
    p.modes = {
        {"rule_specific", Granularity::kRuleSpecific, 0.0, true, 11},
        {"class_specific", Granularity::kClassSpecific, 0.0, true, 11},
        {"all_features", Granularity::kGlobal, 0.0, false, 0},
    };
  } else {
    throw std::runtime_error("unknown experiment '" + name + "' (expected exp1, exp2 or exp3)");
  }
  return p;
}

namespace {

std::map<std::string, double> hyperparameter_map(const ExperimentPreset& p,
                                                 const ExperimentMode& mode) {
  std::map<std::string, double> h;
  h["c1"] = p.c1;
  h["c2"] = mode.c2;
  h["learning_rate"] = p.learning_rate;
  h["max_iters"] = p.max_iters;
  h["tolerance"] = p.tolerance;
  h["normalize_ecl"] = p.normalize_ecl ? 1.0 : 0.0;
  h["sigma_init"] = p.sigma_init;
  h["spread_floor_frac"] = p.spread_floor_frac;
  h["threshold"] = p.threshold;
  for (std::size_t k = 0; k < p.rules_per_class.size(); ++k) {
    h["rules_class" + std::to_string(k + 1)] = p.rules_per_class[k];
  }
  return h;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string subset_text(const SelectionReport& rep) {
  switch (rep.granularity) {
    case Granularity::kGlobal:
      return rep.global_subset.empty() ? "(none)" : join(rep.global_subset, " ");
    case Granularity::kClassSpecific: {
      std::string out;
      for (std::size_t k = 0; k < rep.class_subsets.size(); ++k) {
        if (k) out += "; ";
        out += "s" + std::to_string(k + 1) + ":" +
               (rep.class_subsets[k].empty() ? "(none)" : join(rep.class_subsets[k], " "));
      }
      return out;
    }
    case Granularity::kRuleSpecific: {
      std::string out;
      for (std::size_t i = 0; i < rep.rule_subsets.size(); ++i) {
        const auto& rs = rep.rule_subsets[i];
        if (i) out += "; ";
        out += "c" + std::to_string(rs.class_index) + ".r" + std::to_string(rs.rule_index) + ":" +
               (rs.features.empty() ? "(none)" : join(rs.features, " "));
      }
      return out;
    }
  }
  return "";
}

}  // namespace

double ExperimentSummary::mean_accuracy(const std::string& mode_label) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& run : runs) {
    if (!run.error.empty()) continue;
    for (const auto& m : run.modes) {
      if (m.label == mode_label) {
        sum += m.report.accuracy;
        ++count;
      }
    }
  }
  if (count == 0) throw std::runtime_error("no successful runs for mode '" + mode_label + "'");
  return sum / static_cast<double>(count);
}

std::string ExperimentSummary::to_markdown() const {
  std::ostringstream out;
  out << "# " << preset.name << " summary\n\n";
  out << "Seeds " << preset.base_seed << ".." << (preset.base_seed + preset.runs - 1)
      << "; accuracy is resubstitution on the generated data.\n\n";
  out << "| Run |";
  for (const auto& m : preset.modes) out << ' ' << m.label << " subsets | acc |";
  out << '\n' << "|---|";
  for (std::size_t i = 0; i < preset.modes.size(); ++i) out << "---|---|";
  out << '\n';
  for (const auto& run : runs) {
    out << "| " << (run.index + 1) << " |";
    if (!run.error.empty()) {
      out << " failed: " << run.error << " |";
    } else {
      for (const auto& m : run.modes) {
        std::ostringstream acc;
        acc.precision(4);
        acc << m.report.accuracy;
        out << ' ' << subset_text(m.report) << " | " << acc.str() << " |";
      }
    }
    out << '\n';
  }
  out << "\nMean accuracy:";
  for (const auto& m : preset.modes) {
    std::ostringstream acc;
    acc.precision(4);
    acc << mean_accuracy(m.label);
    out << ' ' << m.label << "=" << acc.str();
  }
  out << '\n';
  return out.str();
}

std::string ExperimentSummary::to_csv() const {
  std::ostringstream out;
  out << "run,seed,mode,accuracy,subsets\n";
  for (const auto& run : runs) {
    for (const auto& m : run.modes) {
      out << (run.index + 1) << ',' << run.seed << ',' << m.label << ',' << m.report.accuracy
          << ",\"" << subset_text(m.report) << "\"\n";
    }
  }
  return out.str();
}

ExperimentSummary run_experiment(const ExperimentPreset& preset,
                                 const std::optional<std::filesystem::path>& out_dir) {
  if (preset.generator == nullptr) throw std::runtime_error("preset has no dataset generator");
  if (out_dir) std::filesystem::create_directories(*out_dir);

  ExperimentSummary summary;
  summary.preset = preset;

  for (int i = 0; i < preset.runs; ++i) {
    RunOutcome outcome;
    outcome.index = i;
    outcome.seed = preset.base_seed + static_cast<std::uint64_t>(i);
    try {
      const Dataset d = preset.generator(outcome.seed);
      RuleBaseConfig rb_cfg;
      rb_cfg.spread_floor_frac = preset.spread_floor_frac;
      const RuleBase rb = build_rulebase(d, preset.rules_per_class, outcome.seed, rb_cfg);

      for (const auto& mode : preset.modes) {
        TrainedModel model;
        if (mode.trained) {
          TrainConfig cfg;
          cfg.learning_rate = preset.learning_rate;
          cfg.max_iters = preset.max_iters;
          cfg.tolerance = preset.tolerance;
          cfg.c1 = preset.c1;
          cfg.c2 = mode.c2;
          cfg.seed = outcome.seed;
          cfg.normalize_ecl = preset.normalize_ecl;
          const ModulatorBank bank0 =
              init_bank(mode.granularity, rb, d.feature_count(),
                        outcome.seed + mode.seed_offset, preset.sigma_init);
          model = train(rb, bank0, d, cfg);
        } else {
          model.rulebase = rb;
          model.bank = identity_bank(mode.granularity, rb, d.feature_count());
        }
        ModeResult mr;
        mr.label = mode.label;
        mr.report = build_selection_report(model, d, preset.threshold);
        mr.report.run_seed = outcome.seed;
        mr.iterations_run = model.iterations_run;
        mr.converged = model.converged;
        mr.report_json = report_to_json(mr.report, model, hyperparameter_map(preset, mode),
                                        "resubstitution");
        if (out_dir) {
          const std::string stem =
              "run" + std::to_string(i + 1) + "_" + mode.label;
          std::ofstream(*out_dir / (stem + ".json")) << mr.report_json;
          if (mode.trained) write_trace_csv(model.trace, *out_dir / (stem + "_trace.csv"));
        }
        outcome.modes.push_back(std::move(mr));
      }
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
    summary.runs.push_back(std::move(outcome));
  }

  if (out_dir) {
    std::ofstream(*out_dir / "summary.md") << summary.to_markdown();
    std::ofstream(*out_dir / "summary.csv") << summary.to_csv();
  }
  return summary;
}

}  // namespace frbc
