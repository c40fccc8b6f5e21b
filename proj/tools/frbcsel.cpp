// frbcsel: fuzzy rule-based classifier with embedded feature selection.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "frbc/dataset.hpp"
#include "frbc/experiment.hpp"
#include "frbc/report.hpp"
#include "frbc/trainer.hpp"

namespace {

frbc::LabelColumn parse_label_column(const std::string& s) {
  try {
    std::size_t pos = 0;
    const unsigned long idx = std::stoul(s, &pos);
    if (pos == s.size()) return static_cast<std::size_t>(idx);
  } catch (...) {
  }
  return s;
}

frbc::Dataset load_data(const std::string& path, const std::string& label_col, bool no_header,
                        std::uint64_t seed) {
  if (path == "synthetic1") return frbc::generate_synthetic1(seed);
  if (path == "synthetic2") return frbc::generate_synthetic2(seed);
  if (path == "synthetic3") return frbc::generate_synthetic3(seed);
  return frbc::load_csv(path, parse_label_column(label_col), !no_header);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy rule-based classifier with trainable feature modulators"};
  app.set_config("--config", "", "Read options from a key=value config file");
  app.require_subcommand(1);

  // --- generate ---
  auto* gen = app.add_subcommand("generate", "Write a synthetic benchmark dataset as CSV");
  std::string gen_name;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "dataset.csv";
  gen->add_option("dataset", gen_name, "synthetic1|synthetic2|synthetic3")->required();
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output CSV path");

  // --- train ---
  auto* tr = app.add_subcommand("train", "Fit feature modulators on a dataset");
  std::string tr_data, tr_label = "y", tr_gran = "class";
  bool tr_no_header = false, tr_normalize = true, tr_print_rules = false;
  std::vector<int> tr_rpc;
  double tr_c1 = 1.0, tr_c2 = 0.0, tr_lr = 0.2, tr_tol = 1e-9;
  double tr_sigma = 0.1, tr_floor = 0.05, tr_thresh = 0.5, tr_holdout = 0.0;
  int tr_iters = 2000, tr_batch = 0, tr_ckpt_every = 0;
  std::uint64_t tr_seed = 1;
  std::string tr_report, tr_trace, tr_ckpt, tr_rules_out;
  tr->add_option("--data", tr_data, "CSV path, or synthetic1|synthetic2|synthetic3")->required();
  tr->add_option("--label-col", tr_label, "Label column name or 0-based index (CSV only)");
  tr->add_flag("--no-header", tr_no_header, "CSV has no header row");
  tr->add_option("--granularity", tr_gran, "global|class|rule");
  tr->add_option("--rules-per-class", tr_rpc, "Rule count per class (default 1 each)")
      ->delimiter(',');
  tr->add_option("--c1", tr_c1, "Selection regularizer weight");
  tr->add_option("--c2", tr_c2, "Redundancy regularizer weight");
  tr->add_option("--lr", tr_lr, "Learning rate");
  tr->add_option("--iters", tr_iters, "Maximum iterations");
  tr->add_option("--tol", tr_tol, "Stop when |delta total| is below this");
  tr->add_option("--seed", tr_seed, "Seed for data generation, clustering and init");
  tr->add_option("--sigma-init", tr_sigma, "Noise stddev around lambda=2 at init");
  tr->add_option("--spread-floor", tr_floor, "Spread floor as a fraction of feature range");
  tr->add_option("--threshold", tr_thresh, "Selection threshold on M(lambda)");
  tr->add_option("--batch-size", tr_batch, "Minibatch size (0 = full batch)");
  tr->add_flag("--normalize-ecl,!--no-normalize-ecl", tr_normalize,
               "Divide the classification error by n (default on)");
  tr->add_option("--holdout", tr_holdout, "Hold out this fraction for evaluation");
  tr->add_option("--out-report", tr_report, "Write the run report JSON here");
  tr->add_option("--trace-csv", tr_trace, "Write the per-iteration loss trace here");
  tr->add_option("--checkpoint", tr_ckpt, "Checkpoint JSON path");
  tr->add_option("--checkpoint-interval", tr_ckpt_every, "Iterations between checkpoints");
  tr->add_option("--rules-json", tr_rules_out, "Write the rule base JSON here");
  tr->add_flag("--print-rules", tr_print_rules, "Print the thresholded rules");

  // --- gradcheck ---
  auto* gc = app.add_subcommand("gradcheck",
                                "Compare analytic gradients against finite differences");
  std::uint64_t gc_seed = 1;
  int gc_trials = 20;
  gc->add_option("--seed", gc_seed, "Seed for the randomized instances");
  gc->add_option("--trials", gc_trials, "Number of randomized instances");

  // --- experiment ---
  auto* ex = app.add_subcommand("experiment", "Run a benchmark reproduction preset");
  std::string ex_name, ex_out;
  int ex_runs = 5;
  std::uint64_t ex_seed = 7;
  ex->add_option("preset", ex_name, "exp1|exp2|exp3")->required();
  ex->add_option("--runs", ex_runs, "Number of seeded runs");
  ex->add_option("--seed", ex_seed, "Base seed; run i uses base+i");
  ex->add_option("--out-dir", ex_out, "Directory for reports and summaries");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      frbc::Dataset d;
      if (gen_name == "synthetic1") d = frbc::generate_synthetic1(gen_seed);
      else if (gen_name == "synthetic2") d = frbc::generate_synthetic2(gen_seed);
      else if (gen_name == "synthetic3") d = frbc::generate_synthetic3(gen_seed);
      else throw std::runtime_error("unknown dataset '" + gen_name + "'");
      frbc::save_csv(d, gen_out);
      std::cout << "wrote " << d.size() << " x " << d.feature_count() << " dataset to " << gen_out
                << "\n";
    } else if (*tr) {
      const frbc::Granularity gran = frbc::granularity_from_name(tr_gran);
      if (gran == frbc::Granularity::kRuleSpecific && tr_c2 > 0.0) {
        throw std::runtime_error(
            "redundancy control (--c2 > 0) is not defined for rule-specific modulators; "
            "use class-specific or global granularity");
      }
      frbc::Dataset full = load_data(tr_data, tr_label, tr_no_header, tr_seed);
      std::optional<frbc::HoldoutSplit> split;
      if (tr_holdout > 0.0) split = frbc::split_holdout(full, tr_holdout, tr_seed);
      const frbc::Dataset& train_d = split ? split->train : full;
      const frbc::Dataset& eval_d = split ? split->test : full;

      std::vector<int> rpc = tr_rpc;
      if (rpc.empty()) rpc.assign(static_cast<std::size_t>(train_d.class_count), 1);
      frbc::RuleBaseConfig rb_cfg;
      rb_cfg.spread_floor_frac = tr_floor;
      const frbc::RuleBase rb = frbc::build_rulebase(train_d, rpc, tr_seed, rb_cfg);

      frbc::TrainConfig cfg;
      cfg.learning_rate = tr_lr;
      cfg.max_iters = tr_iters;
      cfg.tolerance = tr_tol;
      cfg.c1 = tr_c1;
      cfg.c2 = tr_c2;
      cfg.seed = tr_seed;
      cfg.normalize_ecl = tr_normalize;
      cfg.batch_size = tr_batch;
      cfg.checkpoint_interval = tr_ckpt_every;
      cfg.checkpoint_path = tr_ckpt;

      const frbc::ModulatorBank bank0 =
          frbc::init_bank(gran, rb, train_d.feature_count(), tr_seed + 11, tr_sigma);
      const frbc::TrainedModel model = frbc::train(rb, bank0, train_d, cfg);

      auto report = frbc::build_selection_report(model, eval_d, tr_thresh);
      report.run_seed = tr_seed;
      std::map<std::string, double> hp{{"c1", tr_c1},
                                       {"c2", tr_c2},
                                       {"learning_rate", tr_lr},
                                       {"max_iters", static_cast<double>(tr_iters)},
                                       {"tolerance", tr_tol},
                                       {"sigma_init", tr_sigma},
                                       {"spread_floor_frac", tr_floor},
                                       {"threshold", tr_thresh},
                                       {"normalize_ecl", tr_normalize ? 1.0 : 0.0},
                                       {"batch_size", static_cast<double>(tr_batch)},
                                       {"holdout", tr_holdout}};
      const std::string json = frbc::report_to_json(
          report, model, hp, split ? "holdout" : "resubstitution");
      if (!tr_report.empty()) {
        std::ofstream(tr_report) << json;
        std::cout << "report written to " << tr_report << "\n";
      } else {
        std::cout << json;
      }
      if (!tr_trace.empty()) frbc::write_trace_csv(model.trace, tr_trace);
      if (!tr_rules_out.empty()) std::ofstream(tr_rules_out) << rb.to_json_string();
      if (tr_print_rules) std::cout << frbc::render_rules(model, tr_thresh);
      std::cout << "accuracy " << report.accuracy << " after " << model.iterations_run
                << " iterations" << (model.converged ? " (converged)" : "") << "\n";
    } else if (*gc) {
      const auto suite = frbc::gradient_check_suite(gc_trials, gc_seed);
      for (const auto& t : suite.trials) {
        std::cout << "n=" << t.n << " P=" << t.features << " C=" << t.classes << " "
                  << frbc::granularity_name(t.granularity) << " c2=" << t.c2
                  << " max_rel_err=" << t.max_rel_error << "\n";
      }
      std::cout << "max relative error: " << suite.worst << "\n";
      const bool pass = suite.worst < 1e-4;
      std::cout << (pass ? "PASS" : "FAIL") << " (tolerance 1e-4)\n";
      return pass ? 0 : 1;
    } else if (*ex) {
      const auto preset = [&] {
        auto p = frbc::make_preset(ex_name);
        p.runs = ex_runs;
        p.base_seed = ex_seed;
        return p;
      }();
      std::optional<std::filesystem::path> out_dir;
      if (!ex_out.empty()) out_dir = ex_out;
      const auto summary = frbc::run_experiment(preset, out_dir);
      std::cout << summary.to_markdown();
      for (const auto& run : summary.runs) {
        if (!run.error.empty()) {
          std::cerr << "run " << (run.index + 1) << " failed: " << run.error << "\n";
          return 1;
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
