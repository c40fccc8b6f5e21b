#include "frbc/report.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace frbc {

namespace {

struct Counts {
  std::vector<std::size_t> correct;
  std::vector<std::size_t> total;
  std::size_t ties = 0;
};

Counts count_predictions(const TrainedModel& model, const Dataset& d) {
  if (d.feature_count() != model.rulebase.feature_count()) {
    throw std::runtime_error("accuracy: dataset feature count does not match model");
  }
  const auto c = static_cast<std::size_t>(d.class_count);
  Counts cnt{std::vector<std::size_t>(c, 0), std::vector<std::size_t>(c, 0), 0};
  const auto batch = classify_dataset(model.rulebase, model.bank, d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto pred = predict_label(batch.outputs.row(i));
    const auto truth = static_cast<std::size_t>(d.labels[i] - 1);
    ++cnt.total[truth];
    if (pred.label == d.labels[i]) ++cnt.correct[truth];
    if (pred.tie) ++cnt.ties;
  }
  return cnt;
}

}  // namespace

double accuracy(const TrainedModel& model, const Dataset& d) {
  const auto cnt = count_predictions(model, d);
  std::size_t ok = 0, total = 0;
  for (std::size_t k = 0; k < cnt.total.size(); ++k) {
    ok += cnt.correct[k];
    total += cnt.total[k];
  }
  return static_cast<double>(ok) / static_cast<double>(total);
}

std::vector<double> per_class_accuracy(const TrainedModel& model, const Dataset& d) {
  const auto cnt = count_predictions(model, d);
  std::vector<double> out(cnt.total.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = cnt.total[k] ? static_cast<double>(cnt.correct[k]) / static_cast<double>(cnt.total[k])
                          : 0.0;
  }
  return out;
}

SelectionReport build_selection_report(const TrainedModel& model, const Dataset& d,
                                       double threshold) {
  SelectionReport rep;
  rep.granularity = model.bank.granularity;
  rep.threshold = threshold;

  const auto mask = selection_mask(model.bank, threshold);
  auto names_for_row = [&](std::size_t row) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < mask.cols; ++j) {
      if (mask.at(row, j)) names.push_back(d.feature_names[j]);
    }
    return names;
  };

  switch (model.bank.granularity) {
    case Granularity::kGlobal:
      rep.global_subset = names_for_row(0);
      break;
    case Granularity::kClassSpecific:
      for (std::size_t k = 0; k < mask.rows; ++k) rep.class_subsets.push_back(names_for_row(k));
      break;
    case Granularity::kRuleSpecific: {
      std::size_t row = 0;
      for (std::size_t k = 0; k < model.bank.rules_per_class.size(); ++k) {
        const int nk = model.bank.rules_per_class[k];
        for (int l = 1; l <= nk; ++l, ++row) {
          rep.rule_subsets.push_back(
              {static_cast<int>(k) + 1, l, names_for_row(row)});
        }
      }
      break;
    }
  }

  rep.modulator_values = Matrix(model.bank.lambdas.rows(), model.bank.lambdas.cols());
  for (std::size_t r = 0; r < rep.modulator_values.rows(); ++r) {
    for (std::size_t j = 0; j < rep.modulator_values.cols(); ++j) {
      rep.modulator_values(r, j) = modulator_value(model.bank.lambdas(r, j));
    }
  }

  const auto cnt = count_predictions(model, d);
  std::size_t ok = 0, total = 0;
  rep.per_class_accuracy.resize(cnt.total.size());
  for (std::size_t k = 0; k < cnt.total.size(); ++k) {
    ok += cnt.correct[k];
    total += cnt.total[k];
    rep.per_class_accuracy[k] =
        cnt.total[k] ? static_cast<double>(cnt.correct[k]) / static_cast<double>(cnt.total[k]) : 0.0;
  }
  rep.accuracy = static_cast<double>(ok) / static_cast<double>(total);
  rep.tie_rate = static_cast<double>(cnt.ties) / static_cast<double>(total);
  return rep;
}

std::string render_rules(const TrainedModel& model, double threshold) {
  const auto& rb = model.rulebase;
  const auto mask = selection_mask(model.bank, threshold);
  std::ostringstream out;
  for (int k = 1; k <= rb.class_count(); ++k) {
    const auto [begin, end] = rb.class_range(k);
    for (int r = begin; r < end; ++r) {
      const int l = r - begin + 1;
      const auto& rule = rb.rules[static_cast<std::size_t>(r)];
      const std::size_t row = model.bank.row_for(k, l);
      out << 'R' << k << '.' << l << ": If ";
      bool any = false;
      for (std::size_t j = 0; j < rule.antecedents.size(); ++j) {
        if (!mask.at(row, j)) continue;
        if (any) out << " and ";
        const auto& fs = rule.antecedents[j];
        out << 'x' << (j + 1) << " is close-to(" << fs.center << ", sd " << fs.spread << ')';
        any = true;
      }
      if (!any) out << "(no active antecedent)";
      out << " then y is " << k << '\n';
    }
  }
  return out.str();
}

std::string report_to_json(const SelectionReport& report, const TrainedModel& model,
                           const std::map<std::string, double>& hyperparameters,
                           const std::string& evaluation_protocol) {
  nlohmann::ordered_json j;
  j["schema"] = "frbcsel-report-v1";
  j["granularity"] = granularity_name(report.granularity);
  j["seed"] = report.run_seed;
  j["evaluation"]["protocol"] = evaluation_protocol;
  j["evaluation"]["note"] =
      "resubstitution unless a holdout fraction was requested; the source tables do not state "
      "their split";
  {
    nlohmann::ordered_json h;
    for (const auto& [key, value] : hyperparameters) h[key] = value;
    j["hyperparameters"] = std::move(h);
  }
  j["accuracy"] = report.accuracy;
  j["per_class_accuracy"] = report.per_class_accuracy;
  j["tie_rate"] = report.tie_rate;
  j["threshold"] = report.threshold;
  switch (report.granularity) {
    case Granularity::kGlobal:
      j["selected"]["global"] = report.global_subset;
      break;
    case Granularity::kClassSpecific:
      j["selected"]["per_class"] = report.class_subsets;
      break;
    case Granularity::kRuleSpecific: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& rs : report.rule_subsets) {
        nlohmann::ordered_json e;
        e["class"] = rs.class_index;
        e["rule"] = rs.rule_index;
        e["features"] = rs.features;
        arr.push_back(std::move(e));
      }
      j["selected"]["per_rule"] = std::move(arr);
      break;
    }
  }
  {
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < report.modulator_values.rows(); ++r) {
      const auto row = report.modulator_values.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["modulators"] = std::move(rows);
  }
  j["iterations_run"] = model.iterations_run;
  j["converged"] = model.converged;
  j["loss_increased"] = model.loss_increased;
  if (!model.trace.empty()) {
    const auto& last = model.trace.back();
    j["final_loss"] = {{"e_cl", last.e_cl},
                       {"e_select", last.e_select},
                       {"e_red", last.e_red},
                       {"total", last.total}};
  }
  j["rulebase"] = nlohmann::ordered_json::parse(model.rulebase.to_json_string());
  j["bank"] = nlohmann::ordered_json::parse(model.bank.to_json_string());
  return j.dump(2) + "\n";
}

}  // namespace frbc
