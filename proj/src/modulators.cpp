#include "frbc/modulators.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "frbc/rng.hpp"

namespace frbc {

std::string granularity_name(Granularity g) {
  switch (g) {
    case Granularity::kGlobal: return "global";
    case Granularity::kClassSpecific: return "class_specific";
    case Granularity::kRuleSpecific: return "rule_specific";
  }
  throw std::logic_error("unknown granularity");
}

Granularity granularity_from_name(const std::string& name) {
  if (name == "global") return Granularity::kGlobal;
  if (name == "class_specific" || name == "class") return Granularity::kClassSpecific;
  if (name == "rule_specific" || name == "rule") return Granularity::kRuleSpecific;
  throw std::runtime_error("unknown granularity '" + name + "'");
}

double modulator_value(double lambda) { return std::exp(-lambda * lambda); }

double modulator_derivative(double lambda) {
  return -2.0 * lambda * std::exp(-lambda * lambda);
}

std::size_t ModulatorBank::row_for(int k, int l) const {
  const int c = class_count();
  if (k < 1 || k > c) throw std::out_of_range("modulator row: class index out of range");
  const int nk = rules_per_class[static_cast<std::size_t>(k - 1)];
  if (l < 1 || l > nk) throw std::out_of_range("modulator row: rule index out of range");
  switch (granularity) {
    case Granularity::kGlobal:
      return 0;
    case Granularity::kClassSpecific:
      return static_cast<std::size_t>(k - 1);
    case Granularity::kRuleSpecific: {
      std::size_t base = 0;
      for (int i = 0; i + 1 < k; ++i) base += static_cast<std::size_t>(rules_per_class[static_cast<std::size_t>(i)]);
      return base + static_cast<std::size_t>(l - 1);
    }
  }
  throw std::logic_error("unknown granularity");
}

std::vector<double> ModulatorBank::modulator_row(int k, int l) const {
  const auto row = lambdas.row(row_for(k, l));
  std::vector<double> m(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) m[j] = modulator_value(row[j]);
  return m;
}

void ModulatorBank::check_compatible(const RuleBase& rb) const {
  if (rules_per_class != rb.rules_per_class) {
    throw std::runtime_error("modulator bank is bound to a different rule layout");
  }
  if (lambdas.cols() != rb.feature_count()) {
    throw std::runtime_error("modulator bank feature count does not match rule base");
  }
  std::size_t want_rows = 1;
  if (granularity == Granularity::kClassSpecific) want_rows = static_cast<std::size_t>(rb.class_count());
  if (granularity == Granularity::kRuleSpecific) want_rows = static_cast<std::size_t>(rb.rule_count());
  if (lambdas.rows() != want_rows) {
    throw std::runtime_error("modulator bank row count does not match granularity");
  }
  for (double v : lambdas.flat()) {
    if (!std::isfinite(v)) throw std::runtime_error("non-finite lambda in modulator bank");
  }
}

namespace {
std::size_t bank_rows(Granularity g, const RuleBase& rb) {
  switch (g) {
    case Granularity::kGlobal: return 1;
    case Granularity::kClassSpecific: return static_cast<std::size_t>(rb.class_count());
    case Granularity::kRuleSpecific: return static_cast<std::size_t>(rb.rule_count());
  }
  throw std::logic_error("unknown granularity");
}
}  // namespace

ModulatorBank init_bank(Granularity g, const RuleBase& rb, std::size_t feature_count,
                        std::uint64_t seed, double sigma_init) {
  ModulatorBank bank;
  bank.granularity = g;
  bank.rules_per_class = rb.rules_per_class;
  bank.lambdas = Matrix(bank_rows(g, rb), feature_count);
  Rng rng(seed);
  for (double& v : bank.lambdas.flat()) v = 2.0 + rng.normal(0.0, sigma_init);
  return bank;
}

ModulatorBank identity_bank(Granularity g, const RuleBase& rb, std::size_t feature_count) {
  ModulatorBank bank;
  bank.granularity = g;
  bank.rules_per_class = rb.rules_per_class;
  bank.lambdas = Matrix(bank_rows(g, rb), feature_count, 0.0);
  return bank;
}

SelectionMask selection_mask(const ModulatorBank& bank, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::runtime_error("selection threshold must be in (0,1)");
  }
  SelectionMask mask;
  mask.rows = bank.lambdas.rows();
  mask.cols = bank.lambdas.cols();
  mask.selected.resize(mask.rows * mask.cols);
  const auto flat = bank.lambdas.flat();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    mask.selected[i] = modulator_value(flat[i]) >= threshold;
  }
  return mask;
}

std::string ModulatorBank::to_json_string() const {
  nlohmann::ordered_json j;
  j["granularity"] = granularity_name(granularity);
  j["rules_per_class"] = rules_per_class;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < lambdas.rows(); ++r) {
    const auto row = lambdas.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["lambda"] = std::move(rows);
  return j.dump(2);
}

ModulatorBank ModulatorBank::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ModulatorBank bank;
  bank.granularity = granularity_from_name(j.at("granularity").get<std::string>());
  bank.rules_per_class = j.at("rules_per_class").get<std::vector<int>>();
  const auto rows = j.at("lambda").get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw std::runtime_error("modulator bank has no rows");
  bank.lambdas = Matrix(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != bank.lambdas.cols()) throw std::runtime_error("ragged lambda rows");
    for (std::size_t c = 0; c < rows[r].size(); ++c) bank.lambdas(r, c) = rows[r][c];
  }
  return bank;
}

}  // namespace frbc
