#include "frbc/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace frbc {

double classification_error(const Matrix& outputs, const Matrix& targets) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
    throw std::runtime_error("classification_error: shape mismatch");
  }
  double s = 0.0;
  const auto a = outputs.flat();
  const auto b = targets.flat();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double selection_regularizer(const ModulatorBank& bank) {
  const auto p_features = static_cast<double>(bank.feature_count());
  const auto c = static_cast<double>(bank.class_count());
  auto term = [](double lambda) {
    const double p = modulator_value(lambda);
    return p * (1.0 - p);
  };
  switch (bank.granularity) {
    case Granularity::kGlobal: {
      double s = 0.0;
      for (double v : bank.lambdas.row(0)) s += term(v);
      return s / p_features;
    }
    case Granularity::kClassSpecific: {
      double s = 0.0;
      for (double v : bank.lambdas.flat()) s += term(v);
      return s / (c * p_features);
    }
    case Granularity::kRuleSpecific: {
      double s = 0.0;
      std::size_t row = 0;
      for (int nk : bank.rules_per_class) {
        double class_sum = 0.0;
        for (int l = 0; l < nk; ++l, ++row) {
          for (double v : bank.lambdas.row(row)) class_sum += term(v);
        }
        s += class_sum / static_cast<double>(nk);
      }
      return s / (c * p_features);
    }
  }
  throw std::logic_error("unknown granularity");
}

namespace {

double redundancy_sum(const ModulatorBank& bank, const CorrelationSet& corr, double eps) {
  const std::size_t p = bank.feature_count();
  if (p < 2) throw std::runtime_error("redundancy regularizer needs at least 2 features");
  auto pair_sum = [&](std::span<const double> lambdas, const Matrix& rho) {
    std::vector<double> mv(p);
    for (std::size_t j = 0; j < p; ++j) mv[j] = modulator_value(lambdas[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t m = 0; m < p; ++m) {
        if (m == j) continue;
        const double r = rho(j, m);
        s += std::sqrt(mv[j] * mv[m] * r * r + eps);
      }
    }
    return s;
  };
  const double norm = static_cast<double>(p) * static_cast<double>(p - 1);
  switch (bank.granularity) {
    case Granularity::kGlobal:
      return pair_sum(bank.lambdas.row(0), corr.global_rho) / norm;
    case Granularity::kClassSpecific: {
      const auto c = static_cast<std::size_t>(bank.class_count());
      if (corr.class_rho.size() != c) {
        throw std::runtime_error("correlation set class count does not match bank");
      }
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        s += pair_sum(bank.lambdas.row(k), corr.class_rho[k]);
      }
      return s / (static_cast<double>(c) * norm);
    }
    case Granularity::kRuleSpecific:
      throw std::runtime_error(
          "redundancy control is not defined for rule-specific modulators");
  }
  throw std::logic_error("unknown granularity");
}

}  // namespace

double redundancy_regularizer(const ModulatorBank& bank, const CorrelationSet& corr) {
  return redundancy_sum(bank, corr, 0.0);
}

double redundancy_regularizer_smoothed(const ModulatorBank& bank, const CorrelationSet& corr,
                                       double eps) {
  return redundancy_sum(bank, corr, eps);
}

LossBreakdown total_loss(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                         const CorrelationSet* corr, const LossOptions& opts) {
  LossBreakdown out;
  out.c1 = opts.c1;
  out.c2 = opts.c2;
  const auto batch = classify_dataset(rb, bank, d);
  out.e_cl = classification_error(batch.outputs, d.targets);
  if (opts.normalize_ecl) out.e_cl /= static_cast<double>(d.size());
  out.e_select = selection_regularizer(bank);
  if (opts.c2 > 0.0) {
    if (corr == nullptr) throw std::runtime_error("c2 > 0 requires a correlation set");
    out.e_red = redundancy_regularizer(bank, *corr);
  }
  out.total = out.e_cl + opts.c1 * out.e_select + opts.c2 * out.e_red;
  return out;
}

}  // namespace frbc
