#include "frbc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "frbc/rng.hpp"

namespace frbc {

namespace {

// dE/dM accumulator gets multiplied by dM/dlambda once at the end.
struct GradWork {
  Matrix acc;  // dE/dM, shaped like lambdas
};

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

// E_cl contribution over the given rows: routes through each class's argmax rule.
void accumulate_ecl(GradWork& w, const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                    std::span<const std::size_t> rows, double weight) {
  const int c = rb.class_count();
  std::vector<std::vector<double>> m_rows(static_cast<std::size_t>(rb.rule_count()));
  std::vector<std::size_t> lambda_row(static_cast<std::size_t>(rb.rule_count()));
  for (int k = 1; k <= c; ++k) {
    const auto [begin, end] = rb.class_range(k);
    for (int r = begin; r < end; ++r) {
      m_rows[static_cast<std::size_t>(r)] = bank.modulator_row(k, r - begin + 1);
      lambda_row[static_cast<std::size_t>(r)] = bank.row_for(k, r - begin + 1);
    }
  }
  const std::size_t p = rb.feature_count();
  std::vector<double> logmu(p);
  for (const std::size_t i : rows) {
    const auto x = d.features.row(i);
    for (int k = 1; k <= c; ++k) {
      const auto [begin, end] = rb.class_range(k);
      double best = -std::numeric_limits<double>::infinity();
      int best_rule = -1;
      for (int r = begin; r < end; ++r) {
        const double lf = log_firing_strength(rb.rules[static_cast<std::size_t>(r)], x,
                                              m_rows[static_cast<std::size_t>(r)]);
        if (lf > best) {
          best = lf;
          best_rule = r;
        }
      }
      const double alpha = std::exp(best);
      const double go = 2.0 * (alpha - d.targets(i, static_cast<std::size_t>(k - 1))) * weight;
      if (go == 0.0) continue;
      const auto& rule = rb.rules[static_cast<std::size_t>(best_rule)];
      const std::size_t row = lambda_row[static_cast<std::size_t>(best_rule)];
      for (std::size_t j = 0; j < p; ++j) {
        w.acc(row, j) += go * alpha * log_membership(x[j], rule.antecedents[j]);
      }
    }
  }
}

void accumulate_select(GradWork& w, const ModulatorBank& bank, double c1) {
  if (c1 == 0.0) return;
  const auto p = static_cast<double>(bank.feature_count());
  const auto c = static_cast<double>(bank.class_count());
  auto add_row = [&](std::size_t row, double norm) {
    const auto lam = bank.lambdas.row(row);
    for (std::size_t j = 0; j < lam.size(); ++j) {
      const double m = modulator_value(lam[j]);
      w.acc(row, j) += norm * (1.0 - 2.0 * m);
    }
  };
  switch (bank.granularity) {
    case Granularity::kGlobal:
      add_row(0, c1 / p);
      break;
    case Granularity::kClassSpecific:
      for (std::size_t k = 0; k < bank.lambdas.rows(); ++k) add_row(k, c1 / (c * p));
      break;
    case Granularity::kRuleSpecific: {
      std::size_t row = 0;
      for (int nk : bank.rules_per_class) {
        for (int l = 0; l < nk; ++l, ++row) add_row(row, c1 / (c * p * static_cast<double>(nk)));
      }
      break;
    }
  }
}

void accumulate_red(GradWork& w, const ModulatorBank& bank, const CorrelationSet& corr, double c2,
                    double eps) {
  if (c2 == 0.0) return;
  const std::size_t p = bank.feature_count();
  const double pair_norm = static_cast<double>(p) * static_cast<double>(p - 1);
  auto add_row = [&](std::size_t row, const Matrix& rho, double norm) {
    const auto lam = bank.lambdas.row(row);
    std::vector<double> mv(p);
    for (std::size_t j = 0; j < p; ++j) mv[j] = modulator_value(lam[j]);
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t m = 0; m < p; ++m) {
        if (m == j) continue;
        const double r2 = rho(j, m) * rho(j, m);
        // d/dp_j of the (j,m) and (m,j) terms together
        s += mv[m] * r2 / std::sqrt(mv[j] * mv[m] * r2 + eps);
      }
      w.acc(row, j) += norm * s;
    }
  };
  switch (bank.granularity) {
    case Granularity::kGlobal:
      add_row(0, corr.global_rho, c2 / pair_norm);
      break;
    case Granularity::kClassSpecific: {
      const auto c = static_cast<double>(bank.class_count());
      for (std::size_t k = 0; k < bank.lambdas.rows(); ++k) {
        add_row(k, corr.class_rho[k], c2 / (c * pair_norm));
      }
      break;
    }
    case Granularity::kRuleSpecific:
      throw std::runtime_error("redundancy control is not defined for rule-specific modulators");
  }
}

Matrix gradient_over_rows(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                          const CorrelationSet* corr, const LossOptions& opts,
                          std::span<const std::size_t> rows) {
  bank.check_compatible(rb);
  GradWork w{Matrix(bank.lambdas.rows(), bank.lambdas.cols(), 0.0)};
  const double weight = opts.normalize_ecl ? 1.0 / static_cast<double>(rows.size()) : 1.0;
  accumulate_ecl(w, rb, bank, d, rows, weight);
  accumulate_select(w, bank, opts.c1);
  if (opts.c2 > 0.0) {
    if (corr == nullptr) throw std::runtime_error("c2 > 0 requires a correlation set");
    accumulate_red(w, bank, *corr, opts.c2, opts.eps_red);
  }
  Matrix grad(bank.lambdas.rows(), bank.lambdas.cols());
  for (std::size_t r = 0; r < grad.rows(); ++r) {
    for (std::size_t j = 0; j < grad.cols(); ++j) {
      grad(r, j) = w.acc(r, j) * modulator_derivative(bank.lambdas(r, j));
    }
  }
  return grad;
}

// Objective with per-class rule routing frozen; the smooth branch the
// analytic gradient differentiates.
double frozen_objective(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                        const CorrelationSet* corr, const LossOptions& opts,
                        std::span<const int> routing) {
  const int c = rb.class_count();
  std::vector<std::vector<double>> m_rows(static_cast<std::size_t>(rb.rule_count()));
  for (int k = 1; k <= c; ++k) {
    const auto [begin, end] = rb.class_range(k);
    for (int r = begin; r < end; ++r) {
      m_rows[static_cast<std::size_t>(r)] = bank.modulator_row(k, r - begin + 1);
    }
  }
  double e_cl = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto x = d.features.row(i);
    for (int k = 0; k < c; ++k) {
      const int r = routing[i * static_cast<std::size_t>(c) + static_cast<std::size_t>(k)];
      const double alpha = firing_strength(rb.rules[static_cast<std::size_t>(r)], x,
                                           m_rows[static_cast<std::size_t>(r)]);
      const double diff = alpha - d.targets(i, static_cast<std::size_t>(k));
      e_cl += diff * diff;
    }
  }
  if (opts.normalize_ecl) e_cl /= static_cast<double>(d.size());
  double total = e_cl + opts.c1 * selection_regularizer(bank);
  if (opts.c2 > 0.0) {
    if (corr == nullptr) throw std::runtime_error("c2 > 0 requires a correlation set");
    total += opts.c2 * redundancy_regularizer_smoothed(bank, *corr, opts.eps_red);
  }
  return total;
}

}  // namespace

Matrix analytic_gradient(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                         const CorrelationSet* corr, const LossOptions& opts) {
  const auto rows = all_rows(d);
  return gradient_over_rows(rb, bank, d, corr, opts, rows);
}

Matrix finite_difference_gradient(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                                  const CorrelationSet* corr, const LossOptions& opts, double h) {
  if (!(h > 0.0)) throw std::runtime_error("finite differences need h > 0");
  bank.check_compatible(rb);
  const auto routing = classify_dataset(rb, bank, d).winning_rule;
  ModulatorBank probe = bank;
  Matrix grad(bank.lambdas.rows(), bank.lambdas.cols());
  for (std::size_t r = 0; r < grad.rows(); ++r) {
    for (std::size_t j = 0; j < grad.cols(); ++j) {
      const double base = bank.lambdas(r, j);
      probe.lambdas(r, j) = base + h;
      const double up = frozen_objective(rb, probe, d, corr, opts, routing);
      probe.lambdas(r, j) = base - h;
      const double down = frozen_objective(rb, probe, d, corr, opts, routing);
      probe.lambdas(r, j) = base;
      grad(r, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

GradCheckResult gradient_check(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d,
                               const CorrelationSet* corr, const LossOptions& opts, double h,
                               double grad_floor) {
  const Matrix a = analytic_gradient(rb, bank, d, corr, opts);
  const Matrix f = finite_difference_gradient(rb, bank, d, corr, opts, h);
  GradCheckResult res;
  const auto av = a.flat();
  const auto fv = f.flat();
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (std::abs(av[i]) <= grad_floor) continue;
    ++res.coords_checked;
    res.max_rel_error = std::max(res.max_rel_error, std::abs(av[i] - fv[i]) / std::abs(av[i]));
  }
  return res;
}

TrainedModel train(const RuleBase& rb, const ModulatorBank& initial, const Dataset& d,
                   const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw std::runtime_error("learning rate must be > 0");
  if (cfg.max_iters < 0) throw std::runtime_error("max_iters must be >= 0");
  initial.check_compatible(rb);

  LossOptions opts;
  opts.c1 = cfg.c1;
  opts.c2 = cfg.c2;
  opts.normalize_ecl = cfg.normalize_ecl;
  opts.eps_red = cfg.eps_red;

  CorrelationSet corr;
  const CorrelationSet* corr_ptr = nullptr;
  if (cfg.c2 > 0.0) {
    corr = correlation_set(d);  // data constants; computed once
    corr_ptr = &corr;
  }

  TrainedModel model;
  model.rulebase = rb;
  model.bank = initial;

  const std::size_t n = d.size();
  const bool full_batch = cfg.batch_size <= 0 || static_cast<std::size_t>(cfg.batch_size) >= n;
  std::vector<std::size_t> order = all_rows(d);
  std::size_t cursor = 0;
  Rng shuffle_rng(cfg.seed);

  double prev_total = 0.0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    Matrix grad;
    if (full_batch) {
      grad = gradient_over_rows(rb, model.bank, d, corr_ptr, opts, order);
    } else {
      if (cursor == 0) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.index(i)]);
      }
      const std::size_t batch = std::min(static_cast<std::size_t>(cfg.batch_size), n - cursor);
      grad = gradient_over_rows(rb, model.bank, d, corr_ptr, opts,
                                std::span<const std::size_t>(order).subspan(cursor, batch));
      cursor = (cursor + batch) % n;
    }
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      for (std::size_t j = 0; j < grad.cols(); ++j) {
        model.bank.lambdas(r, j) -= cfg.learning_rate * grad(r, j);
      }
    }
    const LossBreakdown bd = total_loss(rb, model.bank, d, corr_ptr, opts);
    model.trace.push_back(bd);
    model.iterations_run = it + 1;
    if (!std::isfinite(bd.total)) {
      throw std::runtime_error("training aborted: non-finite loss at iteration " +
                               std::to_string(it + 1) + " (e_cl=" + std::to_string(bd.e_cl) +
                               ", e_select=" + std::to_string(bd.e_select) +
                               ", e_red=" + std::to_string(bd.e_red) + ")");
    }
    if (cfg.checkpoint_interval > 0 && (it + 1) % cfg.checkpoint_interval == 0 &&
        !cfg.checkpoint_path.empty()) {
      std::ofstream out(cfg.checkpoint_path);
      out << "{\n  \"iteration\": " << (it + 1) << ",\n  \"bank\": " << model.bank.to_json_string()
          << "\n}\n";
    }
    if (it > 0 && std::abs(prev_total - bd.total) < cfg.tolerance) {
      model.converged = true;
      break;
    }
    prev_total = bd.total;
  }
  if (!model.trace.empty()) {
    model.loss_increased = model.trace.back().total > model.trace.front().total;
  }
  return model;
}

GradCheckSuite gradient_check_suite(int trials, std::uint64_t seed, double h) {
  GradCheckSuite suite;
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const int c = 2 + t % 2;
    const int per_rule = 1 + (t / 3) % 2;
    const std::size_t n =
        std::max<std::size_t>(5 + rng.index(16), static_cast<std::size_t>(2 * c * per_rule));
    const std::size_t p = 2 + rng.index(4);
    const Granularity gran = static_cast<Granularity>(t % 3);
    const double c2 = (gran != Granularity::kRuleSpecific && t % 2 == 0) ? 1.0 : 0.0;

    Matrix x(n, p);
    for (double& v : x.flat()) v = rng.normal(0.0, 3.0);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      // every class gets at least 2*per_rule instances up front
      labels[i] = i < static_cast<std::size_t>(2 * c * per_rule)
                      ? static_cast<int>(i) % c + 1
                      : static_cast<int>(rng.index(static_cast<std::size_t>(c))) + 1;
    }
    const Dataset d = Dataset::from_parts(std::move(x), std::move(labels), {});
    RuleBaseConfig rb_cfg;
    rb_cfg.spread_floor_frac = 0.16;
    const RuleBase rb =
        build_rulebase(d, std::vector<int>(static_cast<std::size_t>(c), per_rule),
                       seed + static_cast<std::uint64_t>(t), rb_cfg);
    ModulatorBank bank = init_bank(gran, rb, p, seed + 1000 + static_cast<std::uint64_t>(t), 0.0);
    for (double& v : bank.lambdas.flat()) v = rng.normal(1.0, 0.8);

    CorrelationSet corr;
    const CorrelationSet* corr_ptr = nullptr;
    LossOptions opts;
    opts.c1 = 1.0;
    opts.c2 = c2;
    opts.normalize_ecl = t % 2 == 1;
    if (c2 > 0.0) {
      corr = correlation_set(d);
      corr_ptr = &corr;
    }
    const auto res = gradient_check(rb, bank, d, corr_ptr, opts, h);
    suite.trials.push_back({n, p, c, gran, c2, res.max_rel_error});
    suite.worst = std::max(suite.worst, res.max_rel_error);
  }
  return suite;
}

void write_trace_csv(const std::vector<LossBreakdown>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iteration,e_cl,e_select,e_red,total\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << (i + 1) << ',' << trace[i].e_cl << ',' << trace[i].e_select << ',' << trace[i].e_red
        << ',' << trace[i].total << '\n';
  }
}

}  // namespace frbc
