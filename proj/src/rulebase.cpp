#include "frbc/rulebase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "frbc/modulators.hpp"
#include "frbc/rng.hpp"

namespace frbc {

namespace {
constexpr double kLogFloor = -700.0;

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}
}  // namespace

int RuleBase::rule_index(int k, int l) const {
  const auto [begin, end] = class_range(k);
  const int idx = begin + (l - 1);
  if (l < 1 || idx >= end) throw std::out_of_range("rule index out of range");
  return idx;
}

std::pair<int, int> RuleBase::class_range(int k) const {
  if (k < 1 || k > class_count()) throw std::out_of_range("class index out of range");
  int begin = 0;
  for (int i = 0; i + 1 < k; ++i) begin += rules_per_class[static_cast<std::size_t>(i)];
  return {begin, begin + rules_per_class[static_cast<std::size_t>(k - 1)]};
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters) {
  const std::size_t m = points.rows();
  const std::size_t p = points.cols();
  if (k < 1) throw std::runtime_error("kmeans: k must be >= 1");
  if (static_cast<std::size_t>(k) > m) {
    throw std::runtime_error("kmeans: k=" + std::to_string(k) + " exceeds point count " +
                             std::to_string(m));
  }
  Rng rng(seed);

  // k-means++ seeding
  Matrix centroids(static_cast<std::size_t>(k), p);
  std::vector<double> d2(m, std::numeric_limits<double>::infinity());
  {
    const std::size_t first = rng.index(m);
    for (std::size_t j = 0; j < p; ++j) centroids(0, j) = points(first, j);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        d2[i] = std::min(d2[i], sq_dist(points.row(i), centroids.row(static_cast<std::size_t>(c - 1))));
        total += d2[i];
      }
      std::size_t chosen = 0;
      if (total > 0.0) {
        const double r = rng.uniform(0.0, total);
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          acc += d2[i];
          if (acc >= r) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = rng.index(m);
      }
      for (std::size_t j = 0; j < p; ++j) centroids(static_cast<std::size_t>(c), j) = points(chosen, j);
    }
  }

  std::vector<int> assign(m, -1);
  std::vector<std::size_t> counts(static_cast<std::size_t>(k));
  int it = 0;
  for (; it < max_iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(points.row(i), centroids.row(static_cast<std::size_t>(c)));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && it > 0) break;

    std::fill(counts.begin(), counts.end(), 0);
    Matrix sums(static_cast<std::size_t>(k), p, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto c = static_cast<std::size_t>(assign[i]);
      ++counts[c];
      for (std::size_t j = 0; j < p; ++j) sums(c, j) += points(i, j);
    }
    for (int c = 0; c < k; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      if (counts[cc] > 0) {
        for (std::size_t j = 0; j < p; ++j) {
          centroids(cc, j) = sums(cc, j) / static_cast<double>(counts[cc]);
        }
      } else {
        // reseed to the point farthest from its own centroid
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double d =
              sq_dist(points.row(i), centroids.row(static_cast<std::size_t>(assign[i])));
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        for (std::size_t j = 0; j < p; ++j) centroids(cc, j) = points(far, j);
        assign[far] = c;
      }
    }
  }
  return KMeansResult{std::move(centroids), std::move(assign), it};
}

GmmRefineResult refine_clusters_gmm(const Matrix& points, const Matrix& init_centroids,
                                    const std::vector<int>& init_assignments,
                                    const GmmRefineConfig& cfg) {
  const std::size_t m = points.rows();
  const std::size_t p = points.cols();
  const std::size_t k = init_centroids.rows();
  if (init_assignments.size() != m) throw std::runtime_error("gmm refine: assignment size mismatch");

  std::vector<double> var_floor(p);
  for (std::size_t j = 0; j < p; ++j) {
    double lo = points(0, j), hi = points(0, j);
    for (std::size_t i = 1; i < m; ++i) {
      lo = std::min(lo, points(i, j));
      hi = std::max(hi, points(i, j));
    }
    const double f = cfg.var_floor_frac * std::max(hi - lo, 1e-12);
    var_floor[j] = f * f;
  }

  Matrix mu = init_centroids;
  Matrix var(k, p, 1.0);
  std::vector<double> weight(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t cnt = 0;
    std::vector<double> acc(p, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (static_cast<std::size_t>(init_assignments[i]) != c) continue;
      ++cnt;
      for (std::size_t j = 0; j < p; ++j) {
        const double d = points(i, j) - mu(c, j);
        acc[j] += d * d;
      }
    }
    weight[c] = std::max(static_cast<double>(cnt) / static_cast<double>(m), 1e-6);
    for (std::size_t j = 0; j < p; ++j) {
      var(c, j) = std::max(cnt > 1 ? acc[j] / static_cast<double>(cnt) : 1.0, var_floor[j]);
    }
  }

  Matrix resp(m, k);
  std::vector<int> hard(m, 0);
  double prev_ll = -std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    // E-step
    double ll_total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        double ll = std::log(weight[c]);
        for (std::size_t j = 0; j < p; ++j) {
          const double d = points(i, j) - mu(c, j);
          ll -= 0.5 * (d * d / var(c, j) + std::log(2.0 * std::numbers::pi * var(c, j)));
        }
        resp(i, c) = ll;
        if (ll > best) {
          best = ll;
          hard[i] = static_cast<int>(c);
        }
      }
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) sum += std::exp(resp(i, c) - best);
      const double lse = best + std::log(sum);
      ll_total += lse;
      for (std::size_t c = 0; c < k; ++c) resp(i, c) = std::exp(resp(i, c) - lse);
    }
    if (it > 0 && std::abs(ll_total - prev_ll) < cfg.rel_tol * std::abs(ll_total)) break;
    prev_ll = ll_total;

    // M-step
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0;
      for (std::size_t i = 0; i < m; ++i) nk += resp(i, c);
      nk = std::max(nk, 1e-12);
      weight[c] = nk / static_cast<double>(m);
      for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += resp(i, c) * points(i, j);
        mu(c, j) = s / nk;
      }
      for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double d = points(i, j) - mu(c, j);
          s += resp(i, c) * d * d;
        }
        var(c, j) = std::max(s / nk, var_floor[j]);
      }
    }
  }
  return GmmRefineResult{std::move(mu), std::move(hard), it};
}

RuleBase build_rulebase(const Dataset& d, const std::vector<int>& rules_per_class,
                        std::uint64_t seed, const RuleBaseConfig& cfg) {
  if (rules_per_class.size() != static_cast<std::size_t>(d.class_count)) {
    throw std::runtime_error("rules_per_class length must equal the class count");
  }
  const std::size_t p = d.feature_count();

  std::vector<double> floor(p);
  for (std::size_t j = 0; j < p; ++j) {
    double lo = d.features(0, j), hi = d.features(0, j);
    for (std::size_t i = 1; i < d.size(); ++i) {
      lo = std::min(lo, d.features(i, j));
      hi = std::max(hi, d.features(i, j));
    }
    floor[j] = cfg.spread_floor_frac * (hi - lo);
  }

  RuleBase rb;
  rb.rules_per_class = rules_per_class;
  for (int k = 1; k <= d.class_count; ++k) {
    const int nk = rules_per_class[static_cast<std::size_t>(k - 1)];
    const auto idx = d.class_indices(k);
    if (static_cast<std::size_t>(nk) > idx.size()) {
      throw std::runtime_error("class " + std::to_string(k) + " has " +
                               std::to_string(idx.size()) + " instances, fewer than the " +
                               std::to_string(nk) + " requested rules");
    }
    Matrix pts(idx.size(), p);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < p; ++j) pts(i, j) = d.features(idx[i], j);
    }
    auto km = kmeans(pts, nk, seed + 7919ull * static_cast<std::uint64_t>(k - 1));
    Matrix centers = std::move(km.centroids);
    std::vector<int> assign = std::move(km.assignments);
    if (cfg.gmm_refine && nk > 1) {
      auto refined = refine_clusters_gmm(pts, centers, assign, cfg.gmm);
      centers = std::move(refined.means);
      assign = std::move(refined.assignments);
    }
    for (int l = 0; l < nk; ++l) {
      Rule rule;
      rule.class_index = k;
      rule.antecedents.resize(p);
      std::size_t cnt = 0;
      std::vector<double> mean(p, 0.0), ss(p, 0.0);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (assign[i] != l) continue;
        ++cnt;
        for (std::size_t j = 0; j < p; ++j) mean[j] += pts(i, j);
      }
      if (cnt > 0) {
        for (std::size_t j = 0; j < p; ++j) mean[j] /= static_cast<double>(cnt);
      }
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (assign[i] != l) continue;
        for (std::size_t j = 0; j < p; ++j) {
          const double dd = pts(i, j) - mean[j];
          ss[j] += dd * dd;
        }
      }
      for (std::size_t j = 0; j < p; ++j) {
        const double sd = cnt > 1 ? std::sqrt(ss[j] / static_cast<double>(cnt - 1)) : 0.0;
        rule.antecedents[j].center = centers(static_cast<std::size_t>(l), j);
        rule.antecedents[j].spread = std::max(sd, floor[j]);
        if (!(rule.antecedents[j].spread > 0.0)) {
          throw std::runtime_error("zero spread for feature " + std::to_string(j + 1) +
                                   " (constant feature with zero floor)");
        }
      }
      rb.rules.push_back(std::move(rule));
    }
  }
  return rb;
}

double membership(double x, const FuzzySet& fs) { return std::exp(log_membership(x, fs)); }

double log_membership(double x, const FuzzySet& fs) {
  const double z = (x - fs.center) / fs.spread;
  return std::max(-0.5 * z * z, kLogFloor);
}

double log_firing_strength(const Rule& rule, std::span<const double> x,
                           std::span<const double> m_row) {
  double s = 0.0;
  for (std::size_t j = 0; j < rule.antecedents.size(); ++j) {
    s += m_row[j] * log_membership(x[j], rule.antecedents[j]);
  }
  return s;
}

double firing_strength(const Rule& rule, std::span<const double> x,
                       std::span<const double> m_row) {
  return std::exp(log_firing_strength(rule, x, m_row));
}

ClassifyResult classify(const RuleBase& rb, const ModulatorBank& bank, std::span<const double> x) {
  if (x.size() != rb.feature_count()) throw std::runtime_error("classify: feature count mismatch");
  bank.check_compatible(rb);
  const int c = rb.class_count();
  ClassifyResult res;
  res.outputs.assign(static_cast<std::size_t>(c), 0.0);
  res.winning_rule.assign(static_cast<std::size_t>(c), -1);
  for (int k = 1; k <= c; ++k) {
    const auto [begin, end] = rb.class_range(k);
    double best = -std::numeric_limits<double>::infinity();
    int best_rule = -1;
    for (int r = begin; r < end; ++r) {
      const auto m_row = bank.modulator_row(k, r - begin + 1);
      const double lf =
          log_firing_strength(rb.rules[static_cast<std::size_t>(r)], x, m_row);
      if (lf > best) {  // strict: ties stay with the lowest rule index
        best = lf;
        best_rule = r;
      }
    }
    res.outputs[static_cast<std::size_t>(k - 1)] = std::exp(best);
    res.winning_rule[static_cast<std::size_t>(k - 1)] = best_rule;
  }
  return res;
}

BatchClassify classify_dataset(const RuleBase& rb, const ModulatorBank& bank, const Dataset& d) {
  bank.check_compatible(rb);
  const std::size_t n = d.size();
  const auto c = static_cast<std::size_t>(rb.class_count());
  BatchClassify out;
  out.outputs = Matrix(n, c);
  out.winning_rule.assign(n * c, -1);
  // modulator rows vary per rule, not per sample; hoist them out of the loop
  std::vector<std::vector<double>> m_rows(static_cast<std::size_t>(rb.rule_count()));
  for (int k = 1; k <= rb.class_count(); ++k) {
    const auto [begin, end] = rb.class_range(k);
    for (int r = begin; r < end; ++r) {
      m_rows[static_cast<std::size_t>(r)] = bank.modulator_row(k, r - begin + 1);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = d.features.row(i);
    for (int k = 1; k <= rb.class_count(); ++k) {
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
      out.outputs(i, static_cast<std::size_t>(k - 1)) = std::exp(best);
      out.winning_rule[i * c + static_cast<std::size_t>(k - 1)] = best_rule;
    }
  }
  return out;
}

Prediction predict_label(std::span<const double> outputs) {
  if (outputs.size() < 2) throw std::runtime_error("predict_label needs at least 2 classes");
  std::size_t best = 0;
  bool tie = false;
  for (std::size_t k = 1; k < outputs.size(); ++k) {
    if (outputs[k] > outputs[best]) {
      best = k;
      tie = false;
    } else if (outputs[k] == outputs[best]) {
      tie = true;
    }
  }
  return Prediction{static_cast<int>(best) + 1, tie};
}

std::string RuleBase::to_json_string() const {
  nlohmann::ordered_json j;
  j["rules_per_class"] = rules_per_class;
  auto& rules_j = j["rules"] = nlohmann::ordered_json::array();
  for (const auto& r : rules) {
    nlohmann::ordered_json rj;
    rj["class"] = r.class_index;
    std::vector<double> centers, spreads;
    for (const auto& fs : r.antecedents) {
      centers.push_back(fs.center);
      spreads.push_back(fs.spread);
    }
    rj["centers"] = centers;
    rj["spreads"] = spreads;
    rules_j.push_back(std::move(rj));
  }
  return j.dump(2);
}

RuleBase RuleBase::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RuleBase rb;
  rb.rules_per_class = j.at("rules_per_class").get<std::vector<int>>();
  for (const auto& rj : j.at("rules")) {
    Rule r;
    r.class_index = rj.at("class").get<int>();
    const auto centers = rj.at("centers").get<std::vector<double>>();
    const auto spreads = rj.at("spreads").get<std::vector<double>>();
    if (centers.size() != spreads.size()) throw std::runtime_error("rule centers/spreads length mismatch");
    r.antecedents.resize(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
      r.antecedents[i] = FuzzySet{centers[i], spreads[i]};
    }
    rb.rules.push_back(std::move(r));
  }
  int total = 0;
  for (int n : rb.rules_per_class) total += n;
  if (total != rb.rule_count()) throw std::runtime_error("rule counts do not sum to rule list size");
  return rb;
}

}  // namespace frbc
