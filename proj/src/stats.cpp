#include "frbc/stats.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace frbc {

namespace {
constexpr double kVarEps = 1e-24;
}

PearsonResult pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::runtime_error("pearson: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw std::runtime_error("pearson: need at least 2 values");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa < kVarEps || sbb < kVarEps) return {0.0, true};
  return {sab / std::sqrt(saa * sbb), false};
}

namespace {

Matrix rho_matrix(const Matrix& x, const std::vector<std::size_t>& rows) {
  const std::size_t p = x.cols();
  std::vector<std::vector<double>> cols(p, std::vector<double>(rows.size()));
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) cols[j][i] = x(rows[i], j);
  }
  Matrix rho(p, p, 0.0);
  std::vector<bool> degen(p, false);
  for (std::size_t j = 0; j < p; ++j) {
    const auto r = pearson(cols[j], cols[j]);
    degen[j] = r.degenerate;
    rho(j, j) = r.degenerate ? 0.0 : 1.0;
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t m = j + 1; m < p; ++m) {
      double v = 0.0;
      if (!degen[j] && !degen[m]) v = pearson(cols[j], cols[m]).value;
      rho(j, m) = v;
      rho(m, j) = v;
    }
  }
  return rho;
}

}  // namespace

CorrelationSet correlation_set(const Dataset& d) {
  CorrelationSet out;
  std::vector<std::size_t> all(d.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  out.global_rho = rho_matrix(d.features, all);
  for (int k = 1; k <= d.class_count; ++k) {
    const auto idx = d.class_indices(k);
    if (idx.size() < 2) {
      throw std::runtime_error("class " + std::to_string(k) +
                               " has fewer than 2 instances; cannot compute correlations");
    }
    out.class_rho.push_back(rho_matrix(d.features, idx));
  }
  return out;
}

void dump_correlations_csv(const CorrelationSet& corr,
                           const std::vector<std::string>& feature_names,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto emit = [&](const Matrix& m, const std::string& tag) {
    out << "# " << tag << '\n';
    for (std::size_t j = 0; j < m.rows(); ++j) {
      out << feature_names[j];
      for (std::size_t c = 0; c < m.cols(); ++c) out << ',' << m(j, c);
      out << '\n';
    }
  };
  emit(corr.global_rho, "global");
  for (std::size_t k = 0; k < corr.class_rho.size(); ++k) {
    emit(corr.class_rho[k], "class " + std::to_string(k + 1));
  }
}

}  // namespace frbc
