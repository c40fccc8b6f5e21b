#include "frbc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "frbc/rng.hpp"

namespace frbc {
namespace {

std::string shortest_repr(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

Matrix one_hot(const std::vector<int>& labels, int class_count) {
  Matrix t(labels.size(), static_cast<std::size_t>(class_count), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    t(i, static_cast<std::size_t>(labels[i] - 1)) = 1.0;
  }
  return t;
}

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
  return names;
}

// Describes one block of cells sharing a distribution: a class's rows on one column.
struct CellDist {
  bool normal;
  double a, b;  // normal: mean, stddev; uniform: lo, hi
};

void fill_block(Matrix& x, Rng& rng, std::size_t r0, std::size_t r1, std::size_t col,
                const CellDist& dist) {
  for (std::size_t r = r0; r < r1; ++r) {
    x(r, col) = dist.normal ? rng.normal(dist.a, dist.b) : rng.uniform(dist.a, dist.b);
  }
}

constexpr CellDist kUnif{false, -10.0, 10.0};

}  // namespace

std::vector<std::size_t> Dataset::class_indices(int k) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == k) idx.push_back(i);
  }
  return idx;
}

void Dataset::validate() const {
  const std::size_t n = features.rows();
  const std::size_t p = features.cols();
  if (n < 1 || p < 1) throw std::runtime_error("dataset must have at least one row and one feature");
  if (class_count < 2) throw std::runtime_error("dataset needs at least 2 classes");
  if (labels.size() != n) throw std::runtime_error("label count does not match row count");
  if (feature_names.size() != p) throw std::runtime_error("feature name count does not match columns");
  if (targets.rows() != n || targets.cols() != static_cast<std::size_t>(class_count)) {
    throw std::runtime_error("targets shape does not match dataset");
  }
  std::vector<std::size_t> per_class(static_cast<std::size_t>(class_count), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 1 || y > class_count) {
      throw std::runtime_error("label " + std::to_string(y) + " at row " + std::to_string(i + 1) +
                               " outside 1.." + std::to_string(class_count));
    }
    ++per_class[static_cast<std::size_t>(y - 1)];
    for (int k = 0; k < class_count; ++k) {
      const double want = (k + 1 == y) ? 1.0 : 0.0;
      if (targets(i, static_cast<std::size_t>(k)) != want) {
        throw std::runtime_error("targets row " + std::to_string(i + 1) + " is not one-hot for its label");
      }
    }
    for (std::size_t j = 0; j < p; ++j) {
      if (!std::isfinite(features(i, j))) {
        throw std::runtime_error("non-finite feature value at row " + std::to_string(i + 1) +
                                 ", column " + std::to_string(j + 1));
      }
    }
  }
  for (int k = 0; k < class_count; ++k) {
    if (per_class[static_cast<std::size_t>(k)] == 0) {
      throw std::runtime_error("class " + std::to_string(k + 1) + " has no instances");
    }
  }
}

Dataset Dataset::from_parts(Matrix features, std::vector<int> labels,
                            std::vector<std::string> feature_names) {
  Dataset d;
  d.class_count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.feature_names = std::move(feature_names);
  if (d.feature_names.empty()) d.feature_names = default_names(d.features.cols());
  d.targets = one_hot(d.labels, d.class_count);
  d.validate();
  return d;
}

Dataset generate_synthetic1(std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(300, 6);
  const CellDist tight{true, 0.0, 0.5};
  // class block k owns features (2k, 2k+1); everything else is uniform noise
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t r0 = 100 * k, r1 = 100 * (k + 1);
    for (std::size_t j = 0; j < 6; ++j) {
      fill_block(x, rng, r0, r1, j, (j == 2 * k || j == 2 * k + 1) ? tight : kUnif);
    }
  }
  std::vector<int> labels(300);
  for (std::size_t i = 0; i < 300; ++i) labels[i] = static_cast<int>(i / 100) + 1;
  return Dataset::from_parts(std::move(x), std::move(labels), default_names(6));
}

Dataset generate_synthetic2(std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(300, 8);
  const CellDist tight{true, 0.0, 0.5};
  // identical draw order to Synthetic1, so columns 1..6 share its realization
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t r0 = 100 * k, r1 = 100 * (k + 1);
    for (std::size_t j = 0; j < 6; ++j) {
      fill_block(x, rng, r0, r1, j, (j == 2 * k || j == 2 * k + 1) ? tight : kUnif);
    }
  }
  // appended columns: noisy copies of x1, x2 for class 1, uniform elsewhere
  for (std::size_t r = 0; r < 100; ++r) x(r, 6) = x(r, 0) + rng.normal(0.0, 0.1);
  for (std::size_t r = 0; r < 100; ++r) x(r, 7) = x(r, 1) + rng.normal(0.0, 0.1);
  for (std::size_t k = 1; k < 3; ++k) {
    const std::size_t r0 = 100 * k, r1 = 100 * (k + 1);
    fill_block(x, rng, r0, r1, 6, kUnif);
    fill_block(x, rng, r0, r1, 7, kUnif);
  }
  std::vector<int> labels(300);
  for (std::size_t i = 0; i < 300; ++i) labels[i] = static_cast<int>(i / 100) + 1;
  return Dataset::from_parts(std::move(x), std::move(labels), default_names(8));
}

Dataset generate_synthetic3(std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(400, 4);
  struct BlockSpec {
    std::size_t r0, r1;
    CellDist cols[4];
  };
  const CellDist n0{true, 0.0, 0.5}, nm5{true, -5.0, 0.5}, n5{true, 5.0, 0.5};
  const BlockSpec blocks[4] = {
      {0, 100, {n0, nm5, kUnif, kUnif}},
      {100, 200, {kUnif, kUnif, n0, n0}},
      {200, 300, {kUnif, n0, nm5, kUnif}},
      {300, 400, {n5, kUnif, kUnif, nm5}},
  };
  for (const auto& b : blocks) {
    for (std::size_t j = 0; j < 4; ++j) fill_block(x, rng, b.r0, b.r1, j, b.cols[j]);
  }
  std::vector<int> labels(400);
  for (std::size_t i = 0; i < 400; ++i) labels[i] = i < 200 ? 1 : 2;
  return Dataset::from_parts(std::move(x), std::move(labels), default_names(4));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_int(const std::string& s, long& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
    rows.push_back(split_line(line));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + " is empty");

  std::vector<std::string> header;
  if (has_header) {
    header = rows.front();
    rows.erase(rows.begin());
    if (rows.empty()) throw std::runtime_error(path.string() + " has a header but no data rows");
  }
  const std::size_t ncols = has_header ? header.size() : rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != ncols) {
      throw std::runtime_error("row " + std::to_string(i + 1) + " has " +
                               std::to_string(rows[i].size()) + " columns, expected " +
                               std::to_string(ncols));
    }
  }

  std::size_t label_idx;
  if (std::holds_alternative<std::size_t>(label_column)) {
    label_idx = std::get<std::size_t>(label_column);
    if (label_idx >= ncols) throw std::runtime_error("label column index out of range");
  } else {
    const std::string& name = std::get<std::string>(label_column);
    if (!has_header) throw std::runtime_error("label column given by name but file has no header");
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("no column named '" + name + "' in header");
    label_idx = static_cast<std::size_t>(it - header.begin());
  }

  const std::size_t n = rows.size();
  const std::size_t p = ncols - 1;
  if (p < 1) throw std::runtime_error("file has no feature columns");

  std::vector<std::string> names;
  for (std::size_t c = 0; c < ncols; ++c) {
    if (c == label_idx) continue;
    names.push_back(has_header ? trim(header[c]) : "x" + std::to_string(names.size() + 1));
  }

  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t jj = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c == label_idx) continue;
      double v;
      if (!parse_double(rows[i][c], v)) {
        throw std::runtime_error("non-numeric feature cell at row " + std::to_string(i + 1) +
                                 ", column " + std::to_string(c + 1) + " ('" + trim(rows[i][c]) +
                                 "')");
      }
      x(i, jj++) = v;
    }
  }

  // Labels: integers are taken as-is and must cover 1..C; anything else is
  // mapped to 1..C in first-appearance order.
  std::vector<int> labels(n);
  bool all_int = true;
  for (std::size_t i = 0; i < n && all_int; ++i) {
    long v;
    all_int = parse_int(rows[i][label_idx], v);
  }
  if (all_int) {
    int maxv = 0;
    for (std::size_t i = 0; i < n; ++i) {
      long v;
      parse_int(rows[i][label_idx], v);
      if (v < 1) {
        throw std::runtime_error("integer label " + std::to_string(v) + " at row " +
                                 std::to_string(i + 1) + " is not in 1..C");
      }
      labels[i] = static_cast<int>(v);
      maxv = std::max(maxv, labels[i]);
    }
    std::vector<bool> seen(static_cast<std::size_t>(maxv), false);
    for (int v : labels) seen[static_cast<std::size_t>(v - 1)] = true;
    for (int k = 0; k < maxv; ++k) {
      if (!seen[static_cast<std::size_t>(k)]) {
        throw std::runtime_error("class " + std::to_string(k + 1) +
                                 " has no instances (labels must cover 1..C)");
      }
    }
  } else {
    std::vector<std::string> order;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string key = trim(rows[i][label_idx]);
      auto it = std::find(order.begin(), order.end(), key);
      if (it == order.end()) {
        order.push_back(key);
        it = order.end() - 1;
      }
      labels[i] = static_cast<int>(it - order.begin()) + 1;
    }
  }

  return Dataset::from_parts(std::move(x), std::move(labels), std::move(names));
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t j = 0; j < d.feature_count(); ++j) out << d.feature_names[j] << ',';
  out << "y\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.feature_count(); ++j) {
      out << shortest_repr(d.features(i, j)) << ',';
    }
    out << d.labels[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

HoldoutSplit split_holdout(const Dataset& d, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::runtime_error("holdout fraction must be in (0,1)");
  Rng rng(seed);
  std::vector<std::size_t> test_rows;
  std::vector<bool> is_test(d.size(), false);
  for (int k = 1; k <= d.class_count; ++k) {
    auto idx = d.class_indices(k);
    // Fisher-Yates with the shared stream
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[rng.index(i)]);
    }
    if (idx.size() < 2) {
      throw std::runtime_error("holdout needs at least 2 instances of class " + std::to_string(k));
    }
    auto want = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size())));
    want = std::clamp<std::size_t>(want, 1, idx.size() - 1);  // both sides keep every class
    for (std::size_t i = 0; i < want; ++i) is_test[idx[i]] = true;
  }
  auto take = [&](bool test_side) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (is_test[i] == test_side) keep.push_back(i);
    }
    Matrix x(keep.size(), d.feature_count());
    std::vector<int> labels(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      for (std::size_t j = 0; j < d.feature_count(); ++j) x(i, j) = d.features(keep[i], j);
      labels[i] = d.labels[keep[i]];
    }
    return Dataset::from_parts(std::move(x), std::move(labels), d.feature_names);
  };
  return HoldoutSplit{take(false), take(true)};
}

}  // namespace frbc
