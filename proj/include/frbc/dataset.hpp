#ifndef FRBC_DATASET_HPP
#define FRBC_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "frbc/matrix.hpp"

namespace frbc {

// Labeled numeric dataset. Labels are class indices in 1..C; targets is the
// matching one-hot matrix. Instances are immutable after construction.
struct Dataset {
  Matrix features;                         // n x P
  std::vector<int> labels;                 // values in 1..C
  Matrix targets;                          // n x C, one-hot rows
  std::vector<std::string> feature_names;  // length P
  int class_count = 0;

  std::size_t size() const { return features.rows(); }
  std::size_t feature_count() const { return features.cols(); }

  // Indices of the instances belonging to class k (1-based).
  std::vector<std::size_t> class_indices(int k) const;

  // Throws std::runtime_error on any invariant violation.
  void validate() const;

  // Builds targets from labels, infers class_count, validates.
  static Dataset from_parts(Matrix features, std::vector<int> labels,
                            std::vector<std::string> feature_names);
};

// Seeded generators for the three synthetic benchmark datasets. Draws are
// made block by block (class block ascending, then feature column ascending,
// rows ascending within a column), so a seed pins the whole realization.
Dataset generate_synthetic1(std::uint64_t seed);
Dataset generate_synthetic2(std::uint64_t seed);  // shares Synthetic1's columns 1..6 for the same seed
Dataset generate_synthetic3(std::uint64_t seed);

// Label column selected either by 0-based position or by header name.
using LabelColumn = std::variant<std::size_t, std::string>;

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 bool has_header);
void save_csv(const Dataset& d, const std::filesystem::path& path);

struct HoldoutSplit {
  Dataset train;
  Dataset test;
};

// Seeded stratified split; each side keeps at least one instance per class.
// fraction is the share held out for testing, in (0,1).
HoldoutSplit split_holdout(const Dataset& d, double fraction, std::uint64_t seed);

}  // namespace frbc

#endif
