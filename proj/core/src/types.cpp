#include "krafty/types.hpp"

#include <algorithm>
#include <cmath>

namespace krafty {

Assignment::Assignment(std::vector<int> labels, int k)
    : labels_(std::move(labels)), k_(k) {
  if (labels_.empty()) throw input_error("assignment: no items");
  if (k_ < 1) throw input_error("assignment: cluster count must be positive");
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(k_), 0);
  for (int label : labels_) {
    if (label < 0 || label >= k_) {
      throw input_error("assignment: label " + std::to_string(label) +
                        " outside [0, " + std::to_string(k_) + ")");
    }
    ++sizes[static_cast<std::size_t>(label)];
  }
  for (int c = 0; c < k_; ++c) {
    if (sizes[static_cast<std::size_t>(c)] == 0) {
      throw input_error("assignment: cluster " + std::to_string(c) + " is empty");
    }
  }
}

Assignment Assignment::from_labels(std::vector<int> labels) {
  int k = 0;
  for (int label : labels) k = std::max(k, label + 1);
  return Assignment(std::move(labels), k);
}

std::vector<std::int64_t> Assignment::cluster_sizes() const {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(k_), 0);
  for (int label : labels_) ++sizes[static_cast<std::size_t>(label)];
  return sizes;
}

Matrix Assignment::indicator() const {
  Matrix z = Matrix::Zero(n(), k_);
  for (int i = 0; i < n(); ++i) z(i, labels_[static_cast<std::size_t>(i)]) = 1.0;
  return z;
}

Embedding Embedding::from_matrix(Matrix m) {
  if (m.rows() < 1 || m.cols() < 1) throw input_error("embedding: empty matrix");
  if (!m.allFinite()) throw input_error("embedding: non-finite entries");
  Matrix gram = m.transpose() * m;
  gram.diagonal().array() -= 1.0;
  Embedding e;
  e.residual = gram.norm();
  e.matrix = std::move(m);
  return e;
}

Matrix SelectorMatrix::to_matrix() const {
  Matrix h = Matrix::Zero(source_cols, static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    h(kept[j], static_cast<Index>(j)) = 1.0;
  }
  return h;
}

}  // namespace krafty
