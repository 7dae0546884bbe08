#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace krafty {

/// Dense real matrix, row-major storage throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Invalid caller input (bad dimensions, malformed files, out-of-range
/// parameters). The CLI maps this to exit code 2.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure (non-convergence and the like). CLI exit code 3.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hard partition of n items into k clusters, stored as zero-based labels.
/// Every cluster index in [0, k) is occupied by at least one item, so the
/// matrix form always lies in the set of clustering matrices.
class Assignment {
 public:
  Assignment(std::vector<int> labels, int k);

  /// Builds an Assignment with k inferred as max(label) + 1.
  static Assignment from_labels(std::vector<int> labels);

  int n() const { return static_cast<int>(labels_.size()); }
  int k() const { return k_; }
  int operator[](int i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& labels() const { return labels_; }

  std::vector<std::int64_t> cluster_sizes() const;

  /// n x k binary clustering matrix (one 1 per row).
  Matrix indicator() const;

  bool operator==(const Assignment& other) const {
    return k_ == other.k_ && labels_ == other.labels_;
  }

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

/// An n x k matrix intended to have (near-)orthonormal columns, together
/// with its measured orthonormality residual ||M^T M - I||_F.
struct Embedding {
  Matrix matrix;
  double residual = 0.0;

  static Embedding from_matrix(Matrix m);

  Index n() const { return matrix.rows(); }
  Index k() const { return matrix.cols(); }
};

/// Identity-column selector: records which columns of a source matrix are
/// retained (strictly increasing indices).
struct SelectorMatrix {
  Index source_cols = 0;
  std::vector<Index> kept;

  /// The selector as a dense source_cols x |kept| 0/1 matrix.
  Matrix to_matrix() const;
};

/// Truncated SVD output: left singular vectors, singular values in
/// descending order, right singular vectors (one column each per value).
struct SvdResult {
  Embedding left;
  std::vector<double> values;
  Matrix right;
};

}  // namespace krafty
