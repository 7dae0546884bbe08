#include "krafty/linalg.hpp"

#include "krafty/rng.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace krafty {

namespace {

constexpr Index kFullSvdMaxDim = 512;
constexpr Index kOversample = 8;
constexpr int kPowerIterations = 4;
constexpr double kZeroColumnThreshold = 1e-12;

void apply_sign_convention(Matrix& u, Matrix& v) {
  for (Index j = 0; j < u.cols(); ++j) {
    Index arg = 0;
    double best = std::abs(u(0, j));
    for (Index i = 1; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (u(arg, j) < 0.0) {
      u.col(j) = -u.col(j);
      if (j < v.cols()) v.col(j) = -v.col(j);
    }
  }
}

Matrix thin_q(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), std::min(y.rows(), y.cols()));
}

// Randomized range finder with power iterations, then an exact SVD of the
// projected matrix. The Gaussian test matrix uses a fixed seed so repeated
// calls on the same input are bit-identical.
void randomized_svd(const Matrix& m, Index k, Matrix& u, Vector& s, Matrix& v) {
  const Index sample = std::min(k + kOversample, std::min(m.rows(), m.cols()));
  Rng rng(Rng::derive(0x5D58B5D5ULL, static_cast<std::uint64_t>(m.rows() * 131071 + m.cols())));
  Matrix omega(m.cols(), sample);
  for (Index i = 0; i < omega.rows(); ++i) {
    for (Index j = 0; j < omega.cols(); ++j) omega(i, j) = rng.normal();
  }
  Matrix q = thin_q(m * omega);
  for (int it = 0; it < kPowerIterations; ++it) {
    q = thin_q(m.transpose() * q);
    q = thin_q(m * q);
  }
  Matrix b = q.transpose() * m;  // sample x cols
  Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw numeric_error("svd_k: randomized projection SVD failed after " +
                        std::to_string(kPowerIterations) + " power iterations");
  }
  u = q * svd.matrixU().leftCols(k);
  v = svd.matrixV().leftCols(k);
  s = svd.singularValues().head(k);
}

}  // namespace

Matrix tkr(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw input_error("tkr: row counts differ (" + std::to_string(a.rows()) +
                      " vs " + std::to_string(b.rows()) + ")");
  }
  if (a.rows() < 1 || a.cols() < 1 || b.cols() < 1) {
    throw input_error("tkr: inputs must be non-empty");
  }
  const Index n = a.rows();
  const Index m = a.cols();
  const Index q = b.cols();
  Matrix out(n, m * q);
  for (Index i = 0; i < n; ++i) {
    for (Index ja = 0; ja < m; ++ja) {
      out.row(i).segment(ja * q, q) = a(i, ja) * b.row(i);
    }
  }
  return out;
}

Matrix tkr_multi(const std::vector<Matrix>& views) {
  if (views.size() < 2) throw input_error("tkr_multi: at least two matrices required");
  Matrix acc = tkr(views[0], views[1]);
  for (std::size_t v = 2; v < views.size(); ++v) acc = tkr(acc, views[v]);
  return acc;
}

SvdResult svd_k(const Matrix& m, Index k) {
  if (m.rows() < 1 || m.cols() < 1) throw input_error("svd_k: empty matrix");
  const Index min_dim = std::min(m.rows(), m.cols());
  if (k < 1 || k > min_dim) {
    throw input_error("svd_k: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(min_dim) + "]");
  }
  Matrix u;
  Matrix v;
  Vector s;
  if (min_dim <= kFullSvdMaxDim) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
      throw numeric_error("svd_k: decomposition did not converge");
    }
    u = svd.matrixU().leftCols(k);
    v = svd.matrixV().leftCols(k);
    s = svd.singularValues().head(k);
  } else {
    randomized_svd(m, k, u, s, v);
  }
  apply_sign_convention(u, v);
  SvdResult out;
  out.left = Embedding::from_matrix(std::move(u));
  out.values.assign(s.data(), s.data() + k);
  for (double& value : out.values) value = std::max(value, 0.0);
  out.right = std::move(v);
  return out;
}

Embedding embedding_from_assignment(const Assignment& z) {
  const auto sizes = z.cluster_sizes();
  std::vector<double> scale(sizes.size());
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    scale[c] = 1.0 / std::sqrt(static_cast<double>(sizes[c]));
  }
  Matrix u = Matrix::Zero(z.n(), z.k());
  for (int i = 0; i < z.n(); ++i) {
    u(i, z[i]) = scale[static_cast<std::size_t>(z[i])];
  }
  return Embedding::from_matrix(std::move(u));
}

SelectorMatrix derive_selector(const Matrix& m) {
  SelectorMatrix sel;
  sel.source_cols = m.cols();
  for (Index j = 0; j < m.cols(); ++j) {
    if (m.col(j).cwiseAbs().maxCoeff() > kZeroColumnThreshold) sel.kept.push_back(j);
  }
  if (sel.kept.empty()) throw input_error("derive_selector: every column is zero");
  return sel;
}

Embedding regularize(const Embedding& u, double delta, Index k) {
  if (!(delta > 0.0)) throw input_error("regularize: delta must be positive");
  if (k < 1 || k > u.matrix.cols()) {
    throw input_error("regularize: k outside [1, " + std::to_string(u.matrix.cols()) + "]");
  }
  Matrix clipped = u.matrix;
  for (Index i = 0; i < clipped.rows(); ++i) {
    const double norm = clipped.row(i).norm();
    if (norm > delta) clipped.row(i) *= delta / norm;
  }
  return svd_k(clipped, k).left;
}

ProcrustesResult procrustes_align(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw input_error("procrustes_align: shapes differ");
  }
  Matrix cross = a.transpose() * b;
  Eigen::BDCSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw numeric_error("procrustes_align: SVD did not converge");
  }
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  const double bottom = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
  ProcrustesResult out;
  out.w = svd.matrixU() * svd.matrixV().transpose();
  out.degenerate = bottom <= 1e-12 * std::max(top, 1e-300);
  return out;
}

}  // namespace krafty
