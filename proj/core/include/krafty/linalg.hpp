#pragma once

#include "krafty/types.hpp"

#include <vector>

namespace krafty {

/// Transposed Khatri-Rao product: row i of the result is the Kronecker
/// product of row i of a with row i of b, so the output is
/// a.rows() x (a.cols() * b.cols()) with blocks ordered
/// [a(i,0)*b(i,:) | a(i,1)*b(i,:) | ...].
Matrix tkr(const Matrix& a, const Matrix& b);

/// Left-associated fold of tkr over two or more matrices with equal row
/// counts. Column count is the product of the per-matrix column counts.
Matrix tkr_multi(const std::vector<Matrix>& views);

/// Top-k singular triplets of m, values descending. Deterministic sign
/// convention: the largest-magnitude entry of each left singular vector is
/// positive (lowest index wins ties). Uses a full decomposition when
/// min(rows, cols) <= 512 and randomized subspace iteration above that.
SvdResult svd_k(const Matrix& m, Index k);

/// U = Z D^{-1/2}: column k is the indicator of cluster k scaled by
/// 1/sqrt(n_k). Exactly column-orthonormal by construction.
Embedding embedding_from_assignment(const Assignment& z);

/// Indices of the nonzero columns of m (max-abs entry above 1e-12).
/// Throws input_error if every column is zero.
SelectorMatrix derive_selector(const Matrix& m);

/// Row-norm clipping at delta followed by re-extraction of the top-k left
/// singular vectors: rows with norm above delta are rescaled to norm delta,
/// rows at or below it are untouched.
Embedding regularize(const Embedding& u, double delta, Index k);

struct ProcrustesResult {
  Matrix w;         // orthogonal k x k
  bool degenerate;  // a^T b was (numerically) rank deficient
};

/// Orthogonal W = W1 W2^T from the SVD of a^T b, minimizing ||a W - b||_F
/// over orthogonal matrices. Always returns a valid orthogonal matrix; the
/// degenerate flag marks rank-deficient a^T b.
ProcrustesResult procrustes_align(const Matrix& a, const Matrix& b);

}  // namespace krafty
