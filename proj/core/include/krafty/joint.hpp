#pragma once

#include "krafty/clustering.hpp"
#include "krafty/selectk.hpp"
#include "krafty/types.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace krafty {

/// One view of the shared item set: either a hard clustering or a spectral
/// embedding. Embedding views are checked against `max_residual` (pass a
/// larger bound for deliberately perturbed or scaled inputs).
class ViewInput {
 public:
  static ViewInput from_assignment(Assignment z);
  static ViewInput from_embedding(Embedding e, double max_residual = 1e-6);

  int n() const;
  /// Number of view clusters / embedding columns.
  Index cols() const;
  bool is_assignment() const { return std::holds_alternative<Assignment>(v_); }

  const Assignment& assignment() const { return std::get<Assignment>(v_); }
  const Embedding& embedding() const { return std::get<Embedding>(v_); }

  /// The matrix this view contributes to the joint construction: the 0/1
  /// clustering matrix for assignment views, the embedding matrix otherwise.
  Matrix contribution() const;

 private:
  explicit ViewInput(Assignment z) : v_(std::move(z)) {}
  explicit ViewInput(Embedding e) : v_(std::move(e)) {}
  std::variant<Assignment, Embedding> v_;
};

enum class Method { krafty, mase };
enum class FinalClusterer { hc, kmeans };
enum class KSource { given, estimated };

struct JointOptions {
  std::optional<int> k;
  FinalClusterer clusterer = FinalClusterer::hc;
  /// Elbow order used when k is estimated (the scree's first elbow often
  /// marks a single dominant dimension, so the default is the second).
  int which_elbow = 2;
  std::uint64_t seed = 0;
  int kmeans_restarts = 10;
  int kmeans_max_iter = 100;
  /// Row-norm regularization of the first embedding view with
  /// delta = regularize_scale * sqrt(K_v / n) before the joint step.
  bool regularize_first_view = false;
  double regularize_scale = 2.0;
};

struct JointResult {
  Assignment labels;
  Embedding embedding;  // n x k_used left singular vectors of the joint matrix
  Spectrum spectrum;    // all min-dimension singular values of the joint matrix
  int k_used = 0;
  KSource k_source = KSource::given;
  Method method = Method::krafty;
  std::optional<Dendrogram> dendrogram;  // present when the final clusterer is hc
  /// Requested k exceeded the available rank and was reduced to it.
  bool k_capped = false;
};

/// The transposed Khatri-Rao joint matrix: the fold of tkr over the view
/// contributions (n x prod K_v).
Matrix joint_matrix_krafty(const std::vector<ViewInput>& views);

/// Joint clustering through the transposed Khatri-Rao matrix: build the
/// joint matrix, take its top-k left singular vectors (k estimated from the
/// full spectrum when absent), and cluster their rows.
JointResult krafty(const std::vector<ViewInput>& views, const JointOptions& opts = {});

/// Concatenation baseline: side-by-side [V1 | V2 | ...] followed by the
/// same SVD-and-cluster steps. Rank is capped at the sum of view columns.
JointResult mase(const std::vector<ViewInput>& views, const JointOptions& opts = {});

/// Many-to-one map from k joint clusters onto k_v view clusters; every view
/// cluster has at least one preimage.
struct ProjectionMatrix {
  ProjectionMatrix(int k, int k_v, std::vector<int> map);

  int k = 0;
  int k_v = 0;
  std::vector<int> map;  // length k, values in [0, k_v)
};

/// Relabels z through p: label i becomes p.map[z[i]].
Assignment project_assignment(const Assignment& z, const ProjectionMatrix& p);

}  // namespace krafty
