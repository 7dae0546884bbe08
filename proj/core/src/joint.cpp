#include "krafty/joint.hpp"

#include "krafty/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace krafty {

namespace {

void check_views(const std::vector<ViewInput>& views) {
  if (views.size() < 2) throw input_error("joint: at least two views required");
  const int n = views.front().n();
  for (const auto& view : views) {
    if (view.n() != n) {
      throw input_error("joint: views disagree on item count (" + std::to_string(n) +
                        " vs " + std::to_string(view.n()) + ")");
    }
  }
}

Matrix concat_views(const std::vector<ViewInput>& views) {
  Index total = 0;
  for (const auto& view : views) total += view.cols();
  Matrix out(views.front().n(), total);
  Index at = 0;
  for (const auto& view : views) {
    out.middleCols(at, view.cols()) = view.contribution();
    at += view.cols();
  }
  return out;
}

std::vector<ViewInput> maybe_regularize(std::vector<ViewInput> views, const JointOptions& opts) {
  if (!opts.regularize_first_view) return views;
  for (auto& view : views) {
    if (view.is_assignment()) continue;
    const Embedding& e = view.embedding();
    const double delta = opts.regularize_scale *
                         std::sqrt(static_cast<double>(e.k()) / static_cast<double>(e.n()));
    Embedding reg = regularize(e, delta, e.k());
    view = ViewInput::from_embedding(std::move(reg));
    return views;
  }
  throw input_error("joint: regularization requested but no embedding view present");
}

JointResult run_joint(Method method, std::vector<ViewInput> views, const JointOptions& opts) {
  check_views(views);
  views = maybe_regularize(std::move(views), opts);

  Index prod_cols = 1;
  for (const auto& view : views) prod_cols *= view.cols();

  const Matrix j = method == Method::krafty ? joint_matrix_krafty(views) : concat_views(views);
  const Index min_dim = std::min(j.rows(), j.cols());
  Spectrum spectrum(svd_k(j, min_dim).values);

  int k = 0;
  bool capped = false;
  KSource source;
  if (opts.k.has_value()) {
    source = KSource::given;
    k = *opts.k;
    if (k < 1 || k > prod_cols) {
      throw input_error("joint: k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(prod_cols) + "]");
    }
    if (k > min_dim) {
      k = static_cast<int>(min_dim);
      capped = true;
    }
  } else {
    source = KSource::estimated;
    k = estimate_k_from_spectrum(spectrum, opts.which_elbow);
  }

  Embedding u = svd_k(j, k).left;
  std::optional<Dendrogram> dendrogram;
  std::optional<Assignment> labels;
  if (opts.clusterer == FinalClusterer::hc) {
    Dendrogram d = hierarchical_complete(u.matrix);
    labels = cut_dendrogram(d, k);
    dendrogram = std::move(d);
  } else {
    labels = kmeans(u.matrix, k, opts.kmeans_restarts, opts.kmeans_max_iter, opts.seed).assignment;
  }
  return JointResult{std::move(*labels), std::move(u),    std::move(spectrum), k,
                     source,             method,          std::move(dendrogram), capped};
}

}  // namespace

ViewInput ViewInput::from_assignment(Assignment z) { return ViewInput(std::move(z)); }

ViewInput ViewInput::from_embedding(Embedding e, double max_residual) {
  if (e.residual > max_residual) {
    throw input_error("view: embedding orthonormality residual " + std::to_string(e.residual) +
                      " exceeds " + std::to_string(max_residual));
  }
  return ViewInput(std::move(e));
}

int ViewInput::n() const {
  if (is_assignment()) return assignment().n();
  return static_cast<int>(embedding().n());
}

Index ViewInput::cols() const {
  if (is_assignment()) return assignment().k();
  return embedding().k();
}

Matrix ViewInput::contribution() const {
  if (is_assignment()) return assignment().indicator();
  return embedding().matrix;
}

Matrix joint_matrix_krafty(const std::vector<ViewInput>& views) {
  check_views(views);
  std::vector<Matrix> parts;
  parts.reserve(views.size());
  for (const auto& view : views) parts.push_back(view.contribution());
  return tkr_multi(parts);
}

JointResult krafty(const std::vector<ViewInput>& views, const JointOptions& opts) {
  return run_joint(Method::krafty, views, opts);
}

JointResult mase(const std::vector<ViewInput>& views, const JointOptions& opts) {
  return run_joint(Method::mase, views, opts);
}

ProjectionMatrix::ProjectionMatrix(int k_in, int k_v_in, std::vector<int> map_in)
    : k(k_in), k_v(k_v_in), map(std::move(map_in)) {
  if (k < 1 || k_v < 1) throw input_error("projection: cluster counts must be positive");
  if (static_cast<int>(map.size()) != k) {
    throw input_error("projection: map length " + std::to_string(map.size()) +
                      " does not match k = " + std::to_string(k));
  }
  std::vector<bool> hit(static_cast<std::size_t>(k_v), false);
  for (const int target : map) {
    if (target < 0 || target >= k_v) throw input_error("projection: target outside [0, k_v)");
    hit[static_cast<std::size_t>(target)] = true;
  }
  for (int c = 0; c < k_v; ++c) {
    if (!hit[static_cast<std::size_t>(c)]) {
      throw input_error("projection: view cluster " + std::to_string(c) + " has no preimage");
    }
  }
}

Assignment project_assignment(const Assignment& z, const ProjectionMatrix& p) {
  if (z.k() != p.k) {
    throw input_error("project_assignment: joint cluster counts differ (" +
                      std::to_string(z.k()) + " vs " + std::to_string(p.k) + ")");
  }
  std::vector<int> labels(static_cast<std::size_t>(z.n()));
  for (int i = 0; i < z.n(); ++i) labels[static_cast<std::size_t>(i)] = p.map[static_cast<std::size_t>(z[i])];
  return Assignment(std::move(labels), p.k_v);
}

}  // namespace krafty
