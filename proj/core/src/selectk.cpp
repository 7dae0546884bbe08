#include "krafty/selectk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace krafty {

namespace {

constexpr double kDescendingSlack = 1e-12;

// Two-segment Gaussian profile log-likelihood of splitting values after
// position q (1-based): separate means, pooled MLE variance. A zero pooled
// variance scores +infinity (both segments constant).
double split_score(const std::vector<double>& values, std::size_t q) {
  const std::size_t d = values.size();
  double mean1 = 0.0;
  double mean2 = 0.0;
  for (std::size_t i = 0; i < q; ++i) mean1 += values[i];
  for (std::size_t i = q; i < d; ++i) mean2 += values[i];
  mean1 /= static_cast<double>(q);
  mean2 /= static_cast<double>(d - q);
  double ss = 0.0;
  for (std::size_t i = 0; i < q; ++i) ss += (values[i] - mean1) * (values[i] - mean1);
  for (std::size_t i = q; i < d; ++i) ss += (values[i] - mean2) * (values[i] - mean2);
  const double var = ss / static_cast<double>(d);
  if (var <= 0.0) return std::numeric_limits<double>::infinity();
  return -0.5 * static_cast<double>(d) * (std::log(2.0 * M_PI * var) + 1.0);
}

}  // namespace

Spectrum::Spectrum(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw input_error("spectrum: no values");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw input_error("spectrum: non-finite value");
    if (values_[i] < -kDescendingSlack) {
      throw input_error("spectrum: negative singular value at position " + std::to_string(i + 1));
    }
    if (i > 0 && values_[i] - values_[i - 1] > kDescendingSlack) {
      throw input_error("spectrum: values not descending at position " + std::to_string(i + 1));
    }
  }
}

std::vector<double> Spectrum::gaps() const {
  std::vector<double> g;
  g.reserve(values_.size() - 1);
  for (std::size_t i = 0; i + 1 < values_.size(); ++i) g.push_back(values_[i] - values_[i + 1]);
  return g;
}

int largest_gap(const Spectrum& s) {
  if (s.size() < 2) throw input_error("largest_gap: need at least two values");
  const auto g = s.gaps();
  std::size_t best = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (g[i] > g[best]) best = i;
  }
  return static_cast<int>(best) + 1;
}

ElbowEstimate profile_likelihood_elbow(const Spectrum& s, int which) {
  if (s.size() < 3) throw input_error("profile_likelihood_elbow: need at least three values");
  if (which < 1) throw input_error("profile_likelihood_elbow: which must be >= 1");

  std::vector<double> tail = s.values();
  int offset = 0;
  ElbowEstimate out;
  out.which_elbow = which;
  for (int stage = 1; stage <= which; ++stage) {
    if (tail.size() < 2) {
      throw input_error("profile_likelihood_elbow: spectrum too short for elbow " +
                        std::to_string(which));
    }
    std::vector<double> profile(tail.size() - 1);
    std::size_t best = 0;
    for (std::size_t q = 1; q < tail.size(); ++q) {
      profile[q - 1] = split_score(tail, q);
      if (profile[q - 1] > profile[best]) best = q - 1;
    }
    const int q_star = static_cast<int>(best) + 1;
    offset += q_star;
    out.profile = std::move(profile);
    tail.erase(tail.begin(), tail.begin() + q_star);
  }
  out.k_hat = offset;
  return out;
}

int estimate_k_from_spectrum(const Spectrum& s, int which) {
  if (which < 1) throw input_error("estimate_k_from_spectrum: which must be >= 1");
  std::vector<double> tail = s.values();
  tail.push_back(0.0);  // every singular value past the rank limit is zero
  const double scale = std::max(s.values().front(), 1.0);
  int position = 0;
  for (int stage = 1; stage <= which; ++stage) {
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    if (tail.size() < 2 || *hi - *lo <= 1e-12 * scale) {
      // Structure-less tail: the previous elbow stands (or k = 1 when the
      // whole spectrum is flat).
      return std::max(position, 1);
    }
    std::size_t best = 0;
    double best_score = split_score(tail, 1);
    for (std::size_t q = 2; q < tail.size(); ++q) {
      const double score = split_score(tail, q);
      if (score > best_score) {
        best_score = score;
        best = q - 1;
      }
    }
    position += static_cast<int>(best) + 1;
    // A deeper elbow is consulted only past a leading elbow that isolated a
    // single dominant value; an elbow that already carved out a block is
    // the cluster-count signal itself, and recursing past it would
    // fabricate dimensions out of the floor.
    if (best != 0) break;
    tail.erase(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  }
  return position;
}

MergeHeightEstimate merge_height_elbow(const Dendrogram& d) {
  if (d.n < 3) throw input_error("merge_height_elbow: need at least three items");
  if (static_cast<int>(d.merges.size()) != d.n - 1) {
    throw input_error("merge_height_elbow: incomplete dendrogram");
  }
  // h(t) for t = 2..n; gaps at t = 2..n-1; ties take the largest t.
  int t_star = 2;
  double best = -std::numeric_limits<double>::infinity();
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < d.merges.size(); ++i) {
    const double gap = d.merges[i + 1].height - d.merges[i].height;
    min_gap = std::min(min_gap, gap);
    if (gap >= best) {
      best = gap;
      t_star = d.merges[i].step;
    }
  }
  MergeHeightEstimate out;
  out.k_hat = d.n - t_star + 1;
  out.low_confidence = (best - min_gap) <= 1e-15;
  return out;
}

}  // namespace krafty
