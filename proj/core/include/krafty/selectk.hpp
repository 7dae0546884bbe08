#pragma once

#include "krafty/clustering.hpp"
#include "krafty/types.hpp"

#include <vector>

namespace krafty {

/// Descending nonnegative singular values with derived successive gaps.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  /// gaps[i] = values[i] - values[i+1] (length size() - 1).
  std::vector<double> gaps() const;

 private:
  std::vector<double> values_;
};

/// 1-based position of the largest successive gap; ties resolve to the
/// smallest index. Requires at least two values.
int largest_gap(const Spectrum& s);

struct ElbowEstimate {
  int k_hat = 0;
  int which_elbow = 1;
  /// Candidate scores of the stage that produced k_hat. profile[q-1] is the
  /// two-segment Gaussian profile log-likelihood of splitting that stage's
  /// values after position q.
  std::vector<double> profile;
};

/// Automatic scree elbow: for each split point the values are modeled as
/// two Gaussian segments with separate means and a pooled MLE variance, and
/// the split maximizing the profile log-likelihood is the elbow. For
/// which > 1 the search recurses on the tail beyond the previous elbow and
/// the absolute position is returned. Ties resolve to the smallest split.
ElbowEstimate profile_likelihood_elbow(const Spectrum& s, int which = 1);

/// Cluster-count estimate for a joint-matrix spectrum, built on the
/// profile-likelihood elbow with three adjustments for this use:
/// the spectrum is extended by its virtual zero (every singular value past
/// the rank limit is zero), numerically structure-less tails end the
/// recursion, and elbows beyond the first are taken only while the previous
/// elbow isolated a single dominant value. Unlike profile_likelihood_elbow
/// this can return the full spectrum length.
int estimate_k_from_spectrum(const Spectrum& s, int which);

struct MergeHeightEstimate {
  int k_hat = 0;
  /// Set when the merge heights carry no discernible jump (all gaps equal).
  bool low_confidence = false;
};

/// Cluster count from the largest jump in complete-linkage merge heights:
/// t* = argmax_t h(t+1) - h(t) and K = n - t* + 1. Ties resolve to the
/// largest t (fewest clusters).
MergeHeightEstimate merge_height_elbow(const Dendrogram& d);

}  // namespace krafty
