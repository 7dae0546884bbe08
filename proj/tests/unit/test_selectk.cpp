#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "krafty/clustering.hpp"
#include "krafty/joint.hpp"
#include "krafty/linalg.hpp"
#include "krafty/rng.hpp"
#include "krafty/selectk.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace krafty;

TEST_CASE("largest_gap") {
  SUBCASE("plateau then zeros") {
    CHECK(largest_gap(Spectrum({3, 3, 3, 0, 0})) == 3);
  }
  SUBCASE("noiseless five-joint-cluster spectrum") {
    const auto fx = fixtures::two_view_five_joint(1000);
    const Matrix j = tkr(fx.z1.indicator(), fx.z2.indicator());
    const Spectrum s(svd_k(j, 9).values);
    REQUIRE(s.size() == 9);
    CHECK(s.values()[4] > 0.0);
    CHECK(s.values()[5] <= 1e-10);
    CHECK(largest_gap(s) == 5);
  }
  SUBCASE("linear decay ties to the smallest index") {
    CHECK(largest_gap(Spectrum({5, 4, 3, 2, 1})) == 1);
  }
  SUBCASE("too short") {
    CHECK_THROWS_AS(largest_gap(Spectrum({1.0})), input_error);
  }
}

TEST_CASE("spectrum validation") {
  CHECK_THROWS_AS(Spectrum({1.0, 2.0}), input_error);       // ascending
  CHECK_THROWS_AS(Spectrum({1.0, -0.5}), input_error);      // negative
  CHECK_NOTHROW(Spectrum({1.0, 1.0 - 1e-13, 1.0 - 1e-13})); // slack
}

TEST_CASE("profile_likelihood_elbow") {
  SUBCASE("first elbow of a two-plateau spectrum") {
    const Spectrum s({10, 10, 10, 1, 1, 1});
    const ElbowEstimate e = profile_likelihood_elbow(s, 1);
    CHECK(e.k_hat == 3);
    // Exhaustive cross-check over every split.
    const auto scores = oracles::profile_scores(s.values());
    std::size_t best = 0;
    for (std::size_t q = 1; q < scores.size(); ++q) {
      if (scores[q] > scores[best]) best = q;
    }
    CHECK(static_cast<int>(best) + 1 == e.k_hat);
  }
  SUBCASE("second elbow skips the dominant dimension") {
    const Spectrum s({100, 10, 10, 10, 1, 1, 1, 1});
    const ElbowEstimate e = profile_likelihood_elbow(s, 2);
    CHECK(e.k_hat == 4);
    // Two-stage exhaustive evaluation.
    const auto first = oracles::profile_scores(s.values());
    std::size_t q1 = 0;
    for (std::size_t q = 1; q < first.size(); ++q) {
      if (first[q] > first[q1]) q1 = q;
    }
    std::vector<double> tail(s.values().begin() + static_cast<std::ptrdiff_t>(q1) + 1,
                             s.values().end());
    const auto second = oracles::profile_scores(tail);
    std::size_t q2 = 0;
    for (std::size_t q = 1; q < second.size(); ++q) {
      if (second[q] > second[q2]) q2 = q;
    }
    CHECK(static_cast<int>(q1 + q2) + 2 == e.k_hat);
  }
  SUBCASE("constant spectrum resolves to the smallest split") {
    const ElbowEstimate e = profile_likelihood_elbow(Spectrum({1, 1, 1, 1}), 1);
    CHECK(e.k_hat == 1);
  }
  SUBCASE("tail too short for the requested elbow") {
    CHECK_THROWS_AS(profile_likelihood_elbow(Spectrum({3, 2, 1}), 5), input_error);
    CHECK_THROWS_AS(profile_likelihood_elbow(Spectrum({3, 2}), 1), input_error);
    CHECK_THROWS_AS(profile_likelihood_elbow(Spectrum({3, 2, 1}), 0), input_error);
  }
  SUBCASE("profile holds the deciding stage's scores") {
    const Spectrum s({100, 10, 10, 10, 1, 1, 1, 1});
    const ElbowEstimate e1 = profile_likelihood_elbow(s, 1);
    CHECK(e1.profile.size() == 7);
    const ElbowEstimate e2 = profile_likelihood_elbow(s, 2);
    CHECK(e2.profile.size() == 6);  // tail after the first elbow
  }
}

TEST_CASE("elbow estimates are scale invariant") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> values;
    double v = 10.0 + rng.uniform();
    for (int i = 0; i < 10; ++i) {
      values.push_back(v);
      v -= rng.uniform();
    }
    const Spectrum s(values);
    std::vector<double> scaled_values;
    const double c = 0.1 + 10.0 * rng.uniform();
    for (const double x : values) scaled_values.push_back(c * x);
    const Spectrum scaled(scaled_values);
    CHECK(largest_gap(s) == largest_gap(scaled));
    CHECK(profile_likelihood_elbow(s, 1).k_hat == profile_likelihood_elbow(scaled, 1).k_hat);
    CHECK(profile_likelihood_elbow(s, 2).k_hat == profile_likelihood_elbow(scaled, 2).k_hat);
  }
}

TEST_CASE("largest_gap finds K under small planted clustering errors") {
  // Exact Z-inputs at n = 2000 with at most 1% flipped labels.
  Rng rng(12345);
  int hits = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const auto planted = fixtures::planted_grid(2000, 4, 4, 9, rng);
    const int e1 = static_cast<int>(rng.uniform_int(0, 10));
    const int e2 = static_cast<int>(rng.uniform_int(0, 10));
    const Assignment z1 = fixtures::flip_labels(planted.z1, e1, rng);
    const Assignment z2 = fixtures::flip_labels(planted.z2, e2, rng);
    const Matrix j = tkr(z1.indicator(), z2.indicator());
    const Spectrum s(svd_k(j, std::min(j.rows(), j.cols())).values);
    if (largest_gap(s) == 9) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("largest_gap finds K under orthogonal-complement embedding noise") {
  Rng rng(0xC5);
  int hits = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const auto planted = fixtures::planted_grid(1000, 4, 4, 9, rng);
    auto perturbed = [&](const Assignment& z) {
      const Embedding u = embedding_from_assignment(z);
      Matrix noise = oracles::random_matrix(u.matrix.rows(), u.matrix.cols(), rng);
      noise -= u.matrix * (u.matrix.transpose() * noise);
      noise *= 0.05 / svd_k(noise, 1).values[0];
      return Matrix(u.matrix + noise);
    };
    const Matrix j = tkr(perturbed(planted.z1), perturbed(planted.z2));
    const Spectrum s(svd_k(j, std::min(j.rows(), j.cols())).values);
    if (largest_gap(s) == 9) ++hits;
  }
  CHECK(hits >= static_cast<int>(trials * 0.95));
}

TEST_CASE("estimate_k_from_spectrum") {
  SUBCASE("exact joint spectrum with a zero tail resolves to the rank") {
    const auto fx = fixtures::two_view_five_joint(1000);
    const Matrix j = tkr(fx.z1.indicator(), fx.z2.indicator());
    const Spectrum s(svd_k(j, 9).values);
    CHECK(estimate_k_from_spectrum(s, 2) == 5);
  }
  SUBCASE("flat full-rank spectrum resolves to its full length") {
    Rng rng(2718);
    const auto views = fixtures::independent_uniform_views(1000, rng);
    const Matrix j = tkr(views.z1.indicator(), views.z2.indicator());
    const Spectrum s(svd_k(j, 9).values);
    CHECK(estimate_k_from_spectrum(s, 2) == 9);
  }
  SUBCASE("rank-deficient concatenation stays at the rank") {
    Rng rng(1618);
    const auto views = fixtures::independent_uniform_views(1000, rng);
    Matrix concat(1000, 6);
    concat.leftCols(3) = views.z1.indicator();
    concat.rightCols(3) = views.z2.indicator();
    const Spectrum s(svd_k(concat, 6).values);
    CHECK(estimate_k_from_spectrum(s, 2) <= 5);
  }
  SUBCASE("dominant leading value defers to the second elbow") {
    CHECK(estimate_k_from_spectrum(Spectrum({100, 10, 10, 10, 1, 1, 1, 1}), 2) == 4);
  }
  SUBCASE("flat spectrum gives its length, constant-zero tail stops the recursion") {
    CHECK(estimate_k_from_spectrum(Spectrum({1, 1, 1, 1}), 2) == 4);
    CHECK(estimate_k_from_spectrum(Spectrum({5, 0, 0, 0}), 2) == 1);
  }
}

TEST_CASE("merge_height_elbow") {
  SUBCASE("two tight pairs give K = 2") {
    Matrix x(4, 1);
    x << 0.0, 0.1, 10.0, 10.1;
    const Dendrogram d = hierarchical_complete(x);
    const MergeHeightEstimate e = merge_height_elbow(d);
    CHECK(e.k_hat == 2);
    CHECK_FALSE(e.low_confidence);
  }
  SUBCASE("exact duplicates in equidistant groups recover K exactly") {
    // K groups of duplicates at simplex corners: within-group heights are
    // zero, between-group merges all happen at the same height.
    for (const int k : {2, 3, 5}) {
      const int n = 30;
      Matrix corners = Matrix::Zero(k, k);
      for (int c = 0; c < k; ++c) corners(c, c) = 1.0;
      Matrix x(n, k);
      for (int i = 0; i < n; ++i) x.row(i) = corners.row(i % k);
      const Dendrogram d = hierarchical_complete(x);
      for (int m = 0; m < n - k; ++m) CHECK(d.merges[static_cast<std::size_t>(m)].height == 0.0);
      const MergeHeightEstimate e = merge_height_elbow(d);
      CHECK(e.k_hat == k);
    }
  }
  SUBCASE("noiseless joint embedding gives exactly K") {
    Rng rng(4);
    const auto planted = fixtures::planted_grid(120, 3, 3, 6, rng);
    const Embedding u = embedding_from_assignment(planted.joint);
    const MergeHeightEstimate e = merge_height_elbow(hierarchical_complete(u.matrix));
    CHECK(e.k_hat == 6);
  }
  SUBCASE("degenerate all-equal heights flag low confidence") {
    Matrix equilateral(3, 2);
    equilateral << 0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2.0;
    const MergeHeightEstimate e = merge_height_elbow(hierarchical_complete(equilateral));
    CHECK(e.low_confidence);
  }
  SUBCASE("needs three items") {
    Matrix x(2, 1);
    x << 0.0, 1.0;
    CHECK_THROWS_AS(merge_height_elbow(hierarchical_complete(x)), input_error);
  }
}
