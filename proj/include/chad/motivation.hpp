// Copyright 2026 The CHAD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// 2-D demonstration of why cluster-shape assumptions hurt anomaly
// detection: two skewed Gamma clouds with Normal anomaly blobs in the gap,
// scored by K-means distance, GMM likelihood, and a contrastive
// discriminator trained against low-density uniform samples.

#ifndef CHAD_MOTIVATION_HPP_
#define CHAD_MOTIVATION_HPP_

#include <cstdint>
#include <vector>

#include "chad/common.hpp"
#include "chad/nn.hpp"
#include "chad/rng.hpp"

namespace chad::motivation {

struct GammaAxis {
  double shape = 1;
  double scale = 1;
};

/// Product of two independent shifted Gamma axes.
struct GammaSpec {
  GammaAxis x, y;
  double offset_x = 0;
  double offset_y = 0;
};

/// Isotropic Normal blob.
struct NormalSpec {
  double mean_x = 0;
  double mean_y = 0;
  double sigma = 1;
};

struct SyntheticConfig {
  GammaSpec cluster1{{2, 1.5}, {4, 1.0}, 0, 0};
  GammaSpec cluster2{{4, 1.0}, {2, 1.5}, 10, 6};
  // Both blobs sit where the true generator densities are < epsilon: one in
  // the far low-density field, one tucked against cluster2's support edge
  // where a fitted Gaussian still assigns it comfortable likelihood.
  NormalSpec anomaly1{14.0, 0.2, 0.7};
  NormalSpec anomaly2{14.6, 5.0, 0.7};
  std::size_t per_cluster = 2000;
  std::size_t per_anomaly_set = 100;
  double epsilon = 1e-4;         // contrast sampling density ceiling
  double bounds_inflation = 0.2; // bounding-box widening, fraction of range
  std::uint64_t seed = 1;

  void validate() const;  // Config error on nonpositive shape/scale/sigma/eps
};

struct Point {
  double x = 0;
  double y = 0;
};

struct PointSet {
  std::vector<Point> normals;    // cluster1 then cluster2
  std::vector<Point> anomalies;  // anomaly1 then anomaly2
};

PointSet sample_synthetic(const SyntheticConfig& config, RngStream& rng);

/// True density of one cluster at p (per-axis Gamma pdfs multiplied).
double gamma_cluster_density(const GammaSpec& spec, Point p);

struct KmeansModel {
  std::vector<Point> centers;
  double sse = 0;  // within-cluster sum of squared distances

  /// Euclidean distance to the nearest center; higher = more anomalous.
  double score(Point p) const;
};

/// Lloyd's algorithm, 5 random restarts, best SSE kept.
KmeansModel kmeans_fit(const std::vector<Point>& points, std::size_t k,
                       RngStream& rng);

struct GmmComponent {
  double weight = 0;
  Point mean;
  double cxx = 1, cxy = 0, cyy = 1;  // full symmetric 2x2 covariance
};

struct GmmParams {
  std::vector<GmmComponent> comps;
  double log_likelihood = 0;      // of the fitting data, at convergence
  std::vector<double> ll_trace;   // log-likelihood entering each EM iteration
  std::size_t refloors = 0;       // degenerate-covariance repairs during EM

  /// Mixture log density; lower = more anomalous.
  double score(Point p) const;
};

/// EM with k-means initialization, covariance floor 1e-6*I, stop when the
/// log-likelihood gain drops under 1e-6 or after 200 iterations. A
/// collapsing component is refloored and EM continues.
GmmParams gmm_fit(const std::vector<Point>& points, std::size_t k_components,
                  RngStream& rng);

struct ContrastModel {
  nn::Mlp net{{2, 32, 16, 1},
              {nn::Activation::Tanh, nn::Activation::Tanh,
               nn::Activation::Sigmoid}};
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;  // sampling bounds
  std::vector<Point> contrast_points;             // the accepted draws

  /// Classifier output, the probability of being normal-region data;
  /// lower = more anomalous.
  double score(Point p) const;
};

/// Draw uniform points over the normals' inflated bounding box, reject any
/// where either true cluster density reaches epsilon, and train the
/// discriminator normal-vs-contrast. Rejection rate above 0.999 is a
/// Config error (epsilon/bounds misconfiguration).
ContrastModel contrast_fit(const std::vector<Point>& normals,
                           const SyntheticConfig& config, RngStream& rng);

struct MotivationResult {
  PointSet points;
  // Scores over normals then anomalies, same order as `points`.
  std::vector<double> score_gmm2, score_km2, score_km1, score_contrast;
  double ap_gmm2 = 0, ap_km2 = 0, ap_km1 = 0, ap_contrast = 0;
  std::size_t gmm_refloors = 0;
};

/// Fit all four scorers on the same sampled set and report AP for each.
MotivationResult run_motivation(const SyntheticConfig& config);

}  // namespace chad::motivation

#endif  // CHAD_MOTIVATION_HPP_
