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

#include "chad/motivation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "chad/eval.hpp"
#include "chad/matrix.hpp"

namespace chad::motivation {

namespace {

constexpr double kCovFloor = 1e-6;
constexpr int kKmeansRestarts = 5;
constexpr int kKmeansMaxIters = 200;
constexpr int kEmMaxIters = 200;
constexpr double kEmTol = 1e-6;

double sq(double v) { return v * v; }

double dist2(Point a, Point b) { return sq(a.x - b.x) + sq(a.y - b.y); }

double log_gamma_pdf(double v, double shape, double scale) {
  if (v <= 0) return -std::numeric_limits<double>::infinity();
  return (shape - 1) * std::log(v) - v / scale - std::lgamma(shape) -
         shape * std::log(scale);
}

void check_positive(double v, const char* what) {
  if (!(v > 0)) fail(ErrorKind::Config, std::string(what) + " must be > 0");
}

struct Cov2 {
  double xx = 1, xy = 0, yy = 1;

  double det() const { return xx * yy - xy * xy; }

  /// Raise the smallest eigenvalue to the floor. True if a repair ran.
  bool refloor() {
    if (!std::isfinite(xx) || !std::isfinite(xy) || !std::isfinite(yy)) {
      xx = yy = kCovFloor;
      xy = 0;
      return true;
    }
    const double m = 0.5 * (xx + yy);
    const double disc = std::sqrt(std::max(0.0, m * m - det()));
    const double lo = m - disc;  // smaller eigenvalue of a symmetric 2x2
    if (lo >= kCovFloor) return false;
    const double bump = kCovFloor - lo;
    xx += bump;
    yy += bump;
    return true;
  }

  double log_normal_pdf(Point p, Point mean) const {
    const double d = det();
    const double dx = p.x - mean.x, dy = p.y - mean.y;
    const double q = (yy * dx * dx - 2 * xy * dx * dy + xx * dy * dy) / d;
    return -std::log(2 * std::numbers::pi) - 0.5 * std::log(d) - 0.5 * q;
  }
};

}  // namespace

void SyntheticConfig::validate() const {
  check_positive(cluster1.x.shape, "cluster1 x shape");
  check_positive(cluster1.y.shape, "cluster1 y shape");
  check_positive(cluster2.x.shape, "cluster2 x shape");
  check_positive(cluster2.y.shape, "cluster2 y shape");
  check_positive(cluster1.x.scale, "cluster1 x scale");
  check_positive(cluster1.y.scale, "cluster1 y scale");
  check_positive(cluster2.x.scale, "cluster2 x scale");
  check_positive(cluster2.y.scale, "cluster2 y scale");
  check_positive(anomaly1.sigma, "anomaly1 sigma");
  check_positive(anomaly2.sigma, "anomaly2 sigma");
  check_positive(epsilon, "epsilon");
  if (bounds_inflation < 0)
    fail(ErrorKind::Config, "bounds_inflation must be >= 0");
  if (per_cluster == 0) fail(ErrorKind::Config, "per_cluster must be > 0");
  if (per_anomaly_set == 0)
    fail(ErrorKind::Config, "per_anomaly_set must be > 0");
}

PointSet sample_synthetic(const SyntheticConfig& config, RngStream& rng) {
  config.validate();
  PointSet out;
  out.normals.reserve(2 * config.per_cluster);
  out.anomalies.reserve(2 * config.per_anomaly_set);
  for (const GammaSpec* g : {&config.cluster1, &config.cluster2}) {
    for (std::size_t i = 0; i < config.per_cluster; ++i) {
      out.normals.push_back({g->offset_x + rng.gamma(g->x.shape, g->x.scale),
                             g->offset_y + rng.gamma(g->y.shape, g->y.scale)});
    }
  }
  for (const NormalSpec* n : {&config.anomaly1, &config.anomaly2}) {
    for (std::size_t i = 0; i < config.per_anomaly_set; ++i) {
      out.anomalies.push_back({rng.normal(n->mean_x, n->sigma),
                               rng.normal(n->mean_y, n->sigma)});
    }
  }
  return out;
}

double gamma_cluster_density(const GammaSpec& spec, Point p) {
  const double lx = log_gamma_pdf(p.x - spec.offset_x, spec.x.shape,
                                  spec.x.scale);
  const double ly = log_gamma_pdf(p.y - spec.offset_y, spec.y.shape,
                                  spec.y.scale);
  return std::exp(lx + ly);
}

double KmeansModel::score(Point p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : centers) best = std::min(best, dist2(p, c));
  return std::sqrt(best);
}

namespace {

std::size_t nearest_center(const std::vector<Point>& centers, Point p) {
  std::size_t best = 0;
  double bd = dist2(p, centers[0]);
  for (std::size_t c = 1; c < centers.size(); ++c) {
    const double d = dist2(p, centers[c]);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  return best;
}

KmeansModel lloyd_once(const std::vector<Point>& points, std::size_t k,
                       RngStream& rng) {
  // Distinct random starting points.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i)
    std::swap(order[i], order[i + rng.index(points.size() - i)]);

  KmeansModel m;
  for (std::size_t i = 0; i < k; ++i) m.centers.push_back(points[order[i]]);

  std::vector<std::size_t> assign(points.size(), k);
  for (int iter = 0; iter < kKmeansMaxIters; ++iter) {
    bool moved = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = nearest_center(m.centers, points[i]);
      if (c != assign[i]) {
        assign[i] = c;
        moved = true;
      }
    }
    if (!moved) break;

    std::vector<Point> sums(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[assign[i]].x += points[i].x;
      sums[assign[i]].y += points[i].y;
      counts[assign[i]]++;
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: restart it on the point farthest from its center.
        std::size_t far = 0;
        double fd = -1;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const double d = dist2(points[i], m.centers[assign[i]]);
          if (d > fd) {
            fd = d;
            far = i;
          }
        }
        m.centers[c] = points[far];
      } else {
        m.centers[c] = {sums[c].x / counts[c], sums[c].y / counts[c]};
      }
    }
  }

  m.sse = 0;
  for (std::size_t i = 0; i < points.size(); ++i)
    m.sse += dist2(points[i], m.centers[nearest_center(m.centers, points[i])]);
  return m;
}

}  // namespace

KmeansModel kmeans_fit(const std::vector<Point>& points, std::size_t k,
                       RngStream& rng) {
  if (k == 0) fail(ErrorKind::Config, "kmeans needs k >= 1");
  if (k > points.size())
    fail(ErrorKind::Config, "kmeans needs at least k points");
  KmeansModel best;
  for (int r = 0; r < kKmeansRestarts; ++r) {
    KmeansModel m = lloyd_once(points, k, rng);
    if (r == 0 || m.sse < best.sse) best = std::move(m);
  }
  return best;
}

double GmmParams::score(Point p) const {
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(comps.size());
  for (const auto& c : comps) {
    if (c.weight <= 0) continue;
    Cov2 cov{c.cxx, c.cxy, c.cyy};
    const double t = std::log(c.weight) + cov.log_normal_pdf(p, c.mean);
    terms.push_back(t);
    hi = std::max(hi, t);
  }
  if (terms.empty()) fail(ErrorKind::Internal, "gmm has no live components");
  double acc = 0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

GmmParams gmm_fit(const std::vector<Point>& points, std::size_t k_components,
                  RngStream& rng) {
  const std::size_t n = points.size();
  const std::size_t k = k_components;
  if (k == 0) fail(ErrorKind::Config, "gmm needs k >= 1");
  if (n < 2 * k) fail(ErrorKind::Config, "gmm needs at least 2k points");

  // Seed from a k-means partition: component = cluster moments.
  KmeansModel km = kmeans_fit(points, k, rng);
  std::vector<Point> means = km.centers;
  std::vector<Cov2> covs(k);
  std::vector<double> weights(k, 0);
  {
    std::vector<std::size_t> assign(n);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      assign[i] = nearest_center(km.centers, points[i]);
      counts[assign[i]]++;
    }
    for (std::size_t c = 0; c < k; ++c) {
      Cov2 cov{0, 0, 0};
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != c) continue;
        const double dx = points[i].x - means[c].x;
        const double dy = points[i].y - means[c].y;
        cov.xx += dx * dx;
        cov.xy += dx * dy;
        cov.yy += dy * dy;
      }
      const double m = std::max<std::size_t>(counts[c], 1);
      cov.xx /= m;
      cov.xy /= m;
      cov.yy /= m;
      cov.refloor();  // init repair is expected, not a collapse
      covs[c] = cov;
      weights[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
    }
  }

  GmmParams fit;
  std::vector<double> resp(n * k);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kEmMaxIters; ++iter) {
    // E step in log space.
    double ll = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double t =
            weights[c] > 0
                ? std::log(weights[c]) + covs[c].log_normal_pdf(points[i],
                                                                means[c])
                : -std::numeric_limits<double>::infinity();
        resp[i * k + c] = t;
        hi = std::max(hi, t);
      }
      double z = 0;
      for (std::size_t c = 0; c < k; ++c) z += std::exp(resp[i * k + c] - hi);
      const double log_z = hi + std::log(z);
      ll += log_z;
      for (std::size_t c = 0; c < k; ++c)
        resp[i * k + c] = std::exp(resp[i * k + c] - log_z);
    }

    // M step.
    for (std::size_t c = 0; c < k; ++c) {
      double w = 0, mx = 0, my = 0;
      for (std::size_t i = 0; i < n; ++i) {
        w += resp[i * k + c];
        mx += resp[i * k + c] * points[i].x;
        my += resp[i * k + c] * points[i].y;
      }
      if (!(w > 1e-9 * n)) {
        // Collapsed component: keep its position, reset its spread.
        covs[c] = Cov2{1, 0, 1};
        weights[c] = 1e-6;
        fit.refloors++;
        continue;
      }
      means[c] = {mx / w, my / w};
      Cov2 cov{0, 0, 0};
      for (std::size_t i = 0; i < n; ++i) {
        const double dx = points[i].x - means[c].x;
        const double dy = points[i].y - means[c].y;
        cov.xx += resp[i * k + c] * dx * dx;
        cov.xy += resp[i * k + c] * dx * dy;
        cov.yy += resp[i * k + c] * dy * dy;
      }
      cov.xx /= w;
      cov.xy /= w;
      cov.yy /= w;
      if (cov.refloor()) fit.refloors++;
      covs[c] = cov;
      weights[c] = w / n;
    }
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (auto& w : weights) w /= wsum;

    fit.log_likelihood = ll;
    fit.ll_trace.push_back(ll);
    if (iter > 0 && ll - prev_ll < kEmTol) break;
    prev_ll = ll;
  }

  fit.comps.resize(k);
  for (std::size_t c = 0; c < k; ++c)
    fit.comps[c] = {weights[c], means[c], covs[c].xx, covs[c].xy, covs[c].yy};
  return fit;
}

double ContrastModel::score(Point p) const {
  Mat x(1, 2);
  x(0, 0) = static_cast<real_t>((p.x - x_lo) / (x_hi - x_lo));
  x(0, 1) = static_cast<real_t>((p.y - y_lo) / (y_hi - y_lo));
  nn::MlpCache cache;
  return net.forward(x, false, nullptr, cache)(0, 0);
}

ContrastModel contrast_fit(const std::vector<Point>& normals,
                           const SyntheticConfig& config, RngStream& rng) {
  config.validate();
  if (normals.empty()) fail(ErrorKind::Config, "contrast needs normal points");

  ContrastModel m;
  double x_lo = normals[0].x, x_hi = normals[0].x;
  double y_lo = normals[0].y, y_hi = normals[0].y;
  for (const auto& p : normals) {
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  const double pad_x = 0.5 * config.bounds_inflation * (x_hi - x_lo);
  const double pad_y = 0.5 * config.bounds_inflation * (y_hi - y_lo);
  m.x_lo = x_lo - pad_x;
  m.x_hi = x_hi + pad_x;
  m.y_lo = y_lo - pad_y;
  m.y_hi = y_hi + pad_y;

  // Rejection-sample the contrastive class: uniform over the box, but only
  // where both true generators are quiet. Two contrast points per normal
  // point; the uniform class needs the extra coverage to pin down narrow
  // low-density pockets between the clusters.
  std::vector<Point>& contrast = m.contrast_points;
  const std::size_t want = 2 * normals.size();
  contrast.reserve(want);
  std::size_t attempts = 0;
  while (contrast.size() < want) {
    ++attempts;
    if (attempts >= 1000 &&
        static_cast<double>(contrast.size()) < 0.001 * attempts) {
      fail(ErrorKind::Config,
           "contrast rejection rate above 0.999; epsilon or bounds are "
           "misconfigured");
    }
    Point u{rng.uniform(m.x_lo, m.x_hi), rng.uniform(m.y_lo, m.y_hi)};
    if (gamma_cluster_density(config.cluster1, u) >= config.epsilon) continue;
    if (gamma_cluster_density(config.cluster2, u) >= config.epsilon) continue;
    contrast.push_back(u);
  }

  const std::size_t total = normals.size() + contrast.size();
  Mat xs(total, 2);
  Mat ys(total, 1);
  for (std::size_t i = 0; i < total; ++i) {
    const Point p = i < normals.size() ? normals[i]
                                       : contrast[i - normals.size()];
    xs(i, 0) = static_cast<real_t>((p.x - m.x_lo) / (m.x_hi - m.x_lo));
    xs(i, 1) = static_cast<real_t>((p.y - m.y_lo) / (m.y_hi - m.y_lo));
    ys(i, 0) = i < normals.size() ? real_t(1) : real_t(0);
  }

  m.net.init_params(rng);
  nn::Adam opt(real_t(3e-3));
  auto params = m.net.params("contrast");
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t batch = 256;
  const int epochs = 400;
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    for (std::size_t at = 0; at < total; at += batch) {
      const std::size_t bn = std::min(batch, total - at);
      Mat xb(bn, 2), yb(bn, 1);
      for (std::size_t i = 0; i < bn; ++i) {
        xb(i, 0) = xs(order[at + i], 0);
        xb(i, 1) = xs(order[at + i], 1);
        yb(i, 0) = ys(order[at + i], 0);
      }
      nn::MlpCache cache;
      Mat out = m.net.forward(xb, true, &rng, cache);
      // Binary cross-entropy through the sigmoid head.
      Mat dout(bn, 1);
      for (std::size_t i = 0; i < bn; ++i) {
        const real_t y = std::clamp(out(i, 0), real_t(1e-7),
                                    real_t(1) - real_t(1e-7));
        dout(i, 0) = (y - yb(i, 0)) / (y * (real_t(1) - y)) / real_t(bn);
      }
      m.net.zero_grad();
      m.net.backward(dout, cache);
      opt.step(params);
    }
  }
  return m;
}

MotivationResult run_motivation(const SyntheticConfig& config) {
  config.validate();
  MotivationResult res;
  RngStream points_rng(config.seed, "motivation/points");
  RngStream km1_rng(config.seed, "motivation/km1");
  RngStream km2_rng(config.seed, "motivation/km2");
  RngStream gmm_rng(config.seed, "motivation/gmm");
  RngStream con_rng(config.seed, "motivation/contrast");

  res.points = sample_synthetic(config, points_rng);
  const auto& normals = res.points.normals;

  const KmeansModel km1 = kmeans_fit(normals, 1, km1_rng);
  const KmeansModel km2 = kmeans_fit(normals, 2, km2_rng);
  const GmmParams gmm2 = gmm_fit(normals, 2, gmm_rng);
  const ContrastModel con = contrast_fit(normals, config, con_rng);
  res.gmm_refloors = gmm2.refloors;

  const std::size_t total = normals.size() + res.points.anomalies.size();
  std::vector<std::uint8_t> labels(total, 0);
  std::fill(labels.begin() + normals.size(), labels.end(), std::uint8_t(1));

  auto score_all = [&](auto&& scorer, std::vector<double>& out) {
    out.reserve(total);
    for (const auto& p : normals) out.push_back(scorer(p));
    for (const auto& p : res.points.anomalies) out.push_back(scorer(p));
  };
  score_all([&](Point p) { return gmm2.score(p); }, res.score_gmm2);
  score_all([&](Point p) { return km2.score(p); }, res.score_km2);
  score_all([&](Point p) { return km1.score(p); }, res.score_km1);
  score_all([&](Point p) { return con.score(p); }, res.score_contrast);

  auto ap = [&](const std::vector<double>& scores, bool low_is_anomalous) {
    eval::ScoredSet set;
    set.scores.assign(scores.begin(), scores.end());
    set.labels = labels;
    set.low_is_anomalous = low_is_anomalous;
    return static_cast<double>(eval::average_precision(set));
  };
  res.ap_gmm2 = ap(res.score_gmm2, true);       // low likelihood = anomalous
  res.ap_km2 = ap(res.score_km2, false);        // far from center = anomalous
  res.ap_km1 = ap(res.score_km1, false);
  res.ap_contrast = ap(res.score_contrast, true);
  return res;
}

}  // namespace chad::motivation
