#include "tsgraph/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace tsgraph {

namespace {

double sq_dist(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// relabel so clusters are numbered by their smallest member index
void canonicalize(Clustering& c) {
  std::vector<int> remap(static_cast<std::size_t>(c.num_clusters), -1);
  int next = 0;
  for (int id : c.cluster_ids) {
    if (id >= 0 && remap[static_cast<std::size_t>(id)] < 0) {
      remap[static_cast<std::size_t>(id)] = next++;
    }
  }
  for (int& id : c.cluster_ids) {
    if (id >= 0) id = remap[static_cast<std::size_t>(id)];
  }
  c.num_clusters = next;
}

}  // namespace

Clustering kmeans2(const std::vector<Point2>& points, std::uint64_t seed,
                   std::size_t max_iters, std::vector<double>* objective_trace) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("kmeans2: need at least two points");
  bool any_distinct = false;
  for (std::size_t i = 1; i < n && !any_distinct; ++i) {
    any_distinct = sq_dist(points[i], points[0]) > 0.0;
  }
  if (!any_distinct) throw std::invalid_argument("kmeans2: all points identical");

  // D^2-weighted seeding
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Point2 centers[2];
  const std::size_t first = static_cast<std::size_t>(unit(rng) * static_cast<double>(n)) % n;
  centers[0] = points[first];
  std::vector<double> d2(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = sq_dist(points[i], centers[0]);
    total += d2[i];
  }
  double pick = unit(rng) * total;
  std::size_t second = 0;
  for (std::size_t i = 0; i < n; ++i) {
    pick -= d2[i];
    if (pick <= 0.0) {
      second = i;
      break;
    }
    second = i;
  }
  centers[1] = points[second];

  std::vector<int> assign(n, -1);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double da = sq_dist(points[i], centers[0]);
      const double db = sq_dist(points[i], centers[1]);
      const int id = da <= db ? 0 : 1;
      objective += id == 0 ? da : db;
      if (assign[i] != id) {
        assign[i] = id;
        changed = true;
      }
    }
    if (objective_trace) objective_trace->push_back(objective);
    if (!changed) break;
    double sx[2] = {0.0, 0.0}, sy[2] = {0.0, 0.0};
    std::size_t cnt[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      sx[assign[i]] += points[i].x;
      sy[assign[i]] += points[i].y;
      cnt[assign[i]] += 1;
    }
    for (int k = 0; k < 2; ++k) {
      if (cnt[k] > 0) {  // an empty cluster keeps its centroid
        centers[k] = {sx[k] / static_cast<double>(cnt[k]),
                      sy[k] / static_cast<double>(cnt[k])};
      }
    }
  }

  Clustering out;
  out.cluster_ids = std::move(assign);
  out.num_clusters = 2;
  canonicalize(out);
  return out;
}

double dbscan_epsilon(const std::vector<Point2>& points) {
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dists.push_back(std::sqrt(sq_dist(points[i], points[j])));
  double mean = 0.0;
  for (double d : dists) mean += d;
  mean /= static_cast<double>(dists.size());
  double var = 0.0;
  for (double d : dists) var += (d - mean) * (d - mean);
  var /= static_cast<double>(dists.size());  // population variance
  return mean + 2.0 * std::sqrt(var);
}

Clustering dbscan(const std::vector<Point2>& points, std::size_t min_pts) {
  return dbscan(points, min_pts, dbscan_epsilon(points));
}

Clustering dbscan(const std::vector<Point2>& points, std::size_t min_pts, double eps) {
  const std::size_t n = points.size();
  if (n < min_pts) throw std::invalid_argument("dbscan: fewer points than min_pts");
  const double eps2 = eps * eps;

  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (sq_dist(points[i], points[j]) <= eps2) neighbors[i].push_back(j);
    }
  }
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) core[i] = neighbors[i].size() >= min_pts;

  // clusters = connected components of the core points; this makes the
  // partition independent of the input order
  Clustering out;
  out.cluster_ids.assign(n, -1);
  int next_cluster = 0;
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || out.cluster_ids[i] >= 0) continue;
    const int id = next_cluster++;
    out.cluster_ids[i] = id;
    stack.push_back(i);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t u : neighbors[v]) {
        if (core[u] && out.cluster_ids[u] < 0) {
          out.cluster_ids[u] = id;
          stack.push_back(u);
        }
      }
    }
  }
  out.num_clusters = next_cluster;

  // border points attach to the nearest core within eps; distance ties go to
  // the core with the lexicographically smaller coordinates
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_core = n;
    for (std::size_t u : neighbors[i]) {
      if (!core[u]) continue;
      const double d = sq_dist(points[i], points[u]);
      const bool closer =
          d < best ||
          (d == best && best_core < n &&
           (points[u].x < points[best_core].x ||
            (points[u].x == points[best_core].x && points[u].y < points[best_core].y)));
      if (best_core == n || closer) {
        best = d;
        best_core = u;
      }
    }
    if (best_core < n) out.cluster_ids[i] = out.cluster_ids[best_core];
  }

  canonicalize(out);
  return out;
}

ClusterLabeling label_clusters(const Clustering& clustering,
                               const std::vector<Point2>& points) {
  if (clustering.cluster_ids.empty() ||
      clustering.cluster_ids.size() != points.size()) {
    throw std::invalid_argument("label_clusters: clustering/point mismatch");
  }
  ClusterLabeling out;
  out.clustering = clustering;
  out.labels.assign(points.size(), 1);

  const int k = clustering.num_clusters;
  std::vector<double> mean_rmse(static_cast<std::size_t>(std::max(k, 1)), 0.0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(k, 1)), 0);
  bool any_noise = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int id = clustering.cluster_ids[i];
    if (id < 0) {
      any_noise = true;
      continue;
    }
    mean_rmse[static_cast<std::size_t>(id)] += points[i].x;
    counts[static_cast<std::size_t>(id)] += 1;
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      mean_rmse[static_cast<std::size_t>(c)] /=
          static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }

  if (k >= 2) {
    // highest mean rmse is the bad cluster; on ties the higher id loses, so
    // the lower id keeps label 1
    int bad = 0;
    for (int c = 1; c < k; ++c) {
      if (mean_rmse[static_cast<std::size_t>(c)] >=
          mean_rmse[static_cast<std::size_t>(bad)]) {
        bad = c;
      }
    }
    out.bad_cluster = bad;
  } else if (k == 1 && !any_noise) {
    out.degenerate = true;  // nothing to contrast against; everything stays 1
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    const int id = clustering.cluster_ids[i];
    out.labels[i] = (id < 0 || id == out.bad_cluster) ? 0 : 1;
  }
  return out;
}

}  // namespace tsgraph
