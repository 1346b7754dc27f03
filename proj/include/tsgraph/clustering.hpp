#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace tsgraph {

struct Point2 {
  double x = 0.0;  // rmse coordinate
  double y = 0.0;  // mahalanobis coordinate
};

/// cluster id per point; -1 marks dbscan noise. Cluster ids are canonical:
/// numbered by the smallest member index.
struct Clustering {
  std::vector<int> cluster_ids;
  int num_clusters = 0;
};

/// Lloyd k-means with k=2 and a D^2-weighted seeded start; runs to an
/// assignment fixpoint or max_iters. Requires two distinct points.
/// objective_trace, when given, records the within-cluster sum of squares
/// after every assignment step.
Clustering kmeans2(const std::vector<Point2>& points, std::uint64_t seed,
                   std::size_t max_iters = 300,
                   std::vector<double>* objective_trace = nullptr);

/// mean pairwise distance + 2 * population std of pairwise distances.
double dbscan_epsilon(const std::vector<Point2>& points);

/// Core points are those with at least min_pts neighbors within eps
/// (counting themselves); clusters are connected components of the core
/// points, border points join their nearest core, the rest is noise (-1).
Clustering dbscan(const std::vector<Point2>& points, std::size_t min_pts = 4);
Clustering dbscan(const std::vector<Point2>& points, std::size_t min_pts, double eps);

/// Binary labels from a clustering: the cluster with the highest mean rmse
/// (ties: higher cluster id) is labeled 0, everything else 1, noise 0.
struct ClusterLabeling {
  Clustering clustering;
  std::vector<int> labels;
  int bad_cluster = -1;
  bool degenerate = false;  // single cluster, no noise: everything labeled 1
};

ClusterLabeling label_clusters(const Clustering& clustering,
                               const std::vector<Point2>& points);

}  // namespace tsgraph
