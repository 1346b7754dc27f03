#pragma once

#include <filesystem>

#include "tsgraph/clustering.hpp"
#include "tsgraph/metrics.hpp"
#include "tsgraph/scores.hpp"
#include "tsgraph/svm.hpp"
#include "tsgraph/train.hpp"

namespace tsgraph {

enum class ClusterMethod { Kmeans, Dbscan };

struct PipelineOptions {
  char approach = 'A';  // A: re-cluster the test errors; B: SVM on valid labels
  ClusterMethod clusterer = ClusterMethod::Kmeans;
  std::uint64_t seed = 0;
  std::size_t mahalanobis_sub_len = 8;
  std::size_t mahalanobis_stride = 4;
  double mahalanobis_eps_scale = 1e-6;
  std::size_t batch_size = 64;
};

struct PipelineResult {
  Metrics valid_metrics;
  Metrics test_metrics;
  std::vector<ErrorPoint> valid_errors;  // normalized
  std::vector<ErrorPoint> test_errors;   // normalized per the chosen approach
  std::vector<int> valid_pred;
  std::vector<int> test_pred;
  bool degenerate_clustering = false;
};

/// Drops the worst-reconstructed `fraction` of windows by per-window MSE;
/// keeps ceil((1-fraction)*N) windows.
std::vector<Window> refine_training_set(Autoencoder& model,
                                        const std::vector<Window>& train,
                                        double fraction = 0.2,
                                        std::size_t batch_size = 64);

/// Full unsupervised chain: reconstruct, score per window (RMSE +
/// Mahalanobis fitted on the training residuals), aggregate per 5-second
/// slice, normalize on the valid errors set, cluster, and label the test
/// set per approach A or B.
PipelineResult run_pipeline(Autoencoder& model, const std::vector<Window>& train,
                            const std::vector<Window>& valid,
                            const std::vector<Window>& test,
                            const PipelineOptions& opts);

/// `window_id,rmse,mahalanobis,true_label,pred_label` with -1 for a missing
/// true label.
void write_errors_csv(const std::vector<ErrorPoint>& points,
                      const std::vector<int>& pred_labels,
                      const std::filesystem::path& path);
struct ErrorsCsv {
  std::vector<ErrorPoint> points;
  std::vector<int> pred_labels;
};
ErrorsCsv read_errors_csv(const std::filesystem::path& path);

}  // namespace tsgraph
