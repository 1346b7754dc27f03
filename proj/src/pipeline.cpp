#include "tsgraph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tsgraph {

namespace {

std::vector<std::vector<double>> residuals_of(const std::vector<Window>& windows,
                                              const std::vector<std::vector<double>>& recons) {
  std::vector<std::vector<double>> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    out[i].resize(windows[i].values.size());
    for (std::size_t j = 0; j < out[i].size(); ++j) {
      out[i][j] = windows[i].values[j] - recons[i][j];
    }
  }
  return out;
}

struct ScoredSet {
  std::vector<ErrorPoint> points;  // unnormalized, per 5-second slice
};

ScoredSet score_set(Autoencoder& model, const std::vector<Window>& windows,
                    const MahalanobisModel& mahal, std::size_t batch_size) {
  auto recons = reconstruct_windows(model, windows, batch_size);
  std::vector<std::vector<double>> originals(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) originals[i] = windows[i].values;
  auto rmse = rmse_scores(originals, recons);
  auto mahal_scores_v = mahalanobis_scores(mahal, residuals_of(windows, recons));
  std::vector<std::size_t> groups(windows.size());
  std::vector<int> labels(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    groups[i] = windows[i].group_id;
    labels[i] = windows[i].label;
  }
  return {aggregate_scores(rmse, mahal_scores_v, groups, &labels)};
}

std::vector<Point2> to_points(const std::vector<ErrorPoint>& eps) {
  std::vector<Point2> out(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) out[i] = {eps[i].rmse, eps[i].mahalanobis};
  return out;
}

std::vector<int> true_labels_of(const std::vector<ErrorPoint>& eps) {
  std::vector<int> out(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) out[i] = eps[i].true_label.value_or(1);
  return out;
}

ClusterLabeling cluster_and_label(const std::vector<Point2>& pts,
                                  const PipelineOptions& opts) {
  Clustering clustering = opts.clusterer == ClusterMethod::Kmeans
                              ? kmeans2(pts, opts.seed)
                              : dbscan(pts, /*min_pts=*/4);
  return label_clusters(clustering, pts);
}

}  // namespace

std::vector<Window> refine_training_set(Autoencoder& model,
                                        const std::vector<Window>& train,
                                        double fraction, std::size_t batch_size) {
  if (train.empty()) throw std::invalid_argument("refine_training_set: empty set");
  if (fraction < 0.0 || fraction >= 1.0) {
    throw std::invalid_argument("refine_training_set: fraction must lie in [0,1)");
  }
  if (fraction == 0.0) return train;
  auto recons = reconstruct_windows(model, train, batch_size);
  std::vector<double> loss(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < train[i].values.size(); ++j) {
      const double d = train[i].values[j] - recons[i][j];
      acc += d * d;
    }
    loss[i] = acc / static_cast<double>(train[i].values.size());
  }
  const std::size_t keep =
      static_cast<std::size_t>(std::ceil((1.0 - fraction) * static_cast<double>(train.size())));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return loss[a] < loss[b]; });
  order.resize(keep);
  std::sort(order.begin(), order.end());  // keep the original window order
  std::vector<Window> out;
  out.reserve(keep);
  for (std::size_t i : order) out.push_back(train[i]);
  return out;
}

PipelineResult run_pipeline(Autoencoder& model, const std::vector<Window>& train,
                            const std::vector<Window>& valid,
                            const std::vector<Window>& test,
                            const PipelineOptions& opts) {
  if (train.empty() || valid.empty() || test.empty()) {
    throw std::invalid_argument("run_pipeline: all three sets must be nonempty");
  }
  if (opts.approach != 'A' && opts.approach != 'B') {
    throw std::invalid_argument("run_pipeline: approach must be A or B");
  }

  // Mahalanobis statistics come from the training reconstructions
  auto train_recons = reconstruct_windows(model, train, opts.batch_size);
  MahalanobisModel mahal =
      fit_mahalanobis(residuals_of(train, train_recons), opts.mahalanobis_sub_len,
                      opts.mahalanobis_stride, opts.mahalanobis_eps_scale);

  PipelineResult result;
  ScoredSet valid_scored = score_set(model, valid, mahal, opts.batch_size);
  ScoredSet test_scored = score_set(model, test, mahal, opts.batch_size);

  const MinMaxNormalizer valid_norm = fit_normalizer(valid_scored.points);
  result.valid_errors = valid_scored.points;
  apply_normalizer(result.valid_errors, valid_norm);

  const auto valid_pts = to_points(result.valid_errors);
  ClusterLabeling valid_labeling = cluster_and_label(valid_pts, opts);
  result.valid_pred = valid_labeling.labels;
  result.degenerate_clustering = valid_labeling.degenerate;
  result.valid_metrics =
      evaluate_binary(result.valid_pred, true_labels_of(result.valid_errors));

  if (opts.approach == 'A') {
    // repeat the valid-set procedure on the test set on its own
    result.test_errors = test_scored.points;
    const MinMaxNormalizer test_norm = fit_normalizer(result.test_errors);
    apply_normalizer(result.test_errors, test_norm);
    ClusterLabeling test_labeling = cluster_and_label(to_points(result.test_errors), opts);
    result.test_pred = test_labeling.labels;
    result.degenerate_clustering =
        result.degenerate_clustering || test_labeling.degenerate;
  } else {
    // approach B: valid-set normalizers, SVM trained on the cluster labels
    result.test_errors = test_scored.points;
    apply_normalizer(result.test_errors, valid_norm);
    result.test_pred =
        svm_fit_predict(valid_pts, result.valid_pred, to_points(result.test_errors));
  }
  result.test_metrics =
      evaluate_binary(result.test_pred, true_labels_of(result.test_errors));
  return result;
}

void write_errors_csv(const std::vector<ErrorPoint>& points,
                      const std::vector<int>& pred_labels,
                      const std::filesystem::path& path) {
  if (points.size() != pred_labels.size()) {
    throw std::invalid_argument("write_errors_csv: label count mismatch");
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_errors_csv: cannot open " + path.string());
  os.precision(17);
  os << "window_id,rmse,mahalanobis,true_label,pred_label\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    os << points[i].window_id << ',' << points[i].rmse << ',' << points[i].mahalanobis
       << ',' << (points[i].true_label ? *points[i].true_label : -1) << ','
       << pred_labels[i] << '\n';
  }
}

ErrorsCsv read_errors_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_errors_csv: cannot open " + path.string());
  ErrorsCsv out;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_errors_csv: empty file");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ErrorPoint p;
    int true_label = -1, pred = 0;
    char comma;
    if (!(ls >> p.window_id >> comma >> p.rmse >> comma >> p.mahalanobis >> comma >>
          true_label >> comma >> pred)) {
      throw std::runtime_error("read_errors_csv: malformed line: " + line);
    }
    if (true_label >= 0) p.true_label = true_label;
    out.points.push_back(p);
    out.pred_labels.push_back(pred);
  }
  return out;
}

}  // namespace tsgraph
