#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace tsgraph {

/// One point of the errors set: per-5-second-slice mean scores.
struct ErrorPoint {
  double rmse = 0.0;
  double mahalanobis = 0.0;
  std::size_t window_id = 0;
  std::optional<int> true_label;
};

/// sqrt(mean squared residual) per window.
std::vector<double> rmse_scores(const std::vector<std::vector<double>>& originals,
                                const std::vector<std::vector<double>>& recons);

/// Gaussian model of residual sub-windows: mean, covariance with a diagonal
/// regularizer, and the Cholesky factor of the regularized covariance.
struct MahalanobisModel {
  std::size_t sub_len = 8;
  std::size_t stride = 4;
  double epsilon = 0.0;
  std::vector<double> mean;        // sub_len
  std::vector<double> covariance;  // sub_len x sub_len, unregularized
  std::vector<double> chol;        // lower factor of covariance + epsilon*I

  double distance(const double* sub) const;  // sqrt(d^T (S+eI)^-1 d)
};

/// Sample mean/covariance over length-sub_len windows (offset stride apart)
/// of the given residuals; epsilon = eps_scale * trace(S)/sub_len with a
/// small absolute floor so the factorization always exists.
MahalanobisModel fit_mahalanobis(const std::vector<std::vector<double>>& residuals,
                                 std::size_t sub_len = 8, std::size_t stride = 4,
                                 double eps_scale = 1e-6);

/// Mean Mahalanobis distance of each window's sub-windows.
std::vector<double> mahalanobis_scores(const MahalanobisModel& model,
                                       const std::vector<std::vector<double>>& residuals);

/// Means per 5-second slice: windows sharing a group id are averaged; one
/// ErrorPoint per distinct group id, ordered by id.
std::vector<ErrorPoint> aggregate_scores(const std::vector<double>& rmse,
                                         const std::vector<double>& mahalanobis,
                                         const std::vector<std::size_t>& group_ids,
                                         const std::vector<int>* labels = nullptr);

struct MinMaxNormalizer {
  double rmse_min = 0.0, rmse_max = 1.0;
  double mahal_min = 0.0, mahal_max = 1.0;
};

/// Fitted on the errors Valid set; the fitting set spans [0,1] per
/// coordinate. Out-of-range values on other sets are not clamped.
MinMaxNormalizer fit_normalizer(const std::vector<ErrorPoint>& points);
void apply_normalizer(std::vector<ErrorPoint>& points, const MinMaxNormalizer& n);

}  // namespace tsgraph
