#include "tsgraph/scores.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace tsgraph {

std::vector<double> rmse_scores(const std::vector<std::vector<double>>& originals,
                                const std::vector<std::vector<double>>& recons) {
  if (originals.size() != recons.size()) {
    throw std::invalid_argument("rmse_scores: window count mismatch");
  }
  std::vector<double> out(originals.size());
  for (std::size_t w = 0; w < originals.size(); ++w) {
    if (originals[w].size() != recons[w].size() || originals[w].empty()) {
      throw std::invalid_argument("rmse_scores: window shape mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < originals[w].size(); ++i) {
      const double d = originals[w][i] - recons[w][i];
      acc += d * d;
    }
    out[w] = std::sqrt(acc / static_cast<double>(originals[w].size()));
  }
  return out;
}

namespace {

// lower-triangular Cholesky of a dense SPD matrix
std::vector<double> cholesky(const std::vector<double>& a, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) acc -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        if (acc <= 0.0) {
          throw std::runtime_error("cholesky: matrix not positive definite");
        }
        l[i * n + j] = std::sqrt(acc);
      } else {
        l[i * n + j] = acc / l[j * n + j];
      }
    }
  }
  return l;
}

void for_each_subwindow(const std::vector<double>& window, std::size_t sub_len,
                        std::size_t stride, const std::function<void(const double*)>& fn) {
  if (window.size() < sub_len) return;
  for (std::size_t off = 0; off + sub_len <= window.size(); off += stride) {
    fn(window.data() + off);
  }
}

}  // namespace

double MahalanobisModel::distance(const double* sub) const {
  const std::size_t n = sub_len;
  // forward substitution: L y = (sub - mean); distance = |y|
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = sub[i] - mean[i];
    for (std::size_t k = 0; k < i; ++k) acc -= chol[i * n + k] * y[k];
    y[i] = acc / chol[i * n + i];
  }
  double sq = 0.0;
  for (double v : y) sq += v * v;
  return std::sqrt(sq);
}

MahalanobisModel fit_mahalanobis(const std::vector<std::vector<double>>& residuals,
                                 std::size_t sub_len, std::size_t stride,
                                 double eps_scale) {
  if (sub_len < 1 || stride < 1) {
    throw std::invalid_argument("fit_mahalanobis: bad sub-window parameters");
  }
  MahalanobisModel model;
  model.sub_len = sub_len;
  model.stride = stride;
  model.mean.assign(sub_len, 0.0);
  model.covariance.assign(sub_len * sub_len, 0.0);

  std::size_t count = 0;
  for (const auto& window : residuals) {
    for_each_subwindow(window, sub_len, stride, [&](const double* sub) {
      for (std::size_t i = 0; i < sub_len; ++i) model.mean[i] += sub[i];
      ++count;
    });
  }
  if (count < sub_len + 1) {
    throw std::invalid_argument("fit_mahalanobis: too few sub-windows");
  }
  for (double& m : model.mean) m /= static_cast<double>(count);

  for (const auto& window : residuals) {
    for_each_subwindow(window, sub_len, stride, [&](const double* sub) {
      for (std::size_t i = 0; i < sub_len; ++i) {
        const double di = sub[i] - model.mean[i];
        for (std::size_t j = 0; j <= i; ++j) {
          model.covariance[i * sub_len + j] += di * (sub[j] - model.mean[j]);
        }
      }
    });
  }
  for (std::size_t i = 0; i < sub_len; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      model.covariance[i * sub_len + j] /= static_cast<double>(count);
      model.covariance[j * sub_len + i] = model.covariance[i * sub_len + j];
    }
  }

  double trace = 0.0;
  for (std::size_t i = 0; i < sub_len; ++i) trace += model.covariance[i * sub_len + i];
  model.epsilon = std::max(eps_scale * trace / static_cast<double>(sub_len), 1e-12);

  std::vector<double> reg = model.covariance;
  for (std::size_t i = 0; i < sub_len; ++i) reg[i * sub_len + i] += model.epsilon;
  model.chol = cholesky(reg, sub_len);
  return model;
}

std::vector<double> mahalanobis_scores(const MahalanobisModel& model,
                                       const std::vector<std::vector<double>>& residuals) {
  if (model.chol.empty()) throw std::invalid_argument("mahalanobis_scores: model not fitted");
  std::vector<double> out(residuals.size(), 0.0);
  for (std::size_t w = 0; w < residuals.size(); ++w) {
    double acc = 0.0;
    std::size_t count = 0;
    for_each_subwindow(residuals[w], model.sub_len, model.stride,
                       [&](const double* sub) {
                         acc += model.distance(sub);
                         ++count;
                       });
    if (count == 0) {
      throw std::invalid_argument("mahalanobis_scores: window shorter than sub-window");
    }
    out[w] = acc / static_cast<double>(count);
  }
  return out;
}

std::vector<ErrorPoint> aggregate_scores(const std::vector<double>& rmse,
                                         const std::vector<double>& mahalanobis,
                                         const std::vector<std::size_t>& group_ids,
                                         const std::vector<int>* labels) {
  if (rmse.size() != mahalanobis.size() || rmse.size() != group_ids.size() ||
      (labels && labels->size() != rmse.size())) {
    throw std::invalid_argument("aggregate_scores: input length mismatch");
  }
  if (rmse.empty()) throw std::invalid_argument("aggregate_scores: empty input");

  struct Acc {
    double rmse = 0.0, mahal = 0.0;
    std::size_t n = 0;
    std::optional<int> label;
  };
  std::map<std::size_t, Acc> groups;
  for (std::size_t i = 0; i < rmse.size(); ++i) {
    Acc& a = groups[group_ids[i]];
    a.rmse += rmse[i];
    a.mahal += mahalanobis[i];
    a.n += 1;
    if (labels && !a.label) a.label = (*labels)[i];
  }
  std::vector<ErrorPoint> out;
  out.reserve(groups.size());
  for (const auto& [gid, acc] : groups) {
    ErrorPoint p;
    p.window_id = gid;
    p.rmse = acc.rmse / static_cast<double>(acc.n);
    p.mahalanobis = acc.mahal / static_cast<double>(acc.n);
    p.true_label = acc.label;
    out.push_back(p);
  }
  return out;
}

MinMaxNormalizer fit_normalizer(const std::vector<ErrorPoint>& points) {
  if (points.empty()) throw std::invalid_argument("fit_normalizer: empty errors set");
  MinMaxNormalizer n;
  n.rmse_min = n.rmse_max = points[0].rmse;
  n.mahal_min = n.mahal_max = points[0].mahalanobis;
  for (const ErrorPoint& p : points) {
    n.rmse_min = std::min(n.rmse_min, p.rmse);
    n.rmse_max = std::max(n.rmse_max, p.rmse);
    n.mahal_min = std::min(n.mahal_min, p.mahalanobis);
    n.mahal_max = std::max(n.mahal_max, p.mahalanobis);
  }
  return n;
}

void apply_normalizer(std::vector<ErrorPoint>& points, const MinMaxNormalizer& n) {
  const double rspan = n.rmse_max - n.rmse_min;
  const double mspan = n.mahal_max - n.mahal_min;
  for (ErrorPoint& p : points) {
    p.rmse = rspan > 0.0 ? (p.rmse - n.rmse_min) / rspan : 0.0;
    p.mahalanobis = mspan > 0.0 ? (p.mahalanobis - n.mahal_min) / mspan : 0.0;
  }
}

}  // namespace tsgraph
