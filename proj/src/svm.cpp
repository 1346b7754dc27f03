#include "tsgraph/svm.hpp"

#include <stdexcept>

namespace tsgraph {

SvmModel svm_fit(const std::vector<Point2>& points, const std::vector<int>& labels,
                 std::size_t iters, double c) {
  const std::size_t n = points.size();
  if (n == 0 || labels.size() != n) {
    throw std::invalid_argument("svm_fit: labels must match points");
  }
  bool has_pos = false, has_neg = false;
  for (int l : labels) (l == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("svm_fit: training set must contain both classes");
  }

  const double lambda = 1.0 / (c * static_cast<double>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  double w0 = 0.0, w1 = 0.0, b = 0.0;
  double avg0 = 0.0, avg1 = 0.0, avgb = 0.0;
  std::size_t averaged = 0;

  for (std::size_t t = 1; t <= iters; ++t) {
    double g0 = lambda * w0, g1 = lambda * w1, gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = labels[i] == 1 ? 1.0 : -1.0;
      const double margin = y * (w0 * points[i].x + w1 * points[i].y + b);
      if (margin < 1.0) {
        g0 -= inv_n * y * points[i].x;
        g1 -= inv_n * y * points[i].y;
        gb -= inv_n * y;
      }
    }
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    w0 -= eta * g0;
    w1 -= eta * g1;
    b -= eta * gb;
    if (t > iters / 2) {  // tail averaging stabilizes the subgradient iterates
      avg0 += w0;
      avg1 += w1;
      avgb += b;
      ++averaged;
    }
  }

  SvmModel model;
  model.w_rmse = avg0 / static_cast<double>(averaged);
  model.w_mahal = avg1 / static_cast<double>(averaged);
  model.bias = avgb / static_cast<double>(averaged);
  return model;
}

std::vector<int> svm_predict(const SvmModel& model, const std::vector<Point2>& points) {
  std::vector<int> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = model.predict(points[i]);
  return out;
}

std::vector<int> svm_fit_predict(const std::vector<Point2>& train,
                                 const std::vector<int>& train_labels,
                                 const std::vector<Point2>& test, std::size_t iters,
                                 double c) {
  return svm_predict(svm_fit(train, train_labels, iters, c), test);
}

}  // namespace tsgraph
