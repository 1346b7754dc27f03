#pragma once

#include <cstdint>
#include <vector>

#include "tsgraph/clustering.hpp"

namespace tsgraph {

/// Soft-margin linear SVM on the 2-D errors space; decision value
/// w.p + b, label 1 when nonnegative.
struct SvmModel {
  double w_rmse = 0.0;
  double w_mahal = 0.0;
  double bias = 0.0;

  double decision(const Point2& p) const { return w_rmse * p.x + w_mahal * p.y + bias; }
  int predict(const Point2& p) const { return decision(p) >= 0.0 ? 1 : 0; }
};

/// Deterministic full-batch subgradient descent on the hinge objective
/// (lambda/2)|w|^2 + mean hinge with lambda = 1/(C*N), unregularized bias,
/// 1/(lambda*t) steps, and tail-iterate averaging. Requires both classes.
SvmModel svm_fit(const std::vector<Point2>& points, const std::vector<int>& labels,
                 std::size_t iters = 10000, double c = 1.0);

std::vector<int> svm_predict(const SvmModel& model, const std::vector<Point2>& points);

std::vector<int> svm_fit_predict(const std::vector<Point2>& train,
                                 const std::vector<int>& train_labels,
                                 const std::vector<Point2>& test,
                                 std::size_t iters = 10000, double c = 1.0);

}  // namespace tsgraph
