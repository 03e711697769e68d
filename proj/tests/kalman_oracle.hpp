#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Exact filtered means of the local-level model by conditioning the joint
// Gaussian of (x_t, y_1..y_t) directly. Prior x_0 ~ N(m0, p0); the first
// observation is of x_1 = x_0 + w_1.
inline std::vector<double> batch_filtered_means(double m0, double p0, double q, double r, const std::vector<double>& ys) {
  std::vector<double> out;
  const auto n = static_cast<Eigen::Index>(ys.size());
  for (Eigen::Index t = 1; t <= n; ++t) {
    Eigen::MatrixXd syy(t, t);
    Eigen::VectorXd sxy(t), resid(t);
    for (Eigen::Index i = 1; i <= t; ++i) {
      for (Eigen::Index j = 1; j <= t; ++j)
        syy(i - 1, j - 1) = p0 + static_cast<double>(std::min(i, j)) * q + (i == j ? r : 0.0);
      sxy(i - 1) = p0 + static_cast<double>(std::min(t, i)) * q;
      resid(i - 1) = ys[static_cast<std::size_t>(i - 1)] - m0;
    }
    const Eigen::VectorXd w = syy.ldlt().solve(resid);
    out.push_back(m0 + sxy.dot(w));
  }
  return out;
}

}  // namespace oracle
