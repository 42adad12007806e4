#pragma once

#include <Eigen/Dense>

#include <vector>

namespace metabench {

// Samples are rows. Row-major because most per-sample work (kernels,
// neighbours, quantile mapping) walks rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

using Index = Eigen::Index;

}  // namespace metabench
