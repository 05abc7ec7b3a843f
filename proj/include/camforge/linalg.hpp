#pragma once

#include <Eigen/Dense>

namespace camforge {

// Row-major throughout so in-memory layout matches the serialized layout.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

}  // namespace camforge
