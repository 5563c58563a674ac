#pragma once

#include <Eigen/Dense>

namespace sposkit {

using Vector = Eigen::VectorXd;
// Particle arrays are stored one particle per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorRef = Eigen::Ref<const Vector>;

}  // namespace sposkit
