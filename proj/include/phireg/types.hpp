#pragma once

#include <Eigen/Dense>

namespace phireg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

} // namespace phireg
