#pragma once

#include <Eigen/Dense>

namespace latentconn {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace latentconn
