#pragma once

#include <Eigen/Core>

#include <vector>

namespace robustcf {

// Feature vectors live in normalized [0,1]^k space unless a scenario says
// otherwise. All arithmetic is double precision.
using Vector = Eigen::VectorXd;
using PointSet = std::vector<Vector>;

// Binary problems only; labels are 0 and 1.
using Label = int;

}  // namespace robustcf
