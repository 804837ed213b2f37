#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cflow {

// Minimum-cost perfect assignment on a square cost matrix (shortest
// augmenting paths with potentials, O(n^3)). result[row] = assigned column.
std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost);

} // namespace cflow
