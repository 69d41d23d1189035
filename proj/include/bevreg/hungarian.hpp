#pragma once

#include <vector>

#include <Eigen/Core>

namespace bevreg {

// Minimum-cost assignment for a rectangular cost matrix (Kuhn-Munkres with
// potentials). Returns, for every row, the assigned column or -1 when there
// are more rows than columns. Costs must be finite.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace bevreg
