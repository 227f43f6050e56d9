#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace polysep {

/// Dense real least-squares problem min ||design * x - rhs||.
/// Complex residuals are stacked as (real, imaginary) row pairs by the caller.
struct LsqProblem {
    Eigen::MatrixXd design;
    Eigen::VectorXd rhs;
    std::vector<std::string> column_labels;
};

struct LsqSolution {
    Eigen::VectorXd x;
    double residual_norm = 0.0;      ///< ||design * x - rhs||
    double condition_estimate = 1.0; ///< sigma_max / smallest retained sigma
    int truncated_rank = 0;          ///< number of retained singular values
};

/// Minimum-norm solution by truncated SVD: singular values below
/// rel_tol * sigma_max are dropped. Throws SeparationError(DegenerateSystem)
/// when every singular value is below 1e-14 * max|entry|.
LsqSolution solve_lsq(const LsqProblem& problem, double rel_tol);

struct HomogeneousSolution {
    Eigen::VectorXd x;         ///< unit vector, first nonzero entry positive
    double smallest_sv = 0.0;
};

/// Unit vector minimizing ||design * x||: the right singular vector of the
/// smallest singular value.
HomogeneousSolution solve_homogeneous(const Eigen::MatrixXd& design);

} // namespace polysep
