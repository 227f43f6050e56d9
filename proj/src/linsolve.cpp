#include "polysep/linsolve.hpp"

#include "polysep/error.hpp"

#include <cmath>

namespace polysep {

namespace {

// The step-1 designs reach condition numbers near 1e9; factoring in extended
// precision keeps the rounding of the solve well below that of the data.
using WideMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using WideVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

void require_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite())
        throw SeparationError(ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
}

} // namespace

LsqSolution solve_lsq(const LsqProblem& problem, double rel_tol) {
    const auto& A = problem.design;
    const auto& b = problem.rhs;
    if (A.rows() != b.size())
        throw SeparationError(ErrorCode::InvalidSpec, "design rows and rhs length differ");
    if (A.rows() < A.cols())
        throw SeparationError(ErrorCode::InvalidSpec, "least-squares problem is underdetermined");
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw SeparationError(ErrorCode::InvalidSpec, "rel_tol must lie in (0, 1)");
    require_finite(A, "design");
    require_finite(b, "rhs");

    const double max_entry = A.size() > 0 ? A.cwiseAbs().maxCoeff() : 0.0;
    const WideMatrix Aw = A.cast<long double>();
    Eigen::JacobiSVD<WideMatrix> svd(Aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const WideVector sv = svd.singularValues();
    if (max_entry == 0.0 || sv.size() == 0 || sv(0) < 1e-14L * max_entry)
        throw SeparationError(ErrorCode::DegenerateSystem, "all singular values below the absolute floor");

    const long double cutoff = rel_tol * sv(0);
    int rank = 0;
    while (rank < sv.size() && sv(rank) >= cutoff) ++rank;

    const WideVector Utb = svd.matrixU().leftCols(rank).transpose() * b.cast<long double>();
    const WideVector y = Utb.cwiseQuotient(sv.head(rank));

    LsqSolution out;
    out.x = (svd.matrixV().leftCols(rank) * y).cast<double>();
    out.residual_norm = (A * out.x - b).norm();
    out.condition_estimate = static_cast<double>(sv(0) / sv(rank - 1));
    out.truncated_rank = rank;
    return out;
}

HomogeneousSolution solve_homogeneous(const Eigen::MatrixXd& design) {
    if (design.cols() == 0)
        throw SeparationError(ErrorCode::InvalidSpec, "homogeneous problem has no unknowns");
    if (design.rows() + 1 < design.cols())
        throw SeparationError(ErrorCode::InvalidSpec, "homogeneous problem needs rows >= cols - 1");
    require_finite(design, "design");

    const WideMatrix Dw = design.cast<long double>();
    Eigen::JacobiSVD<WideMatrix> svd(Dw, Eigen::ComputeFullV);
    const WideVector sv = svd.singularValues();
    const Eigen::Index last = design.cols() - 1;

    HomogeneousSolution out;
    out.x = svd.matrixV().col(last).cast<double>();
    // Singular values come sorted; fewer rows than columns means an exact null vector.
    out.smallest_sv = sv.size() == design.cols() ? static_cast<double>(sv(last)) : 0.0;
    out.x.normalize();

    const double scale = out.x.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < out.x.size(); ++j) {
        if (std::abs(out.x(j)) > 1e-12 * scale) {
            if (out.x(j) < 0.0) out.x = -out.x;
            break;
        }
    }
    return out;
}

} // namespace polysep
