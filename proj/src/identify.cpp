#include "polysep/identify.hpp"

#include "polysep/error.hpp"

#include <algorithm>
#include <cmath>

namespace polysep {

namespace {

struct ComplexBasis {
    std::vector<std::vector<Scalar>> columns;
    std::vector<std::string> labels;
};

std::vector<double> row_weights(const Grid& grid) {
    std::vector<double> w(grid.size(), std::sqrt(grid.step()));
    w.front() = w.back() = std::sqrt(0.5 * grid.step());
    return w;
}

// Integral-equation basis: one complex column per coefficient of A, B, C plus L1.
ComplexBasis assemble_basis(const Signal& F, const DegreePlan& plan, Quadrature rule) {
    const int da = plan.deg_a(), db = plan.deg_b(), dc = plan.deg_c();
    const int k1 = std::max(da - 1, db);
    const int k2 = std::max({da - 2, db - 1, dc});
    const auto mom = moment_integrals(F, std::max(k1, 0), std::max(k2, 0), rule);
    const auto t = F.grid().nodes();
    const std::size_t n = F.size();

    ComplexBasis basis;
    auto add = [&](std::string label, auto&& value) {
        std::vector<Scalar> col(n);
        for (std::size_t m = 0; m < n; ++m) col[m] = value(m);
        basis.columns.push_back(std::move(col));
        basis.labels.push_back(std::move(label));
    };

    for (int k = 0; k <= da; ++k) {
        add("alpha_" + std::to_string(k), [&](std::size_t m) {
            Scalar v = std::pow(t[m], k) * F[m];
            if (k >= 1) v -= 2.0 * k * mom.single[k - 1][m];
            if (k >= 2) v += static_cast<double>(k * (k - 1)) * mom.dbl[k - 2][m];
            return v;
        });
    }
    for (int k = 0; k <= db; ++k) {
        add("beta_" + std::to_string(k), [&](std::size_t m) {
            Scalar v = mom.single[k][m];
            if (k >= 1) v -= static_cast<double>(k) * mom.dbl[k - 1][m];
            return v;
        });
    }
    for (int k = 0; k <= dc; ++k)
        add("gamma_" + std::to_string(k), [&](std::size_t m) { return mom.dbl[k][m]; });
    add("L1", [&](std::size_t m) { return Scalar{t[m]}; });
    return basis;
}

// Realification: a complex unknown z = x + iy multiplying column v gives
// rows (Re, Im) = (x vr - y vi, x vi + y vr).
Eigen::MatrixXd realify(const ComplexBasis& basis, Field field, const std::vector<double>& w,
                        std::vector<std::string>* labels) {
    const std::size_t n = w.size();
    const Eigen::Index cols = static_cast<Eigen::Index>(basis.columns.size());
    if (field == Field::real) {
        Eigen::MatrixXd D(n, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (std::size_t m = 0; m < n; ++m) D(m, c) = w[m] * basis.columns[c][m].real();
        if (labels) *labels = basis.labels;
        return D;
    }
    Eigen::MatrixXd D(2 * n, 2 * cols);
    if (labels) labels->clear();
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (std::size_t m = 0; m < n; ++m) {
            const Scalar v = w[m] * basis.columns[c][m];
            D(2 * m, 2 * c) = v.real();
            D(2 * m + 1, 2 * c) = v.imag();
            D(2 * m, 2 * c + 1) = -v.imag();
            D(2 * m + 1, 2 * c + 1) = v.real();
        }
        if (labels) {
            labels->push_back(basis.labels[c] + ".re");
            labels->push_back(basis.labels[c] + ".im");
        }
    }
    return D;
}

Eigen::VectorXd gauge_rhs(Field field, const std::vector<double>& w) {
    const std::size_t n = w.size();
    if (field == Field::real) return Eigen::Map<const Eigen::VectorXd>(w.data(), n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n);
    for (std::size_t m = 0; m < n; ++m) b(2 * m) = w[m];
    return b;
}

std::vector<Scalar> complexify(const Eigen::VectorXd& x, Field field) {
    std::vector<Scalar> z;
    if (field == Field::real) {
        z.assign(x.data(), x.data() + x.size());
    } else {
        for (Eigen::Index j = 0; j + 1 < x.size(); j += 2) z.emplace_back(x(j), x(j + 1));
    }
    return z;
}

Eigen::VectorXd column_scales(const Eigen::MatrixXd& D) {
    Eigen::VectorXd s(D.cols());
    for (Eigen::Index c = 0; c < D.cols(); ++c) {
        const double nrm = D.col(c).norm();
        s(c) = nrm > 0.0 ? 1.0 / nrm : 1.0;
    }
    return s;
}

OdeCoefficients unpack(const std::vector<Scalar>& z, const DegreePlan& plan, Field field) {
    OdeCoefficients out;
    out.field = field;
    out.widened_b = plan.widened_b();
    auto it = z.begin();
    auto take = [&](int deg) {
        std::vector<Scalar> c(it, it + deg + 1);
        it += deg + 1;
        return Polynomial(std::move(c));
    };
    out.A = take(plan.deg_a());
    out.B = take(plan.deg_b());
    out.C = take(plan.deg_c());
    out.L1 = *it++;
    out.L0 = it != z.end() ? *it : Scalar{1.0};
    return out;
}

double coeff_norm(const Polynomial& p) {
    double acc = 0.0;
    for (auto c : p.coeffs()) acc += std::norm(c);
    return std::sqrt(acc);
}

} // namespace

DegreePlan::DegreePlan(int n1, int n2) : n1_(n1), n2_(n2) {
    if (n2 < 0 || n1 < n2)
        throw SeparationError(ErrorCode::InvalidSpec, "degree plan needs N1 >= N2 >= 0");
}

std::string_view to_string(Gauge g) {
    return g == Gauge::L0_unit ? "L0_unit" : "homogeneous";
}

LsqProblem build_design(const Signal& F, const DegreePlan& plan, Quadrature rule) {
    const auto w = row_weights(F.grid());
    LsqProblem p;
    p.design = realify(assemble_basis(F, plan, rule), F.field(), w, &p.column_labels);
    p.rhs = gauge_rhs(F.field(), w);
    return p;
}

OdeCoefficients identify_ode(const Signal& F, const DegreePlan& plan, double rel_tol,
                             const IdentifyOptions& options) {
    if (F.max_abs() == 0.0)
        throw SeparationError(ErrorCode::DegenerateSystem, "signal is identically zero");

    const LsqProblem problem = build_design(F, plan, options.quadrature);
    const Field field = F.field();
    const Eigen::VectorXd scales = column_scales(problem.design);
    const Eigen::MatrixXd scaled = problem.design * scales.asDiagonal();

    OdeCoefficients out;
    bool solved = false;
    double l0_residual = 0.0;

    if (options.gauge != GaugePolicy::homogeneous) {
        const LsqSolution sol = solve_lsq({scaled, problem.rhs, problem.column_labels}, rel_tol);
        const Eigen::VectorXd x = scales.cwiseProduct(sol.x);
        l0_residual = sol.residual_norm;
        if (options.gauge == GaugePolicy::L0_unit || sol.residual_norm <= options.gauge_failure_threshold) {
            out = unpack(complexify(x, field), plan, field);
            out.gauge = Gauge::L0_unit;
            out.diagnostics = {sol.residual_norm, sol.condition_estimate, sol.truncated_rank, l0_residual};
            solved = true;
        }
    }

    if (!solved) {
        // L0 joins the unknowns as the coefficient of the negated gauge column.
        const Eigen::Index extra = field == Field::real ? 1 : 2;
        Eigen::MatrixXd H(problem.design.rows(), problem.design.cols() + extra);
        H.leftCols(problem.design.cols()) = problem.design;
        H.col(problem.design.cols()) = -problem.rhs;
        if (field == Field::complex) {
            Eigen::VectorXd im_col = Eigen::VectorXd::Zero(problem.rhs.size());
            for (Eigen::Index r = 0; r + 1 < im_col.size(); r += 2) im_col(r + 1) = -problem.rhs(r);
            H.col(problem.design.cols() + 1) = im_col;
        }
        const Eigen::VectorXd hs = column_scales(H);
        const HomogeneousSolution sol = solve_homogeneous(H * hs.asDiagonal());
        Eigen::VectorXd x = hs.cwiseProduct(sol.x);
        x.normalize();

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(H * hs.asDiagonal());
        const auto& sv = svd.singularValues();
        int rank = 0;
        while (rank < sv.size() && sv(rank) >= rel_tol * sv(0)) ++rank;

        out = unpack(complexify(x, field), plan, field);
        out.gauge = Gauge::homogeneous;
        out.diagnostics.residual_norm = (H * x).norm();
        out.diagnostics.condition_estimate = rank > 0 ? sv(0) / sv(rank - 1) : 1.0;
        out.diagnostics.truncated_rank = rank;
        out.diagnostics.l0_unit_residual = l0_residual;
    }

    const double a_norm = coeff_norm(out.A);
    const double all_norm = std::sqrt(a_norm * a_norm + std::pow(coeff_norm(out.B), 2) +
                                      std::pow(coeff_norm(out.C), 2));
    if (!(a_norm > 1e-10 * all_norm))
        throw SeparationError(ErrorCode::ZeroLeadingOperator, "recovered A is identically zero");
    return out;
}

double integral_equation_residual(const Signal& F, const OdeCoefficients& coeffs, Quadrature rule) {
    const Grid& grid = F.grid();
    const std::size_t n = F.size();
    const Polynomial dA = derivative(coeffs.A);
    const Polynomial single_weight = coeffs.B - 2.0 * dA;
    const Polynomial double_weight = coeffs.C - derivative(coeffs.B) + derivative(dA);

    std::vector<Scalar> g1(n), g2(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double t = grid.node(m);
        g1[m] = single_weight(t) * F[m];
        g2[m] = double_weight(t) * F[m];
    }
    const Signal once = cumulative_integral(Signal(grid, std::move(g1), Field::complex), rule);
    const Signal twice =
        cumulative_integral(cumulative_integral(Signal(grid, std::move(g2), Field::complex), rule), rule);

    const auto w = row_weights(grid);
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double t = grid.node(m);
        const Scalar r = coeffs.A(t) * F[m] + once[m] + twice[m] + coeffs.L1 * t - coeffs.L0;
        acc += w[m] * w[m] * std::norm(r);
    }
    return std::sqrt(acc);
}

std::vector<Scalar> coefficient_vector(const OdeCoefficients& coeffs, const DegreePlan& plan,
                                       bool with_constants) {
    std::vector<Scalar> v;
    for (int k = 0; k <= plan.deg_a(); ++k) v.push_back(coeffs.A[k]);
    for (int k = 0; k <= plan.deg_b(); ++k) v.push_back(coeffs.B[k]);
    for (int k = 0; k <= plan.deg_c(); ++k) v.push_back(coeffs.C[k]);
    if (with_constants) {
        v.push_back(coeffs.L1);
        v.push_back(coeffs.L0);
    }
    return v;
}

} // namespace polysep
