#pragma once

#include "polysep/linsolve.hpp"
#include "polysep/polyalg.hpp"
#include "polysep/signalkit.hpp"

#include <string>

namespace polysep {

/// Degrees of A, B, C in the second-order equation for a mixture of
/// generators of degree N1 >= N2.
///
/// B uses N1 + N2 when N1 == N2. Otherwise the generic expansion of
/// B = (P2^2 - P1^2) - (P2 - P1)' can reach 2 N1, so that bound is used and
/// `widened_b()` reports it.
class DegreePlan {
public:
    /// Throws SeparationError(InvalidSpec) unless N1 >= N2 >= 0.
    DegreePlan(int n1, int n2);

    int n1() const noexcept { return n1_; }
    int n2() const noexcept { return n2_; }
    int deg_a() const noexcept { return n1_; }
    int deg_b() const noexcept { return n1_ == n2_ ? n1_ + n2_ : 2 * n1_; }
    int deg_c() const noexcept { return 2 * n1_ + n2_; }
    bool widened_b() const noexcept { return n1_ != n2_; }

    /// Coefficient count of A, B, C plus one for L1.
    int unknowns() const noexcept { return deg_a() + deg_b() + deg_c() + 4; }

private:
    int n1_, n2_;
};

enum class Gauge { L0_unit, homogeneous };
enum class GaugePolicy { automatic, L0_unit, homogeneous };

std::string_view to_string(Gauge g);

struct IdentifyDiagnostics {
    double residual_norm = 0.0;
    double condition_estimate = 1.0;
    int truncated_rank = 0;
    double l0_unit_residual = 0.0; ///< residual of the L0 = 1 attempt, when made
};

struct OdeCoefficients {
    Polynomial A, B, C;
    Scalar L1{};
    Scalar L0{1.0};
    Gauge gauge = Gauge::L0_unit;
    Field field = Field::real;
    bool widened_b = false;
    IdentifyDiagnostics diagnostics;
};

struct IdentifyOptions {
    GaugePolicy gauge = GaugePolicy::automatic;
    /// L0 = 1 residual above which the automatic policy re-solves homogeneously.
    double gauge_failure_threshold = 0.5;
    Quadrature quadrature = Quadrature::trapezoid;
};

/// Weighted least-squares form of the twice-integrated equation
///   A F + int (B - 2A') F + int int (C - B' + A'') F + L1 t = L0
/// with L0 = 1 on the right-hand side. One row per node (a real/imaginary
/// pair for complex signals), scaled by the square root of the trapezoid weight.
LsqProblem build_design(const Signal& F, const DegreePlan& plan, Quadrature rule = Quadrature::trapezoid);

OdeCoefficients identify_ode(const Signal& F, const DegreePlan& plan, double rel_tol,
                             const IdentifyOptions& options = {});

/// Weighted residual norm of the integral equation for given coefficients,
/// assembled directly from the polynomials (independent of build_design).
double integral_equation_residual(const Signal& F, const OdeCoefficients& coeffs,
                                  Quadrature rule = Quadrature::trapezoid);

/// A, B, C coefficients (and L1, L0) concatenated, in that order.
std::vector<Scalar> coefficient_vector(const OdeCoefficients& coeffs, const DegreePlan& plan,
                                       bool with_constants = false);

} // namespace polysep
