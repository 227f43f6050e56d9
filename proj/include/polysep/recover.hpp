#pragma once

#include "polysep/identify.hpp"
#include "polysep/polyalg.hpp"
#include "polysep/signalkit.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace polysep {

struct KFunctions {
    Polynomial K1, K2, K3;
};

/// K1 = A, K2 = B + A', K3 = C.
KFunctions build_k(const OdeCoefficients& coeffs);

inline constexpr double default_k1_floor = 0.02;

/// Pointwise symmetric functions of the two generators and the tracked roots.
struct VietaSamples {
    Grid grid{Grid::min_size};
    Field field = Field::real;
    std::vector<Scalar> s_sum;  ///< P1 + P2
    std::vector<Scalar> s_prod; ///< P1 * P2
    std::vector<Scalar> s1, s2; ///< roots, tracked by continuity
    std::vector<bool> valid;
    /// Run index of the node among the contiguous stretches that pass the K1
    /// floor; -1 below the floor. Generators can only cross where K1 vanishes,
    /// so the branch labeling is fixed within a run.
    std::vector<int> segment;
    std::vector<bool> clamped; ///< real field: small negative discriminant set to zero

    std::size_t valid_count() const;
    int segment_count() const;
};

/// Throws SeparationError(AllNodesMasked) when no node passes the K1 floor.
VietaSamples vieta_extract(const KFunctions& k, const Grid& grid, double k1_floor = default_k1_floor,
                           Field field = Field::real);

/// Assignment of tracked branches to components chosen by the fits.
struct BranchLabeling {
    bool swapped = false;           ///< component 1 took branch s2 on segment 0
    std::vector<bool> segment_flip; ///< per segment: branches exchanged relative to segment 0
    std::string note;
};

struct PolynomialFit {
    std::vector<double> p1, p2;
    std::array<double, 2> residuals{}; ///< RMS of |mu P_i - s_i| over valid nodes
    BranchLabeling labeling;
};

/// Throws SeparationError(InsufficientNodes) with fewer than max(N1, N2) + 2 valid nodes.
PolynomialFit fit_polynomial_generators(const VietaSamples& v, int n1, int n2, Scalar mu1, Scalar mu2);

struct RationalFit {
    std::vector<double> p1, p2;
    std::vector<double> q1, q2; ///< full denominators, leading coefficient pinned to 1
    std::array<double, 2> residuals{};
    BranchLabeling labeling;
};

/// Per branch: mu sum_j p_j t^j - sum_{j<Nq} q_j t^j s(t) = t^Nq s(t) in least squares.
/// Throws InsufficientNodes, or PolesDetected when a fitted denominator has a
/// root within 1e-3 of [0, 1].
RationalFit fit_rational_generators(const VietaSamples& v, int np1, int nq1, int np2, int nq2,
                                    Scalar mu1, Scalar mu2);

struct AmplitudeFit {
    Scalar a1{}, a2{};
    double residual = 0.0;       ///< ||F - a1 b1 - a2 b2|| / ||F||
    double gram_condition = 1.0; ///< condition number of the 2x2 normal matrix
};

inline constexpr double max_gram_condition = 1e12;

/// Basis b_i = rk4_solve(P_i) and the least-squares amplitudes.
/// Throws SeparationError(NearDependentBasis) above max_gram_condition.
AmplitudeFit recover_amplitudes(const Signal& F, const Generator& P1, const Generator& P2);
/// Same fit against precomputed basis signals.
AmplitudeFit fit_amplitudes(const Signal& F, const Signal& b1, const Signal& b2);

/// Per-stage diagnostics of a separation run.
struct PipelineDiagnostics {
    Gauge gauge = Gauge::L0_unit;
    IdentifyDiagnostics identify;
    bool widened_b = false;
    double valid_fraction = 0.0;
    std::size_t clamped_nodes = 0;
    int k1_segments = 0;
    double amplitude_gram_condition = 1.0;
};

/// Output of the full separation.
struct SeparationResult {
    std::vector<double> p1, p2;
    Scalar mu1{1.0}, mu2{1.0};
    std::optional<std::vector<double>> q1, q2;
    Scalar a1{}, a2{};
    std::array<double, 2> fit_residuals{};
    double reconstruction_residual = 0.0;
    BranchLabeling labeling;
    std::string permutation_note = "component labels 1/2 are interchangeable";
    PipelineDiagnostics diagnostics;

    Generator generator(int component) const;
};

} // namespace polysep
