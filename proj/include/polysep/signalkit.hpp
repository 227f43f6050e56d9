#pragma once

#include "polysep/polyalg.hpp"

#include <cstdint>
#include <vector>

namespace polysep {

/// Uniform grid on [0, 1] with both endpoints included.
class Grid {
public:
    static constexpr std::size_t min_size = 16;

    /// Throws SeparationError(InvalidSpec) for n < min_size.
    explicit Grid(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    double step() const noexcept { return 1.0 / static_cast<double>(n_ - 1); }
    /// t_m = m / (n - 1); t_0 = 0 and t_{n-1} = 1 exactly.
    double node(std::size_t m) const noexcept {
        return static_cast<double>(m) / static_cast<double>(n_ - 1);
    }
    std::vector<double> nodes() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t n_;
};

/// Samples of a Scalar-valued function on a Grid. All samples are finite,
/// and a real-field signal has zero imaginary parts.
class Signal {
public:
    Signal(Grid grid, std::vector<Scalar> samples, Field field = Field::real);

    const Grid& grid() const noexcept { return grid_; }
    Field field() const noexcept { return field_; }
    std::size_t size() const noexcept { return samples_.size(); }
    std::span<const Scalar> samples() const noexcept { return samples_; }
    Scalar operator[](std::size_t m) const { return samples_[m]; }

    double max_abs() const;
    /// Discrete L2 norm, sqrt(sum |F_m|^2).
    double norm() const;

private:
    Grid grid_;
    std::vector<Scalar> samples_;
    Field field_;
};

Signal operator+(const Signal& a, const Signal& b);
Signal operator-(const Signal& a, const Signal& b);
Signal operator*(Scalar c, const Signal& a);

/// Right-hand side of f' = -P(t) f. The denominator is [1] for the
/// polynomial case; a rational generator has a nontrivial one.
struct Generator {
    Polynomial numerator;
    Polynomial denominator{1.0};

    Scalar operator()(double t) const { return numerator(t) / denominator(t); }
};

enum class Family { gaussian, lfm_chirp, custom };

/// A planted two-component test signal.
///  - gaussian:  params = (alpha, beta), f = R exp(-(alpha t^2 + beta t)), P = 2 alpha t + beta
///  - lfm_chirp: params = (alpha, beta), f = R exp(-i (alpha t + beta t^2)), P = i (alpha + 2 beta t)
///  - custom:    params = real generator coefficients p_j, P = mu sum_j p_j t^j with
///               mu = 1 (real field) or i (complex field); f solved by RK4 from f(0) = 1
struct GeneratorSpec {
    Family family = Family::gaussian;
    std::vector<double> params1, params2;
    double R1 = 1.0, R2 = 1.0;
    Scalar a1 = 1.0, a2 = 1.0;
    Field field = Field::real;
};

/// Throws SeparationError(InvalidSpec) on zero amplitudes, equal generators
/// or malformed parameter lists.
void validate(const GeneratorSpec& spec);

Field field_of(const GeneratorSpec& spec);
/// mu: 1 for real-field families, i for the complex embedding.
Scalar generator_scale(const GeneratorSpec& spec);
/// Real generator coefficients p_ij (component = 1 or 2), P_i = mu * sum_j p_ij t^j.
std::vector<double> generator_coefficients(const GeneratorSpec& spec, int component);
Polynomial generator_polynomial(const GeneratorSpec& spec, int component);

struct GeneratedSignal {
    Signal F, f1, f2;
};

GeneratedSignal generate(const GeneratorSpec& spec, const Grid& grid);

/// Adds i.i.d. N(0, (sigma_rel * max|F|)^2) noise to every real component
/// (and imaginary component for complex-field signals). Deterministic in seed.
Signal add_noise(const Signal& F, double sigma_rel, std::uint64_t seed);

/// Running-integral rule. `cubic` integrates the local cubic interpolant over
/// each interval (exact for cubics, fourth order) and is defined at every node.
enum class Quadrature { trapezoid, cubic };

/// Running integral G(t_m) of F from 0, G(t_0) = 0. Composite trapezoid by default.
Signal cumulative_integral(const Signal& F, Quadrature rule = Quadrature::trapezoid);

struct MomentIntegrals {
    std::vector<Signal> single; ///< single[k](t) = int_0^t x^k F(x) dx
    std::vector<Signal> dbl;    ///< dbl[k] = cumulative_integral(single[k]) with the same rule
};

MomentIntegrals moment_integrals(const Signal& F, int kmax1, int kmax2,
                                 Quadrature rule = Quadrature::trapezoid);

inline constexpr double default_overflow_bound = 1e12;

/// Classic RK4 for f' = -P(t) f with f(0) = 1 on the grid nodes.
/// Throws SeparationError(Overflow) if |f| exceeds `bound`.
Signal rk4_solve(const Generator& P, const Grid& grid, Field field,
                 double bound = default_overflow_bound);
Signal rk4_solve(const Polynomial& P, const Grid& grid, double bound = default_overflow_bound);

} // namespace polysep
