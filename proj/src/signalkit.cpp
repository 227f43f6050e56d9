#include "polysep/signalkit.hpp"

#include "polysep/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace polysep {

namespace {

Field join(Field a, Field b) {
    return (a == Field::complex || b == Field::complex) ? Field::complex : Field::real;
}

bool has_imaginary(const Polynomial& p) {
    return std::any_of(p.coeffs().begin(), p.coeffs().end(),
                       [](Scalar c) { return c.imag() != 0.0; });
}

void require_two(const std::vector<double>& params, const char* what) {
    if (params.size() != 2 || !std::isfinite(params[0]) || !std::isfinite(params[1]))
        throw SeparationError(ErrorCode::InvalidSpec,
                              std::string(what) + " family needs exactly (alpha, beta) per component");
}

} // namespace

Grid::Grid(std::size_t n) : n_(n) {
    if (n < min_size)
        throw SeparationError(ErrorCode::InvalidSpec,
                              "grid needs at least " + std::to_string(min_size) + " nodes");
}

std::vector<double> Grid::nodes() const {
    std::vector<double> t(n_);
    for (std::size_t m = 0; m < n_; ++m) t[m] = node(m);
    return t;
}

Signal::Signal(Grid grid, std::vector<Scalar> samples, Field field)
    : grid_(grid), samples_(std::move(samples)), field_(field) {
    if (samples_.size() != grid_.size())
        throw SeparationError(ErrorCode::InvalidSpec, "sample count does not match grid size");
    for (const auto& s : samples_) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw SeparationError(ErrorCode::NonFinite, "signal contains non-finite samples");
        if (field_ == Field::real && s.imag() != 0.0)
            throw SeparationError(ErrorCode::InvalidSpec, "real-field signal has imaginary part");
    }
}

double Signal::max_abs() const {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, std::abs(s));
    return m;
}

double Signal::norm() const {
    double acc = 0.0;
    for (const auto& s : samples_) acc += std::norm(s);
    return std::sqrt(acc);
}

Signal operator+(const Signal& a, const Signal& b) {
    std::vector<Scalar> out(a.size());
    for (std::size_t m = 0; m < a.size(); ++m) out[m] = a[m] + b[m];
    return Signal(a.grid(), std::move(out), join(a.field(), b.field()));
}

Signal operator-(const Signal& a, const Signal& b) {
    std::vector<Scalar> out(a.size());
    for (std::size_t m = 0; m < a.size(); ++m) out[m] = a[m] - b[m];
    return Signal(a.grid(), std::move(out), join(a.field(), b.field()));
}

Signal operator*(Scalar c, const Signal& a) {
    std::vector<Scalar> out(a.size());
    for (std::size_t m = 0; m < a.size(); ++m) out[m] = c * a[m];
    const Field f = c.imag() != 0.0 ? Field::complex : a.field();
    return Signal(a.grid(), std::move(out), f);
}

Field field_of(const GeneratorSpec& spec) {
    switch (spec.family) {
    case Family::gaussian: return Field::real;
    case Family::lfm_chirp: return Field::complex;
    case Family::custom: break;
    }
    if (spec.a1.imag() != 0.0 || spec.a2.imag() != 0.0) return Field::complex;
    return spec.field;
}

Scalar generator_scale(const GeneratorSpec& spec) {
    switch (spec.family) {
    case Family::gaussian: return 1.0;
    case Family::lfm_chirp: return {0.0, 1.0};
    case Family::custom: break;
    }
    return spec.field == Field::complex ? Scalar{0.0, 1.0} : Scalar{1.0};
}

std::vector<double> generator_coefficients(const GeneratorSpec& spec, int component) {
    const auto& params = component == 1 ? spec.params1 : spec.params2;
    switch (spec.family) {
    case Family::gaussian:
        require_two(params, "gaussian");
        return {params[1], 2.0 * params[0]};
    case Family::lfm_chirp:
        require_two(params, "lfm_chirp");
        return {params[0], 2.0 * params[1]};
    case Family::custom: break;
    }
    return params;
}

Polynomial generator_polynomial(const GeneratorSpec& spec, int component) {
    const auto coeffs = generator_coefficients(spec, component);
    return Polynomial::from_real(coeffs, generator_scale(spec));
}

void validate(const GeneratorSpec& spec) {
    if (spec.a1 == Scalar{} || spec.a2 == Scalar{})
        throw SeparationError(ErrorCode::InvalidSpec, "amplitudes a1, a2 must be nonzero");
    if (!std::isfinite(spec.R1) || !std::isfinite(spec.R2) || spec.R1 == 0.0 || spec.R2 == 0.0)
        throw SeparationError(ErrorCode::InvalidSpec, "component scales R1, R2 must be finite and nonzero");
    const auto p1 = generator_coefficients(spec, 1);
    const auto p2 = generator_coefficients(spec, 2);
    if (p1.empty() || p2.empty())
        throw SeparationError(ErrorCode::InvalidSpec, "generator coefficient lists must be nonempty");
    for (double v : p1)
        if (!std::isfinite(v)) throw SeparationError(ErrorCode::InvalidSpec, "non-finite generator coefficient");
    for (double v : p2)
        if (!std::isfinite(v)) throw SeparationError(ErrorCode::InvalidSpec, "non-finite generator coefficient");
    if (Polynomial::from_real(p1) == Polynomial::from_real(p2))
        throw SeparationError(ErrorCode::InvalidSpec, "generator polynomials must differ");
}

GeneratedSignal generate(const GeneratorSpec& spec, const Grid& grid) {
    validate(spec);
    const Field field = field_of(spec);
    const std::size_t n = grid.size();

    auto analytic = [&](const std::vector<double>& params, double R) {
        std::vector<Scalar> s(n);
        const double alpha = params[0], beta = params[1];
        for (std::size_t m = 0; m < n; ++m) {
            const double t = grid.node(m);
            if (spec.family == Family::gaussian)
                s[m] = R * std::exp(-(alpha * t * t + beta * t));
            else
                s[m] = R * std::exp(Scalar{0.0, -(alpha * t + beta * t * t)});
        }
        return Signal(grid, std::move(s), field);
    };

    auto component = [&](int i) {
        const auto& params = i == 1 ? spec.params1 : spec.params2;
        const double R = i == 1 ? spec.R1 : spec.R2;
        if (spec.family == Family::custom)
            return R * rk4_solve(Generator{generator_polynomial(spec, i)}, grid, field);
        return analytic(params, R);
    };

    Signal f1 = component(1);
    Signal f2 = component(2);
    Signal F = spec.a1 * f1 + spec.a2 * f2;
    return {std::move(F), std::move(f1), std::move(f2)};
}

Signal add_noise(const Signal& F, double sigma_rel, std::uint64_t seed) {
    if (!(sigma_rel >= 0.0))
        throw SeparationError(ErrorCode::InvalidSpec, "noise level must be nonnegative");
    if (sigma_rel == 0.0) return F;
    const double sigma = sigma_rel * F.max_abs();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    std::vector<Scalar> out(F.samples().begin(), F.samples().end());
    for (auto& s : out) {
        const double re = normal(rng);
        const double im = F.field() == Field::complex ? normal(rng) : 0.0;
        s += Scalar{re, im};
    }
    return Signal(F.grid(), std::move(out), F.field());
}

Signal cumulative_integral(const Signal& F, Quadrature rule) {
    const std::size_t n = F.size();
    const long double h = static_cast<long double>(F.grid().step());
    auto at = [&](std::size_t m) { return std::complex<long double>(F[m]); };
    // Integral over [t_j, t_{j+1}].
    auto piece = [&](std::size_t j) -> std::complex<long double> {
        if (rule == Quadrature::trapezoid) return 0.5L * h * (at(j) + at(j + 1));
        if (j == 0) return h / 24.0L * (9.0L * at(0) + 19.0L * at(1) - 5.0L * at(2) + at(3));
        if (j == n - 2)
            return h / 24.0L * (at(n - 4) - 5.0L * at(n - 3) + 19.0L * at(n - 2) + 9.0L * at(n - 1));
        return h / 24.0L * (-at(j - 1) + 13.0L * at(j) + 13.0L * at(j + 1) - at(j + 2));
    };
    std::vector<Scalar> G(n);
    // Running sums are carried in extended precision to keep rounding off the step-1 design.
    std::complex<long double> acc{};
    for (std::size_t m = 1; m < n; ++m) {
        acc += piece(m - 1);
        G[m] = Scalar(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
    }
    return Signal(F.grid(), std::move(G), F.field());
}

MomentIntegrals moment_integrals(const Signal& F, int kmax1, int kmax2, Quadrature rule) {
    if (kmax1 < 0 || kmax2 < 0)
        throw SeparationError(ErrorCode::InvalidSpec, "moment orders must be nonnegative");
    const int kmax = std::max(kmax1, kmax2);
    const auto t = F.grid().nodes();
    MomentIntegrals out;
    std::vector<Signal> single;
    single.reserve(static_cast<std::size_t>(kmax) + 1);
    std::vector<Scalar> weighted(F.samples().begin(), F.samples().end());
    for (int k = 0; k <= kmax; ++k) {
        if (k > 0)
            for (std::size_t m = 0; m < weighted.size(); ++m) weighted[m] *= t[m];
        single.push_back(cumulative_integral(Signal(F.grid(), weighted, F.field()), rule));
    }
    for (int k = 0; k <= kmax2; ++k) out.dbl.push_back(cumulative_integral(single[k], rule));
    single.erase(single.begin() + kmax1 + 1, single.end());
    out.single = std::move(single);
    return out;
}

Signal rk4_solve(const Generator& P, const Grid& grid, Field field, double bound) {
    const std::size_t n = grid.size();
    const double h = grid.step();
    std::vector<Scalar> f(n);
    f[0] = 1.0;
    auto rhs = [&](double t, Scalar y) { return -P(t) * y; };
    for (std::size_t m = 1; m < n; ++m) {
        const double t = grid.node(m - 1);
        const Scalar y = f[m - 1];
        const Scalar k1 = rhs(t, y);
        const Scalar k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const Scalar k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const Scalar k4 = rhs(t + h, y + h * k3);
        f[m] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double mag = std::abs(f[m]);
        if (!std::isfinite(mag) || mag > bound)
            throw SeparationError(ErrorCode::Overflow,
                                  "ODE solution exceeds bound at t = " + std::to_string(grid.node(m)));
    }
    return Signal(grid, std::move(f), field);
}

Signal rk4_solve(const Polynomial& P, const Grid& grid, double bound) {
    const Field field = has_imaginary(P) ? Field::complex : Field::real;
    return rk4_solve(Generator{P}, grid, field, bound);
}

} // namespace polysep
