#include "polysep/polyalg.hpp"
#include "polysep/recover.hpp"
#include "polysep/signalkit.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

using namespace polysep;
using polysep::testing::error_of;

namespace {

GeneratorSpec gaussian_plant() {
    GeneratorSpec s;
    s.family = Family::gaussian;
    s.params1 = {3.0, 1.0};
    s.params2 = {1.0, -2.0};
    return s;
}

// K functions built from the exact A, B, C of two generators.
KFunctions exact_k(const Polynomial& p1, const Polynomial& p2) {
    const auto abc = compose_abc(p1, p2);
    OdeCoefficients c;
    c.A = abc.A;
    c.B = abc.B;
    c.C = abc.C;
    return build_k(c);
}

// Hand-built samples with every node valid and a single segment.
VietaSamples samples_of(const Grid& grid, const std::function<Scalar(double)>& s1,
                        const std::function<Scalar(double)>& s2) {
    VietaSamples v;
    v.grid = grid;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double t = grid.node(m);
        v.s1.push_back(s1(t));
        v.s2.push_back(s2(t));
        v.s_sum.push_back(v.s1.back() + v.s2.back());
        v.s_prod.push_back(v.s1.back() * v.s2.back());
    }
    v.valid.assign(grid.size(), true);
    v.segment.assign(grid.size(), 0);
    v.clamped.assign(grid.size(), false);
    return v;
}

bool close(const std::vector<double>& a, std::initializer_list<double> b, double tol) {
    if (a.size() != b.size()) return false;
    auto it = b.begin();
    for (double x : a)
        if (std::abs(x - *it++) > tol) return false;
    return true;
}

// Worst pointwise distance between the tracked branches and two truths, over
// the better of the two global pairings.
double branch_error(const VietaSamples& v, const Polynomial& p1, const Polynomial& p2) {
    double direct = 0.0, crossed = 0.0;
    for (std::size_t m = 0; m < v.grid.size(); ++m) {
        if (!v.valid[m]) continue;
        const double t = v.grid.node(m);
        direct = std::max({direct, std::abs(v.s1[m] - p1(t)), std::abs(v.s2[m] - p2(t))});
        crossed = std::max({crossed, std::abs(v.s1[m] - p2(t)), std::abs(v.s2[m] - p1(t))});
    }
    return std::min(direct, crossed);
}

Polynomial random_poly(std::mt19937_64& rng, int degree) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Scalar> c(static_cast<std::size_t>(degree + 1));
    for (auto& x : c) x = u(rng);
    return Polynomial(std::move(c));
}

} // namespace

TEST_CASE("build_k examples") {
    OdeCoefficients c;
    c.A = {1.0};
    c.B = {3.0};
    c.C = {2.0};
    auto k = build_k(c);
    CHECK(k.K1 == Polynomial{1.0});
    CHECK(k.K2 == Polynomial{3.0});
    CHECK(k.K3 == Polynomial{2.0});

    c.A = {0.0, 1.0};
    c.B = {1.0, 0.0, 2.0};
    k = build_k(c);
    CHECK(k.K2 == Polynomial{2.0, 0.0, 2.0});
}

TEST_CASE("Gaussian plant: K2/K1 is the generator sum") {
    const Grid grid(2049);
    const auto g = generate(gaussian_plant(), grid);
    const auto coeffs = identify_ode(g.F, {1, 1}, 1e-10);
    const auto k = build_k(coeffs);
    const Polynomial truth_sum = generator_polynomial(gaussian_plant(), 1) + generator_polynomial(gaussian_plant(), 2);
    const double floor = default_k1_floor * [&] {
        double mx = 0.0;
        for (std::size_t m = 0; m < grid.size(); ++m) mx = std::max(mx, std::abs(k.K1(grid.node(m))));
        return mx;
    }();
    double worst = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double t = grid.node(m);
        if (std::abs(k.K1(t)) < floor) continue;
        worst = std::max(worst, std::abs(k.K2(t) / k.K1(t) - truth_sum(t)));
    }
    CHECK(truth_sum == Polynomial{-1.0, 8.0});
    CHECK(worst <= 1e-2);
}

TEST_CASE("vieta_extract: constant quadratic") {
    KFunctions k{{1.0}, {3.0}, {2.0}};
    const auto v = vieta_extract(k, Grid(64));
    CHECK(v.valid_count() == 64);
    CHECK(v.segment_count() == 1);
    for (std::size_t m = 0; m < 64; ++m) {
        CHECK(std::abs(v.s_sum[m] - 3.0) < 1e-14);
        CHECK(std::abs(v.s_prod[m] - 2.0) < 1e-14);
        const double lo = std::min(v.s1[m].real(), v.s2[m].real());
        const double hi = std::max(v.s1[m].real(), v.s2[m].real());
        CHECK(lo == doctest::Approx(1.0));
        CHECK(hi == doctest::Approx(2.0));
        CHECK(v.s1[m] == v.s1[0]);
    }
}

TEST_CASE("vieta_extract: Gaussian plant branches") {
    const Grid grid(2049);
    const auto plant = gaussian_plant();
    const auto g = generate(plant, grid);
    const auto k = build_k(identify_ode(g.F, {1, 1}, 1e-10));
    const auto v = vieta_extract(k, grid);
    CHECK(v.valid_count() > grid.size() / 2);
    CHECK(branch_error(v, generator_polynomial(plant, 1), generator_polynomial(plant, 2)) <= 2e-2);
}

TEST_CASE("vieta_extract: K1 floor mask") {
    const Grid grid(1001);
    // P1 = 0 and P2 = t give K1 = t.
    const auto k = exact_k(Polynomial{0.0}, Polynomial{0.0, 1.0});
    REQUIRE(k.K1 == Polynomial{0.0, 1.0});
    const auto v = vieta_extract(k, grid, 0.01);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double t = grid.node(m);
        if (t < 0.01 - 1e-12) CHECK_FALSE(v.valid[m]);
        if (t > 0.01 + 1e-12) CHECK(v.valid[m]);
    }
    CHECK(error_of([] { vieta_extract(KFunctions{{}, {1.0}, {1.0}}, Grid(64)); }) ==
          ErrorCode::AllNodesMasked);
}

TEST_CASE("vieta_extract: product matches P1 P2 for exact K functions") {
    // The product formula is checked against the two generators directly.
    const Grid grid(513);
    const Polynomial p1{1.0, 6.0}, p2{-2.0, 2.0, 0.5};
    const auto v = vieta_extract(exact_k(p1, p2), grid);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        if (!v.valid[m]) continue;
        const double t = grid.node(m);
        CHECK(std::abs(v.s_prod[m] - p1(t) * p2(t)) <= 1e-9 * (1.0 + std::abs(p1(t) * p2(t))));
        CHECK(std::abs(v.s_sum[m] - (p1(t) + p2(t))) <= 1e-10 * (1.0 + std::abs(p1(t) + p2(t))));
    }
    CHECK(branch_error(v, p1, p2) <= 1e-6);
}

TEST_CASE("vieta_extract: complex field") {
    const Grid grid(257);
    const Scalar I{0.0, 1.0};
    const Polynomial p1 = Polynomial::from_real(std::vector<double>{20.0, 20.0}, I);
    const Polynomial p2 = Polynomial::from_real(std::vector<double>{35.0, 10.0}, I);
    const auto v = vieta_extract(exact_k(p1, p2), grid, default_k1_floor, Field::complex);
    CHECK(branch_error(v, p1, p2) <= 1e-8 * 40.0);
}

TEST_CASE("property: Vieta closure at every valid node") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> deg(0, 2);
    const Grid grid(257);
    for (int trial = 0; trial < 100; ++trial) {
        const Polynomial p1 = random_poly(rng, deg(rng)), p2 = random_poly(rng, deg(rng));
        const auto v = vieta_extract(exact_k(p1, p2), grid);
        for (std::size_t m = 0; m < grid.size(); ++m) {
            if (!v.valid[m] || v.clamped[m]) continue;
            const double tol = 1e-8 * (1.0 + std::norm(v.s_sum[m]));
            CHECK(std::abs(v.s1[m] + v.s2[m] - v.s_sum[m]) <= tol);
            CHECK(std::abs(v.s1[m] * v.s2[m] - v.s_prod[m]) <= tol);
        }
    }
}

TEST_CASE("property: extraction is invariant under a common scale of K") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    std::bernoulli_distribution neg;
    const Grid grid(129);
    for (int trial = 0; trial < 50; ++trial) {
        const Polynomial p1 = random_poly(rng, 1), p2 = random_poly(rng, 1);
        const auto k = exact_k(p1, p2);
        const double c = neg(rng) ? -u(rng) : u(rng);
        const KFunctions ks{c * k.K1, c * k.K2, c * k.K3};
        const auto v = vieta_extract(k, grid), w = vieta_extract(ks, grid);
        REQUIRE(v.valid == w.valid);
        for (std::size_t m = 0; m < grid.size(); ++m) {
            if (!v.valid[m]) continue;
            const double scale = 1.0 + std::abs(v.s_sum[m]) + std::abs(v.s_prod[m]);
            CHECK(std::abs(v.s_sum[m] - w.s_sum[m]) <= 1e-10 * scale);
            CHECK(std::abs(v.s_prod[m] - w.s_prod[m]) <= 1e-10 * scale);
            CHECK(std::abs(v.s1[m] - w.s1[m]) <= 1e-10 * scale);
            CHECK(std::abs(v.s2[m] - w.s2[m]) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("property: branches of separated degree-1 generators stay linear") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const Grid grid(513);
    int checked = 0;
    while (checked < 50) {
        const Polynomial p1{u(rng), u(rng)}, p2{u(rng), u(rng)};
        const Polynomial d = p1 - p2;
        if (std::min(std::abs(d(0.0)), std::abs(d(1.0))) < 0.1 || d(0.0).real() * d(1.0).real() < 0) continue;
        const auto v = vieta_extract(exact_k(p1, p2), grid);
        const auto fit = fit_polynomial_generators(v, 1, 1, 1.0, 1.0);
        for (int i = 0; i < 2; ++i) {
            const auto& s = i == 0 ? v.s1 : v.s2;
            double num = 0.0, den = 0.0;
            const auto& c = ((i == 0) != fit.labeling.swapped) ? fit.p1 : fit.p2;
            for (std::size_t m = 0; m < grid.size(); ++m) {
                if (!v.valid[m]) continue;
                const double t = grid.node(m);
                num += std::norm(s[m] - (c[0] + c[1] * t));
                den += std::norm(s[m]);
            }
            CHECK(std::sqrt(num / den) <= 1e-3);
        }
        ++checked;
    }
}

TEST_CASE("fit_polynomial_generators examples") {
    const Grid grid(257);
    auto v = samples_of(grid, [](double t) { return Scalar{2 * t + 1}; }, [](double t) { return Scalar{5 - t}; });
    auto fit = fit_polynomial_generators(v, 1, 1, 1.0, 1.0);
    const auto& got1 = fit.labeling.swapped ? fit.p2 : fit.p1;
    const auto& got2 = fit.labeling.swapped ? fit.p1 : fit.p2;
    CHECK(close(got1, {1.0, 2.0}, 1e-10));
    CHECK(close(got2, {5.0, -1.0}, 1e-10));
    CHECK(fit.residuals[0] < 1e-10);

    const Scalar I{0.0, 1.0};
    v = samples_of(grid, [&](double t) { return I * (20 + 20 * t); }, [&](double t) { return I * (35 - 10 * t); });
    fit = fit_polynomial_generators(v, 1, 1, I, I);
    const bool first = std::abs(fit.p1[0] - 20.0) < std::abs(fit.p2[0] - 20.0);
    CHECK(close(first ? fit.p1 : fit.p2, {20.0, 20.0}, 1e-10));
    CHECK(close(first ? fit.p2 : fit.p1, {35.0, -10.0}, 1e-10));
}

TEST_CASE("fit_polynomial_generators: Gaussian plant end to end") {
    const Grid grid(2049);
    const auto plant = gaussian_plant();
    const auto g = generate(plant, grid);
    const auto v = vieta_extract(build_k(identify_ode(g.F, {1, 1}, 1e-10)), grid);
    const auto fit = fit_polynomial_generators(v, 1, 1, 1.0, 1.0);
    const auto t1 = generator_coefficients(plant, 1), t2 = generator_coefficients(plant, 2);
    auto rel = [](const std::vector<double>& a, const std::vector<double>& b) {
        double e = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) e = std::max(e, std::abs(a[j] - b[j]) / std::max(1.0, std::abs(b[j])));
        return e;
    };
    const double err = std::min(std::max(rel(fit.p1, t1), rel(fit.p2, t2)), std::max(rel(fit.p1, t2), rel(fit.p2, t1)));
    CHECK(err <= 1e-2);
}

TEST_CASE("fit_polynomial_generators: insufficient nodes") {
    auto v = samples_of(Grid(16), [](double) { return Scalar{1.0}; }, [](double) { return Scalar{2.0}; });
    std::fill(v.valid.begin() + 2, v.valid.end(), false);
    CHECK(error_of([&] { fit_polynomial_generators(v, 1, 1, 1.0, 1.0); }) == ErrorCode::InsufficientNodes);
}

TEST_CASE("fit_rational_generators: leading-one normalization") {
    const Grid grid(513);
    const auto v = samples_of(grid, [](double t) { return Scalar{(1 + t) / (1 + 2 * t)}; },
                              [](double t) { return Scalar{(2 - t) / (2 + t)}; });
    const auto fit = fit_rational_generators(v, 1, 1, 1, 1, 1.0, 1.0);
    const bool first = std::abs(fit.p1[0] - 0.5) < std::abs(fit.p2[0] - 0.5);
    const auto& p = first ? fit.p1 : fit.p2;
    const auto& q = first ? fit.q1 : fit.q2;
    CHECK(close(p, {0.5, 0.5}, 1e-8));
    CHECK(close(q, {0.5, 1.0}, 1e-8));
    CHECK(close(first ? fit.p2 : fit.p1, {2.0, -1.0}, 1e-8));
    CHECK(close(first ? fit.q2 : fit.q1, {2.0, 1.0}, 1e-8));

    double worst = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double t = grid.node(m);
        const double r = (p[0] + p[1] * t) / (q[0] + q[1] * t);
        worst = std::max(worst, std::abs(r - (1 + t) / (1 + 2 * t)));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("fit_rational_generators: no denominator reduces to the polynomial fit") {
    const Grid grid(257);
    const auto v = samples_of(grid, [](double t) { return Scalar{2 * t + 1}; }, [](double t) { return Scalar{4 - 3 * t}; });
    const auto rat = fit_rational_generators(v, 1, 0, 1, 0, 1.0, 1.0);
    const auto poly = fit_polynomial_generators(v, 1, 1, 1.0, 1.0);
    CHECK(rat.p1 == poly.p1);
    CHECK(rat.p2 == poly.p2);
    CHECK(rat.q1 == std::vector<double>{1.0});
    CHECK(rat.q2 == std::vector<double>{1.0});
}

TEST_CASE("fit_rational_generators: pole inside the interval") {
    const Grid grid(1024);
    const auto v = samples_of(grid, [](double t) { return Scalar{1.0 / (t - 0.5)}; },
                              [](double t) { return Scalar{1.0 / (t + 2.0)}; });
    CHECK(error_of([&] { fit_rational_generators(v, 0, 1, 0, 1, 1.0, 1.0); }) == ErrorCode::PolesDetected);
}

TEST_CASE("recover_amplitudes examples") {
    const Grid grid(2049);
    std::vector<Scalar> s(grid.size());
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double t = grid.node(m);
        s[m] = 2 * std::exp(-t) + 3 * std::exp(-2 * t);
    }
    const Signal F(grid, s);
    const Generator P1{{1.0}}, P2{{2.0}};
    const auto fit = recover_amplitudes(F, P1, P2);
    CHECK(std::abs(fit.a1 - 2.0) <= 1e-6);
    CHECK(std::abs(fit.a2 - 3.0) <= 1e-6);
    CHECK(fit.residual <= 1e-7);

    const Signal b1 = rk4_solve(P1, grid, Field::real);
    const auto single = recover_amplitudes(b1, P1, P2);
    CHECK(std::abs(single.a1 - 1.0) <= 1e-8);
    CHECK(std::abs(single.a2) <= 1e-8);

    CHECK(error_of([&] { recover_amplitudes(F, P1, P1); }) == ErrorCode::NearDependentBasis);
}

TEST_CASE("property: amplitude recovery is covariant under component swap") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const Grid grid(513);
    for (int trial = 0; trial < 20; ++trial) {
        const Generator P1{{u(rng), u(rng)}}, P2{{u(rng), u(rng)}};
        const Scalar a1 = u(rng), a2 = u(rng);
        const Signal b1 = rk4_solve(P1, grid, Field::real), b2 = rk4_solve(P2, grid, Field::real);
        const Signal F = a1 * b1 + a2 * b2;
        const auto fwd = recover_amplitudes(F, P1, P2), rev = recover_amplitudes(F, P2, P1);
        CHECK(std::abs(fwd.a1 - rev.a2) <= 1e-8 * (1.0 + std::abs(fwd.a1)));
        CHECK(std::abs(fwd.a2 - rev.a1) <= 1e-8 * (1.0 + std::abs(fwd.a2)));
        CHECK(std::abs(fwd.a1 - a1) <= 1e-6 * (1.0 + std::abs(a1)));
    }
}
