#include "polysep/recover.hpp"

#include "polysep/error.hpp"
#include "polysep/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polysep {

namespace {

// s1 is the root with the larger real part, ties broken by the imaginary part.
bool canonical_order(Scalar a, Scalar b, Scalar sum) {
    const double tie = 1e-9 * (1.0 + std::abs(sum));
    if (std::abs(a.real() - b.real()) > tie) return a.real() >= b.real();
    return a.imag() >= b.imag();
}

struct BranchFit {
    std::vector<double> p, q; // q is the full denominator, leading 1
    double rms = 0.0;
};

// Least-squares fit of mu * p(t) / q(t) to samples s at nodes t, linearized
// as mu p(t) - sum_{j<nq} q_j t^j s(t) = t^nq s(t).
BranchFit fit_branch(const std::vector<double>& t, const std::vector<Scalar>& s, int np, int nq,
                     Scalar mu, bool complex_rows) {
    const Eigen::Index rows_per = complex_rows ? 2 : 1;
    const Eigen::Index rows = rows_per * static_cast<Eigen::Index>(t.size());
    const Eigen::Index cols = np + 1 + nq;
    LsqProblem prob;
    prob.design.resize(rows, cols);
    prob.rhs.resize(rows);
    for (std::size_t m = 0; m < t.size(); ++m) {
        const Eigen::Index r = rows_per * static_cast<Eigen::Index>(m);
        auto put = [&](Eigen::Index c, Scalar v) {
            prob.design(r, c) = v.real();
            if (complex_rows) prob.design(r + 1, c) = v.imag();
        };
        double tj = 1.0;
        for (int j = 0; j <= np; ++j, tj *= t[m]) put(j, mu * tj);
        tj = 1.0;
        for (int j = 0; j < nq; ++j, tj *= t[m]) put(np + 1 + j, -tj * s[m]);
        const Scalar rhs = std::pow(t[m], nq) * s[m];
        prob.rhs(r) = rhs.real();
        if (complex_rows) prob.rhs(r + 1) = rhs.imag();
    }
    for (int j = 0; j <= np; ++j) prob.column_labels.push_back("p_" + std::to_string(j));
    for (int j = 0; j < nq; ++j) prob.column_labels.push_back("q_" + std::to_string(j));

    const LsqSolution sol = solve_lsq(prob, 1e-13);
    BranchFit fit;
    fit.p.assign(sol.x.data(), sol.x.data() + np + 1);
    fit.q.assign(sol.x.data() + np + 1, sol.x.data() + cols);
    fit.q.push_back(1.0);

    const Polynomial num = Polynomial::from_real(fit.p, mu);
    const Polynomial den = Polynomial::from_real(fit.q);
    double acc = 0.0;
    for (std::size_t m = 0; m < t.size(); ++m) acc += std::norm(num(t[m]) / den(t[m]) - s[m]);
    fit.rms = std::sqrt(acc / static_cast<double>(t.size()));
    if (!std::isfinite(fit.rms)) fit.rms = std::numeric_limits<double>::infinity();
    return fit;
}

struct LabeledFits {
    BranchFit c1, c2;
    BranchLabeling labeling;
};

// Tries every exchange pattern across K1-floor segments (segment 0 fixed) and
// both component labelings; keeps the smallest total squared residual.
LabeledFits fit_labeled(const VietaSamples& v, std::array<int, 2> np, std::array<int, 2> nq,
                        std::array<Scalar, 2> mu) {
    const bool complex_rows =
        v.field == Field::complex || mu[0].imag() != 0.0 || mu[1].imag() != 0.0;
    const int segments = std::max(v.segment_count(), 1);
    const int free_segments = std::min(segments - 1, 12);

    std::vector<double> t;
    std::vector<std::size_t> idx;
    for (std::size_t m = 0; m < v.s1.size(); ++m)
        if (v.valid[m]) {
            t.push_back(v.grid.node(m));
            idx.push_back(m);
        }

    LabeledFits best;
    double best_total = std::numeric_limits<double>::infinity();
    bool have = false;
    for (unsigned pattern = 0; pattern < (1u << free_segments); ++pattern) {
        std::vector<bool> flip(static_cast<std::size_t>(segments), false);
        for (int sgm = 1; sgm <= free_segments; ++sgm) flip[sgm] = (pattern >> (sgm - 1)) & 1u;
        std::vector<Scalar> ba(idx.size()), bb(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const std::size_t m = idx[k];
            const bool f = v.segment[m] >= 0 && flip[static_cast<std::size_t>(v.segment[m])];
            ba[k] = f ? v.s2[m] : v.s1[m];
            bb[k] = f ? v.s1[m] : v.s2[m];
        }
        for (int swapped = 0; swapped < 2; ++swapped) {
            const auto& s_first = swapped ? bb : ba;
            const auto& s_second = swapped ? ba : bb;
            BranchFit f1 = fit_branch(t, s_first, np[0], nq[0], mu[0], complex_rows);
            BranchFit f2 = fit_branch(t, s_second, np[1], nq[1], mu[1], complex_rows);
            const double total = f1.rms * f1.rms + f2.rms * f2.rms;
            if (!have || total < best_total) {
                have = true;
                best_total = total;
                best.c1 = std::move(f1);
                best.c2 = std::move(f2);
                best.labeling.swapped = swapped != 0;
                best.labeling.segment_flip = flip;
            }
        }
    }
    const auto flips = std::count(best.labeling.segment_flip.begin(), best.labeling.segment_flip.end(), true);
    best.labeling.note = std::string("component labels 1/2 are interchangeable; branch s") +
                         (best.labeling.swapped ? "2" : "1") + " assigned to component 1";
    if (flips > 0) best.labeling.note += "; branches exchanged across " + std::to_string(flips) + " K1 gap(s)";
    return best;
}

} // namespace

KFunctions build_k(const OdeCoefficients& coeffs) {
    return {coeffs.A, coeffs.B + derivative(coeffs.A), coeffs.C};
}

std::size_t VietaSamples::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
}

int VietaSamples::segment_count() const {
    int last = -1;
    for (int s : segment) last = std::max(last, s);
    return last + 1;
}

VietaSamples vieta_extract(const KFunctions& k, const Grid& grid, double k1_floor, Field field) {
    if (k.K1.is_zero())
        throw SeparationError(ErrorCode::AllNodesMasked, "K1 is identically zero");
    const std::size_t n = grid.size();
    const Polynomial dK1 = derivative(k.K1), dK2 = derivative(k.K2);

    std::vector<Scalar> k1(n);
    double k1_max = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        k1[m] = k.K1(grid.node(m));
        k1_max = std::max(k1_max, std::abs(k1[m]));
    }

    VietaSamples v;
    v.grid = grid;
    v.field = field;
    v.s_sum.assign(n, Scalar{});
    v.s_prod.assign(n, Scalar{});
    v.s1.assign(n, Scalar{});
    v.s2.assign(n, Scalar{});
    v.valid.assign(n, false);
    v.segment.assign(n, -1);
    v.clamped.assign(n, false);

    int run = -1;
    bool in_run = false;
    bool have_prev = false;
    Scalar prev1{}, prev2{};
    const double threshold = k1_floor * k1_max;

    for (std::size_t m = 0; m < n; ++m) {
        if (!(std::abs(k1[m]) >= threshold) || k1_max == 0.0) {
            in_run = false;
            continue;
        }
        if (!in_run) {
            ++run;
            in_run = true;
        }
        v.segment[m] = run;

        const double t = grid.node(m);
        const Scalar K1 = k1[m], K2 = k.K2(t), K3 = k.K3(t);
        const Scalar d1 = dK1(t), d2 = dK2(t);
        Scalar sum = K2 / K1;
        const Scalar dsum = (d2 * K1 - K2 * d1) / (K1 * K1);
        Scalar prod = (K3 - 0.5 * (K1 * dsum - sum * d1)) / K1;
        if (field == Field::real) {
            sum = sum.real();
            prod = prod.real();
        }
        v.s_sum[m] = sum;
        v.s_prod[m] = prod;

        Scalar disc = sum * sum - 4.0 * prod;
        if (field == Field::real && disc.real() < 0.0) {
            if (std::abs(disc) <= 1e-6 * std::norm(sum) + 1e-12) {
                disc = 0.0;
                v.clamped[m] = true;
            } else {
                continue;
            }
        }
        const Scalar root = std::sqrt(disc);
        Scalar r1 = 0.5 * (sum + root), r2 = 0.5 * (sum - root);
        if (field == Field::real) {
            r1 = r1.real();
            r2 = r2.real();
        }
        if (!std::isfinite(std::abs(r1)) || !std::isfinite(std::abs(r2))) continue;

        if (!have_prev) {
            if (!canonical_order(r1, r2, sum)) std::swap(r1, r2);
        } else {
            const double keep = std::abs(r1 - prev1) + std::abs(r2 - prev2);
            const double cross = std::abs(r2 - prev1) + std::abs(r1 - prev2);
            // Past a root collision both pairings cost the same; rounding must not decide.
            if (std::abs(keep - cross) <= 1e-9 * (1.0 + std::abs(sum))) {
                if (!canonical_order(r1, r2, sum)) std::swap(r1, r2);
            } else if (cross < keep) {
                std::swap(r1, r2);
            }
        }
        v.s1[m] = r1;
        v.s2[m] = r2;
        v.valid[m] = true;
        prev1 = r1;
        prev2 = r2;
        have_prev = true;
    }

    if (run < 0)
        throw SeparationError(ErrorCode::AllNodesMasked, "no node passes the K1 floor");
    return v;
}

PolynomialFit fit_polynomial_generators(const VietaSamples& v, int n1, int n2, Scalar mu1, Scalar mu2) {
    if (n1 < 0 || n2 < 0)
        throw SeparationError(ErrorCode::InvalidSpec, "generator degrees must be nonnegative");
    if (v.valid_count() < static_cast<std::size_t>(std::max(n1, n2) + 2))
        throw SeparationError(ErrorCode::InsufficientNodes, "too few valid nodes for the generator fit");
    LabeledFits fits = fit_labeled(v, {n1, n2}, {0, 0}, {mu1, mu2});
    PolynomialFit out;
    out.p1 = std::move(fits.c1.p);
    out.p2 = std::move(fits.c2.p);
    out.residuals = {fits.c1.rms, fits.c2.rms};
    out.labeling = std::move(fits.labeling);
    return out;
}

RationalFit fit_rational_generators(const VietaSamples& v, int np1, int nq1, int np2, int nq2,
                                    Scalar mu1, Scalar mu2) {
    if (np1 < 0 || nq1 < 0 || np2 < 0 || nq2 < 0)
        throw SeparationError(ErrorCode::InvalidSpec, "rational degrees must be nonnegative");
    const std::size_t need = static_cast<std::size_t>(std::max(np1 + nq1, np2 + nq2) + 2);
    if (v.valid_count() < need)
        throw SeparationError(ErrorCode::InsufficientNodes, "too few valid nodes for the rational fit");
    LabeledFits fits = fit_labeled(v, {np1, np2}, {nq1, nq2}, {mu1, mu2});

    for (const auto* q : {&fits.c1.q, &fits.c2.q}) {
        for (const Scalar r : roots(Polynomial::from_real(*q))) {
            if (std::abs(r.imag()) <= 1e-3 && r.real() >= -1e-3 && r.real() <= 1.0 + 1e-3)
                throw SeparationError(ErrorCode::PolesDetected,
                                      "fitted denominator has a root near t = " + std::to_string(r.real()));
        }
    }
    RationalFit out;
    out.p1 = std::move(fits.c1.p);
    out.q1 = std::move(fits.c1.q);
    out.p2 = std::move(fits.c2.p);
    out.q2 = std::move(fits.c2.q);
    out.residuals = {fits.c1.rms, fits.c2.rms};
    out.labeling = std::move(fits.labeling);
    return out;
}

AmplitudeFit recover_amplitudes(const Signal& F, const Generator& P1, const Generator& P2) {
    const Grid& grid = F.grid();
    auto is_complex = [](const Generator& g) {
        for (auto c : g.numerator.coeffs())
            if (c.imag() != 0.0) return true;
        for (auto c : g.denominator.coeffs())
            if (c.imag() != 0.0) return true;
        return false;
    };
    const Field field =
        (F.field() == Field::complex || is_complex(P1) || is_complex(P2)) ? Field::complex : Field::real;
    return fit_amplitudes(F, rk4_solve(P1, grid, field), rk4_solve(P2, grid, field));
}

AmplitudeFit fit_amplitudes(const Signal& F, const Signal& b1, const Signal& b2) {
    const Field field = (F.field() == Field::complex || b1.field() == Field::complex ||
                         b2.field() == Field::complex)
                            ? Field::complex
                            : Field::real;
    const std::size_t n = F.size();
    double g11 = 0.0, g22 = 0.0;
    Scalar g12{};
    for (std::size_t m = 0; m < n; ++m) {
        g11 += std::norm(b1[m]);
        g22 += std::norm(b2[m]);
        g12 += std::conj(b1[m]) * b2[m];
    }
    const double tr = g11 + g22;
    const double det = g11 * g22 - std::norm(g12);
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    const double lmax = 0.5 * tr + disc;
    const double lmin = det / lmax;
    const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(cond <= max_gram_condition))
        throw SeparationError(ErrorCode::NearDependentBasis, "component basis signals are nearly dependent");

    LsqProblem prob;
    if (field == Field::real) {
        prob.design.resize(n, 2);
        prob.rhs.resize(n);
        for (std::size_t m = 0; m < n; ++m) {
            prob.design(m, 0) = b1[m].real();
            prob.design(m, 1) = b2[m].real();
            prob.rhs(m) = F[m].real();
        }
        prob.column_labels = {"a1", "a2"};
    } else {
        prob.design.resize(2 * n, 4);
        prob.rhs.resize(2 * n);
        for (std::size_t m = 0; m < n; ++m) {
            const Scalar u = b1[m], w = b2[m];
            prob.design.row(2 * m) << u.real(), -u.imag(), w.real(), -w.imag();
            prob.design.row(2 * m + 1) << u.imag(), u.real(), w.imag(), w.real();
            prob.rhs(2 * m) = F[m].real();
            prob.rhs(2 * m + 1) = F[m].imag();
        }
        prob.column_labels = {"a1.re", "a1.im", "a2.re", "a2.im"};
    }
    const LsqSolution sol = solve_lsq(prob, 1e-14);

    Scalar a1, a2;
    if (field == Field::real) {
        a1 = sol.x(0);
        a2 = sol.x(1);
    } else {
        a1 = {sol.x(0), sol.x(1)};
        a2 = {sol.x(2), sol.x(3)};
    }
    const double fnorm = F.norm();
    const double residual = fnorm > 0.0 ? sol.residual_norm / fnorm : sol.residual_norm;
    return AmplitudeFit{a1, a2, residual, cond};
}

Generator SeparationResult::generator(int component) const {
    const auto& p = component == 1 ? p1 : p2;
    const auto& q = component == 1 ? q1 : q2;
    Generator g{Polynomial::from_real(p, component == 1 ? mu1 : mu2)};
    if (q) g.denominator = Polynomial::from_real(*q);
    return g;
}

} // namespace polysep
