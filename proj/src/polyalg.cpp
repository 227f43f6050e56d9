#include "polysep/polyalg.hpp"

#include "polysep/error.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace polysep {

Polynomial Polynomial::from_real(std::span<const double> coeffs, Scalar scale) {
    std::vector<Scalar> c(coeffs.size());
    std::transform(coeffs.begin(), coeffs.end(), c.begin(), [&](double v) { return scale * v; });
    return Polynomial(std::move(c));
}

int Polynomial::degree() const {
    for (int j = static_cast<int>(coeffs_.size()) - 1; j >= 0; --j)
        if (coeffs_[j] != Scalar{}) return j;
    return -1;
}

Scalar Polynomial::operator()(double t) const {
    Scalar acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
    return acc;
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    if (coeffs_.size() < rhs.coeffs_.size()) coeffs_.resize(rhs.coeffs_.size());
    for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) coeffs_[j] += rhs.coeffs_[j];
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
    if (coeffs_.size() < rhs.coeffs_.size()) coeffs_.resize(rhs.coeffs_.size());
    for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) coeffs_[j] -= rhs.coeffs_[j];
    return *this;
}

Polynomial& Polynomial::operator*=(Scalar c) {
    for (auto& v : coeffs_) v *= c;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    const int da = a.degree(), db = b.degree();
    if (da < 0 || db < 0) return {};
    std::vector<Scalar> out(static_cast<std::size_t>(da + db + 1));
    for (int i = 0; i <= da; ++i)
        for (int j = 0; j <= db; ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(out));
}

bool operator==(const Polynomial& a, const Polynomial& b) {
    const int d = a.degree();
    if (d != b.degree()) return false;
    for (int j = 0; j <= d; ++j)
        if (a.coeffs_[j] != b.coeffs_[j]) return false;
    return true;
}

Polynomial derivative(const Polynomial& p) {
    const int d = p.degree();
    if (d <= 0) return {};
    std::vector<Scalar> out(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) out[j] = static_cast<double>(j + 1) * p[j + 1];
    return Polynomial(std::move(out));
}

AbcPolynomials compose_abc(const Polynomial& p1, const Polynomial& p2) {
    if (p1 == p2)
        throw SeparationError(ErrorCode::EqualOperators, "generator polynomials are identical");
    const Polynomial diff = p2 - p1;
    const Polynomial dp1 = derivative(p1), dp2 = derivative(p2);
    AbcPolynomials abc;
    abc.A = diff;
    abc.B = (p2 * p2 - p1 * p1) - derivative(diff);
    abc.C = p2 * p1 * diff - (p1 * dp2 - p2 * dp1);
    return abc;
}

std::vector<Scalar> roots(const Polynomial& p) {
    const int d = p.degree();
    if (d <= 0) return {};
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(d, d);
    const Scalar lead = p[d];
    for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) companion(i, d - 1) = -p[i] / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

} // namespace polysep
