#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

namespace polysep {

/// Element of the coefficient field. The real field is embedded as the
/// complex numbers with zero imaginary part; `Field` says which one a run uses.
using Scalar = std::complex<double>;

enum class Field { real, complex };

/// Dense polynomial over Scalar, coefficient j multiplies t^j.
/// Trailing zero coefficients are allowed and ignored by degree().
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Scalar> coeffs) : coeffs_(std::move(coeffs)) {}
    Polynomial(std::initializer_list<Scalar> coeffs) : coeffs_(coeffs) {}

    static Polynomial from_real(std::span<const double> coeffs, Scalar scale = 1.0);

    /// Highest index with a nonzero coefficient; -1 for the zero polynomial.
    int degree() const;
    bool is_zero() const { return degree() < 0; }

    std::span<const Scalar> coeffs() const { return coeffs_; }
    std::size_t size() const { return coeffs_.size(); }
    /// Coefficient j, zero beyond the stored range.
    Scalar operator[](std::size_t j) const { return j < coeffs_.size() ? coeffs_[j] : Scalar{}; }

    /// Horner evaluation.
    Scalar operator()(double t) const;

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    Polynomial& operator*=(Scalar c);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
    friend Polynomial operator*(Polynomial a, Scalar c) { return a *= c; }
    friend Polynomial operator*(Scalar c, Polynomial a) { return a *= c; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

    /// Exact equality of the coefficients, ignoring trailing zeros.
    friend bool operator==(const Polynomial& a, const Polynomial& b);

private:
    std::vector<Scalar> coeffs_;
};

inline Scalar eval(const Polynomial& p, double t) { return p(t); }
Polynomial derivative(const Polynomial& p);
inline Polynomial multiply(const Polynomial& p, const Polynomial& q) { return p * q; }

/// Coefficients of the second-order operator A·D² + B·D + C that annihilates
/// every solution of f' + p1·f = 0 and of f' + p2·f = 0.
struct AbcPolynomials {
    Polynomial A, B, C;
};

/// Throws SeparationError(EqualOperators) when p1 == p2.
AbcPolynomials compose_abc(const Polynomial& p1, const Polynomial& p2);

/// All complex roots of p, as companion-matrix eigenvalues.
std::vector<Scalar> roots(const Polynomial& p);

} // namespace polysep
