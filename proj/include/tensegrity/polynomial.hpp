#pragma once

// Dense univariate polynomials over double plus the 3x3-coefficient bivariate
// quadratics produced by the tan-half substitution. Small degrees only: the
// eliminant of the equilibrium system never exceeds degree 8.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tensegrity {

struct ZeroPolynomial : std::invalid_argument {
    ZeroPolynomial() : std::invalid_argument("polynomial is identically zero") {}
};

/// Coefficients stored in ascending order: c[0] + c[1] t + ...
class UnivariatePoly {
public:
    UnivariatePoly() = default;
    explicit UnivariatePoly(std::vector<double> ascending) : c_(std::move(ascending)) {}
    UnivariatePoly(std::initializer_list<double> ascending) : c_(ascending) {}

    int degree() const {
        for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i)
            if (c_[static_cast<size_t>(i)] != 0.0) return i;
        return -1;
    }

    double coeff(int i) const {
        return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[static_cast<size_t>(i)] : 0.0;
    }
    const std::vector<double>& coeffs() const { return c_; }

    double operator()(double t) const {
        double v = 0.0;
        for (size_t i = c_.size(); i-- > 0;) v = v * t + c_[i];
        return v;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (double x : c_) m = std::max(m, std::abs(x));
        return m;
    }

    /// Drop leading coefficients below rel_tol times the largest magnitude.
    UnivariatePoly trimmed(double rel_tol = 1e-12) const {
        const double cut = rel_tol * max_abs_coeff();
        size_t n = c_.size();
        while (n > 0 && std::abs(c_[n - 1]) <= cut) --n;
        return UnivariatePoly(std::vector<double>(c_.begin(), c_.begin() + n));
    }

    UnivariatePoly derivative() const {
        if (c_.size() <= 1) return UnivariatePoly({});
        std::vector<double> d(c_.size() - 1);
        for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
        return UnivariatePoly(std::move(d));
    }

    friend UnivariatePoly operator+(const UnivariatePoly& a, const UnivariatePoly& b) {
        std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
        return UnivariatePoly(std::move(r));
    }
    friend UnivariatePoly operator-(const UnivariatePoly& a, const UnivariatePoly& b) {
        std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(static_cast<int>(i)) - b.coeff(static_cast<int>(i));
        return UnivariatePoly(std::move(r));
    }
    friend UnivariatePoly operator*(const UnivariatePoly& a, const UnivariatePoly& b) {
        if (a.degree() < 0 || b.degree() < 0) return UnivariatePoly({});
        std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return UnivariatePoly(std::move(r));
    }
    friend UnivariatePoly operator*(double s, const UnivariatePoly& a) {
        std::vector<double> r = a.c_;
        for (double& x : r) x *= s;
        return UnivariatePoly(std::move(r));
    }

    /// Long division; returns (quotient, remainder).
    static std::pair<UnivariatePoly, UnivariatePoly> divrem(const UnivariatePoly& num,
                                                           const UnivariatePoly& den) {
        const int dn = num.degree(), dd = den.degree();
        if (dd < 0) throw ZeroPolynomial();
        if (dn < dd) return {UnivariatePoly({}), num};
        std::vector<double> rem(num.c_.begin(), num.c_.begin() + dn + 1);
        std::vector<double> quo(static_cast<size_t>(dn - dd) + 1, 0.0);
        const double lead = den.coeff(dd);
        for (int i = dn; i >= dd; --i) {
            const double f = rem[static_cast<size_t>(i)] / lead;
            quo[static_cast<size_t>(i - dd)] = f;
            for (int j = 0; j <= dd; ++j) rem[static_cast<size_t>(i - dd + j)] -= f * den.coeff(j);
            rem[static_cast<size_t>(i)] = 0.0;  // cancel exactly
        }
        rem.resize(static_cast<size_t>(dd));
        return {UnivariatePoly(std::move(quo)), UnivariatePoly(std::move(rem))};
    }

private:
    std::vector<double> c_;
};

struct RootCluster {
    double value = 0.0;
    int multiplicity = 0;
};

/// All real roots of a polynomial with multiplicities.
///
/// Eigenvalues of the balanced companion matrix seed Newton polishing on the
/// original polynomial; nearby results merge into clusters. Near-real complex
/// pairs whose polished residual stays large are discarded.
namespace detail {

// Parlett-Reinsch balancing: a diagonal similarity built from powers of two
// that equalizes row and column norms. Eigen's Schur pass does not balance,
// and an unbalanced companion loses small roots when the coefficients span
// many orders of magnitude.
inline void balance_companion(Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const double radix = 2.0, sq = radix * radix;
    bool again = true;
    int guard = 0;
    while (again && guard++ < 100) {
        again = false;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            double g = r / radix;
            while (c < g) {
                f *= radix;
                c *= sq;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sq;
            }
            if ((c + r) / f < 0.95 * s) {
                again = true;
                a.row(i) *= 1.0 / f;
                a.col(i) *= f;
            }
        }
    }
}

}  // namespace detail

inline std::vector<RootCluster> real_roots(const UnivariatePoly& poly, double cluster_tol = 1e-7,
                                           double imag_tol = 1e-4, double residual_tol = 1e-9) {
    UnivariatePoly p = poly.trimmed();
    if (p.degree() < 0) throw ZeroPolynomial();

    // Deflate roots at exactly zero; a vanishing constant term otherwise breaks
    // the relative residual check below.
    int zero_mult = 0;
    while (p.degree() > 0 && p.coeff(0) == 0.0) {
        std::vector<double> shifted(p.coeffs().begin() + 1, p.coeffs().end());
        p = UnivariatePoly(std::move(shifted));
        ++zero_mult;
    }
    const int deg = p.degree();
    if (deg == 0 && zero_mult == 0) return {};

    std::vector<double> polished(static_cast<size_t>(zero_mult), 0.0);

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(std::max(deg, 1), std::max(deg, 1));
    for (int i = 0; i < deg; ++i) {
        comp(i, deg - 1) = -p.coeff(i) / p.coeff(deg);
        if (i > 0) comp(i, i - 1) = 1.0;
    }
    detail::balance_companion(comp);
    Eigen::EigenSolver<Eigen::MatrixXd> es;
    if (deg > 0) es.compute(comp.topLeftCorner(deg, deg), /*computeEigenvectors=*/false);

    const UnivariatePoly dp = p.derivative();
    for (int i = 0; i < deg; ++i) {
        const std::complex<double> lam = es.eigenvalues()[i];
        if (std::abs(lam.imag()) > imag_tol * (1.0 + std::abs(lam.real()))) continue;
        double r = lam.real();
        double fr = p(r);
        for (int it = 0; it < 80; ++it) {
            const double d = dp(r);
            if (d == 0.0) break;
            double step = fr / d;
            double rn = r - step;
            double fn = p(rn);
            int backtrack = 0;
            while (std::abs(fn) > std::abs(fr) && backtrack++ < 20) {
                step *= 0.5;
                rn = r - step;
                fn = p(rn);
            }
            if (std::abs(fn) >= std::abs(fr) && backtrack >= 20) break;
            r = rn;
            fr = fn;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(r))) break;
        }
        // residual measured against the local coefficient scale
        double local = 0.0, tp = 1.0;
        for (int j = 0; j <= deg; ++j) {
            local += std::abs(p.coeff(j)) * std::abs(tp);
            tp *= r;
        }
        if (std::abs(fr) <= residual_tol * std::max(local, 1e-300)) polished.push_back(r);
    }

    std::sort(polished.begin(), polished.end());
    std::vector<RootCluster> out;
    for (double r : polished) {
        if (!out.empty() &&
            std::abs(r - out.back().value) <= cluster_tol * (1.0 + std::abs(out.back().value))) {
            // keep the representative with the smaller residual
            if (std::abs(p(r)) < std::abs(p(out.back().value))) out.back().value = r;
            ++out.back().multiplicity;
        } else {
            out.push_back({r, 1});
        }
    }
    return out;
}

/// Resultant of two univariate polynomials, computed as the determinant of the
/// Sylvester matrix at the effective (trimmed) degrees. Zero exactly when the
/// polynomials share a root. Throws ZeroPolynomial if either input vanishes.
inline double resultant(const UnivariatePoly& f_in, const UnivariatePoly& g_in) {
    const UnivariatePoly f = f_in.trimmed();
    const UnivariatePoly g = g_in.trimmed();
    const int m = f.degree(), n = g.degree();
    if (m < 0 || n < 0) throw ZeroPolynomial();
    if (m == 0 && n == 0) return 1.0;
    if (m == 0) return std::pow(f.coeff(0), n);
    if (n == 0) return std::pow(g.coeff(0), m);
    Eigen::MatrixXd syl = Eigen::MatrixXd::Zero(m + n, m + n);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j <= m; ++j) syl(r, r + j) = f.coeff(m - j);
    for (int r = 0; r < m; ++r)
        for (int j = 0; j <= n; ++j) syl(n + r, r + j) = g.coeff(n - j);
    return syl.determinant();
}

/// Bivariate polynomial of degree <= 2 in each variable; coeff(i, j) multiplies
/// t1^i t2^j.
class BivariatePoly {
public:
    BivariatePoly() { c_.fill({0.0, 0.0, 0.0}); }

    double coeff(int i, int j) const { return c_[static_cast<size_t>(i)][static_cast<size_t>(j)]; }
    void set_coeff(int i, int j, double v) { c_[static_cast<size_t>(i)][static_cast<size_t>(j)] = v; }

    double operator()(double t1, double t2) const {
        double v = 0.0;
        double p1 = 1.0;
        for (int i = 0; i <= 2; ++i) {
            v += p1 * (c_[static_cast<size_t>(i)][0] + t2 * (c_[static_cast<size_t>(i)][1] + t2 * c_[static_cast<size_t>(i)][2]));
            p1 *= t1;
        }
        return v;
    }

    double d_t1(double t1, double t2) const {
        double v = 0.0;
        for (int j = 0; j <= 2; ++j) {
            const double tj = std::pow(t2, j);
            v += (c_[1][static_cast<size_t>(j)] + 2.0 * c_[2][static_cast<size_t>(j)] * t1) * tj;
        }
        return v;
    }

    double d_t2(double t1, double t2) const {
        double v = 0.0;
        double p1 = 1.0;
        for (int i = 0; i <= 2; ++i) {
            v += p1 * (c_[static_cast<size_t>(i)][1] + 2.0 * c_[static_cast<size_t>(i)][2] * t2);
            p1 *= t1;
        }
        return v;
    }

    /// Coefficients as quadratic in t2: returns {a0(t1), a1(t1), a2(t1)}.
    std::array<UnivariatePoly, 3> coeffs_in_t2() const {
        std::array<UnivariatePoly, 3> a;
        for (int j = 0; j <= 2; ++j)
            a[static_cast<size_t>(j)] = UnivariatePoly({coeff(0, j), coeff(1, j), coeff(2, j)});
        return a;
    }

    /// The same polynomial with t1 and t2 exchanged.
    BivariatePoly swapped() const {
        BivariatePoly s;
        for (int i = 0; i <= 2; ++i)
            for (int j = 0; j <= 2; ++j) s.set_coeff(j, i, coeff(i, j));
        return s;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& row : c_)
            for (double x : row) m = std::max(m, std::abs(x));
        return m;
    }

private:
    std::array<std::array<double, 3>, 3> c_;
};

}  // namespace tensegrity
