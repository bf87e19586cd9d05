#pragma once

// Dense real linear algebra sized for control problems with a handful of
// states. Everything is double precision and value-semantic; no external
// solver is linked. The eigensolve here is deliberately minimal: the rest of
// the library only ever needs the smallest eigenvalue of a symmetric matrix,
// which bisection over a Cholesky positivity probe provides with certified
// accuracy.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "switchsurf/tolerances.hpp"

namespace switchsurf {

namespace detail {
inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}
}  // namespace detail

class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t n) : data_(n, 0.0) {}
    Vector(std::size_t n, double value) : data_(n, value) {}
    Vector(std::initializer_list<double> init) : data_(init) {}

    static Vector zero(std::size_t n) { return Vector(n); }

    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    void push_back(double v) { data_.push_back(v); }
    [[nodiscard]] auto begin() const { return data_.begin(); }
    [[nodiscard]] auto end() const { return data_.end(); }

    [[nodiscard]] const std::vector<double>& data() const { return data_; }

    Vector& operator+=(const Vector& rhs) {
        detail::require(size() == rhs.size(), "vector size mismatch");
        for (std::size_t i = 0; i < size(); ++i) data_[i] += rhs[i];
        return *this;
    }
    Vector& operator-=(const Vector& rhs) {
        detail::require(size() == rhs.size(), "vector size mismatch");
        for (std::size_t i = 0; i < size(); ++i) data_[i] -= rhs[i];
        return *this;
    }
    Vector& operator*=(double c) {
        for (double& v : data_) v *= c;
        return *this;
    }

private:
    std::vector<double> data_;
};

inline Vector operator+(Vector a, const Vector& b) { return a += b; }
inline Vector operator-(Vector a, const Vector& b) { return a -= b; }
inline Vector operator*(double c, Vector v) { return v *= c; }
inline Vector operator*(Vector v, double c) { return v *= c; }
inline Vector operator-(Vector v) { return v *= -1.0; }

[[nodiscard]] inline double dot(const Vector& a, const Vector& b) {
    detail::require(a.size() == b.size(), "vector size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

[[nodiscard]] inline double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

[[nodiscard]] inline double norm_inf(const Vector& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

[[nodiscard]] inline bool all_finite(const Vector& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            detail::require(row.size() == cols_, "ragged matrix initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Matrix& operator+=(const Matrix& rhs) {
        detail::require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "matrix shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& rhs) {
        detail::require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "matrix shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
        return *this;
    }
    Matrix& operator*=(double c) {
        for (double& v : data_) v *= c;
        return *this;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(double c, Matrix m) { return m *= c; }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    detail::require(a.cols() == b.rows(), "matrix shape mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

inline Vector operator*(const Matrix& m, const Vector& v) {
    detail::require(m.cols() == v.size(), "matrix/vector shape mismatch");
    Vector out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

[[nodiscard]] inline Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

[[nodiscard]] inline double max_abs(const Matrix& m) {
    double v = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) v = std::max(v, std::abs(m(i, j)));
    return v;
}

[[nodiscard]] inline double max_asymmetry(const Matrix& m) {
    detail::require(m.square(), "square matrix required");
    double v = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            v = std::max(v, std::abs(m(i, j) - m(j, i)));
    return v;
}

[[nodiscard]] inline Matrix symmetrize(const Matrix& m) {
    detail::require(m.square(), "square matrix required");
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = 0.5 * (m(i, j) + m(j, i));
    return out;
}

namespace detail {

inline void check_symmetric(const Matrix& m, const char* who) {
    require(m.square(), "square matrix required");
    const double scale = std::max(1.0, max_abs(m));
    if (max_asymmetry(m) > tol::kSymmetry * scale)
        throw std::invalid_argument(std::string(who) + ": input is not symmetric");
}

// Cholesky positivity probe on an (assumed symmetric) matrix. Returns false
// as soon as a pivot fails to be strictly positive or a non-finite value
// appears.
inline bool cholesky_positive(const Matrix& s) {
    const std::size_t n = s.rows();
    Matrix l(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        double d = s(k, k);
        for (std::size_t j = 0; j < k; ++j) d -= l(k, j) * l(k, j);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        l(k, k) = std::sqrt(d);
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = s(i, k);
            for (std::size_t j = 0; j < k; ++j) v -= l(i, j) * l(k, j);
            l(i, k) = v / l(k, k);
        }
    }
    return true;
}

struct Lu {
    Matrix lu;
    std::vector<std::size_t> perm;
    bool singular = false;
};

inline Lu lu_factor(Matrix a) {
    require(a.square(), "square matrix required");
    const std::size_t n = a.rows();
    Lu f;
    f.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
    const double scale = std::max(1.0, max_abs(a));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (std::abs(a(p, k)) <= tol::kSingularPivot * scale) {
            f.singular = true;
            f.lu = std::move(a);
            return f;
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(f.perm[k], f.perm[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            a(i, k) /= a(k, k);
            const double m = a(i, k);
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
        }
    }
    f.lu = std::move(a);
    return f;
}

inline Vector lu_solve(const Lu& f, const Vector& b) {
    const std::size_t n = f.lu.rows();
    require(b.size() == n, "matrix/vector shape mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
        x[i] /= f.lu(i, i);
    }
    return x;
}

}  // namespace detail

/// Solves A x = b by LU with partial pivoting. Throws std::runtime_error on
/// (numerical) singularity.
[[nodiscard]] inline Vector solve(const Matrix& a, const Vector& b) {
    auto f = detail::lu_factor(a);
    if (f.singular) throw std::runtime_error("linear solve: matrix is singular");
    return detail::lu_solve(f, b);
}

/// Solves the continuous-time Lyapunov equation A^T P + P A = -Q for P by
/// vectorizing into an n^2 x n^2 linear system (partial-pivot LU, one step of
/// iterative refinement). Works whether or not A is stable; requires only
/// that A and -A share no eigenvalue. Throws std::runtime_error when the
/// equation has no unique solution or the residual certificate fails.
[[nodiscard]] inline Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    detail::require(a.square(), "square matrix required");
    detail::require(q.rows() == a.rows() && q.cols() == a.cols(), "matrix shape mismatch");
    const std::size_t n = a.rows();
    const std::size_t nn = n * n;

    // Unknown P_{kl} at flat index k*n+l; equation (i,j) at flat index i*n+j:
    //   sum_k A_{ki} P_{kj} + sum_l P_{il} A_{lj} = -Q_{ij}
    Matrix big(nn, nn);
    Vector rhs(nn);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t e = i * n + j;
            rhs[e] = -q(i, j);
            for (std::size_t k = 0; k < n; ++k) big(e, k * n + j) += a(k, i);
            for (std::size_t l = 0; l < n; ++l) big(e, i * n + l) += a(l, j);
        }

    auto f = detail::lu_factor(big);
    if (f.singular) throw std::runtime_error("lyapunov equation has no unique solution");
    Vector p = detail::lu_solve(f, rhs);

    // One refinement pass: solve for the residual correction in the same
    // factorization. Cheap, and keeps the residual certificate honest for
    // moderately conditioned inputs.
    Vector r(nn);
    for (std::size_t e = 0; e < nn; ++e) {
        double s = rhs[e];
        for (std::size_t u = 0; u < nn; ++u) s -= big(e, u) * p[u];
        r[e] = s;
    }
    Vector dp = detail::lu_solve(f, r);
    p += dp;

    Matrix pm(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) pm(k, l) = p[k * n + l];
    pm = symmetrize(pm);

    const Matrix resid = transpose(a) * pm + pm * a + q;
    if (max_abs(resid) > tol::kLyapunovResidual * (1.0 + max_abs(q)))
        throw std::runtime_error("lyapunov solve: residual certificate failed");
    return pm;
}

/// True when the (symmetric, within tolerance) matrix is positive definite,
/// decided by strict positivity of all Cholesky pivots. Asymmetric input is
/// a contract violation.
[[nodiscard]] inline bool is_positive_definite(const Matrix& m) {
    detail::check_symmetric(m, "is_positive_definite");
    return detail::cholesky_positive(symmetrize(m));
}

/// Hurwitz test via the Lyapunov criterion: A is Hurwitz iff
/// solve_lyapunov(A, I) yields a positive definite P. Cases where the
/// Lyapunov operator is singular (eigenvalues of A mirrored across the
/// imaginary axis, including axis eigenvalues) are correctly reported as not
/// Hurwitz.
[[nodiscard]] inline bool is_hurwitz(const Matrix& a) {
    detail::require(a.square(), "square matrix required");
    try {
        return is_positive_definite(solve_lyapunov(a, Matrix::identity(a.rows())));
    } catch (const std::runtime_error&) {
        return false;
    }
}

/// Smallest eigenvalue of a symmetric matrix by bisection on t with the
/// Cholesky probe "M - t I positive definite?", bracketed by Gershgorin
/// bounds. The returned value is within tol::kEigenBisect of the true
/// minimum eigenvalue.
[[nodiscard]] inline double min_symmetric_eigenvalue(const Matrix& m) {
    detail::check_symmetric(m, "min_symmetric_eigenvalue");
    const Matrix s = symmetrize(m);
    const std::size_t n = s.rows();

    double glo = 0.0, ghi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double radius = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) radius += std::abs(s(i, j));
        const double lo_i = s(i, i) - radius, hi_i = s(i, i) + radius;
        if (i == 0 || lo_i < glo) glo = lo_i;
        if (i == 0 || hi_i > ghi) ghi = hi_i;
    }

    // Invariant: lambda_min in (lo, hi]. The +-1 padding makes the initial
    // probes strict even for diagonal matrices that sit exactly on their
    // Gershgorin bound.
    double lo = glo - 1.0, hi = ghi + 1.0;
    auto shifted_pd = [&](double t) {
        Matrix probe = s;
        for (std::size_t i = 0; i < n; ++i) probe(i, i) -= t;
        return detail::cholesky_positive(probe);
    };
    for (int iter = 0; iter < 200 && hi - lo > 0.5 * tol::kEigenBisect; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // double resolution exhausted
        (shifted_pd(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace switchsurf
