#include "qmab/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qmab/errors.hpp"

namespace qmab::matcore {

namespace {

constexpr std::size_t kMaxDim = 16;
constexpr int kMaxSweeps = 64;

void check_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw ContractError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

SymMatrix::SymMatrix(std::size_t n, double diagonal) : n_(n), a_(n * n, 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
        a_[i * n + i] = diagonal;
    }
}

SymMatrix SymMatrix::identity(std::size_t n, double scale) {
    return SymMatrix(n, scale);
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
    SymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        m.a_[i * d.size() + i] = d[i];
    }
    return m;
}

SymMatrix SymMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n = rows.size();
    SymMatrix m(n);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != n) {
            throw ContractError("from_rows: matrix is not square");
        }
        std::size_t j = 0;
        for (double v : row) {
            m.a_[i * n + j] = v;
            ++j;
        }
        ++i;
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = r + 1; c < n; ++c) {
            if (m(r, c) != m(c, r)) {
                throw ContractError("from_rows: matrix is not symmetric");
            }
        }
    }
    return m;
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
    a_[i * n_ + j] = value;
    a_[j * n_ + i] = value;
}

Vec SymMatrix::apply(const Vec& x) const {
    check_same_dim(n_, x.size(), "SymMatrix::apply");
    Vec y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            s += a_[i * n_ + j] * x[j];
        }
        y[i] = s;
    }
    return y;
}

double SymMatrix::quad(const Vec& x) const {
    return dot(x, apply(x));
}

double SymMatrix::frobenius() const {
    double s = 0.0;
    for (double v : a_) {
        s += v * v;
    }
    return std::sqrt(s);
}

double SymMatrix::trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        s += a_[i * n_ + i];
    }
    return s;
}

bool SymMatrix::all_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

void SymMatrix::append_dimension(double diagonal) {
    const std::size_t m = n_ + 1;
    std::vector<double> b(m * m, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            b[i * m + j] = a_[i * n_ + j];
        }
    }
    b[n_ * m + n_] = diagonal;
    n_ = m;
    a_ = std::move(b);
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
    check_same_dim(n_, other.n_, "SymMatrix::operator+");
    SymMatrix r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) {
        r.a_[i] += other.a_[i];
    }
    return r;
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
    check_same_dim(n_, other.n_, "SymMatrix::operator-");
    SymMatrix r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) {
        r.a_[i] -= other.a_[i];
    }
    return r;
}

SymMatrix SymMatrix::operator*(double s) const {
    SymMatrix r = *this;
    for (double& v : r.a_) {
        v *= s;
    }
    return r;
}

double EigenDecomposition::log_det() const {
    double s = 0.0;
    for (double v : values) {
        s += std::log(v);
    }
    return s;
}

SymMatrix EigenDecomposition::reconstruct() const {
    const std::size_t n = values.size();
    SymMatrix m(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                m.set(i, j, m(i, j) + values[k] * vectors[k][i] * vectors[k][j]);
            }
        }
    }
    return m;
}

// Cyclic Jacobi: sweep over every (p, q) pair and annihilate a_pq with a plane
// rotation until the off-diagonal mass is negligible.
EigenDecomposition eig_sym(const SymMatrix& m) {
    const std::size_t n = m.dim();
    if (n == 0 || n > kMaxDim) {
        throw ContractError("eig_sym: dimension must be in [1, 16], got " + std::to_string(n));
    }
    if (!m.all_finite()) {
        throw InputError("eig_sym: matrix has non-finite entries");
    }

    std::vector<double> a(n * n);
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a[i * n + j] = m(i, j);
        }
        v[i * n + i] = 1.0;
    }
    auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
    auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * n + j]; };

    const double scale = m.frobenius();
    const double tol = (1e-15 * scale) * (1e-15 * scale);

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += A(p, q) * A(p, q);
            }
        }
        if (off <= tol || off == 0.0) {
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = A(k, p);
                    const double akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = A(p, k);
                    const double aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                A(p, q) = 0.0;
                A(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = V(k, p);
                    const double vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return A(i, i) < A(j, j); });

    EigenDecomposition out;
    out.values.reserve(n);
    out.vectors.reserve(n);
    for (std::size_t idx : order) {
        out.values.push_back(A(idx, idx));
        Vec col(n);
        for (std::size_t k = 0; k < n; ++k) {
            col[k] = V(k, idx);
        }
        const double len = norm(col);
        std::size_t big = 0;
        for (std::size_t k = 1; k < n; ++k) {
            if (std::abs(col[k]) > std::abs(col[big])) {
                big = k;
            }
        }
        const double sign = col[big] < 0.0 ? -1.0 : 1.0;
        for (double& x : col) {
            x *= sign / len;
        }
        out.vectors.push_back(std::move(col));
    }
    return out;
}

SymMatrix rank1_update(const SymMatrix& v, const Vec& a, double w) {
    check_same_dim(v.dim(), a.size(), "rank1_update");
    if (!std::isfinite(w) || w < 0.0) {
        throw ContractError("rank1_update: weight must be finite and nonnegative");
    }
    SymMatrix r = v;
    const std::size_t n = v.dim();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            r.set(i, j, v(i, j) + w * a[i] * a[j]);
        }
    }
    return r;
}

double weighted_norm(const Vec& x, const SymMatrix& m) {
    const double q = m.quad(x);
    if (q < -1e-12) {
        throw PsdViolationError("weighted_norm: quadratic form is negative (" + std::to_string(q) + ")");
    }
    return std::sqrt(std::max(q, 0.0));
}

Vec solve_eig(const EigenDecomposition& eig, const Vec& b) {
    check_same_dim(eig.dim(), b.size(), "solve_eig");
    if (eig.min() <= kSingularThreshold) {
        throw SingularMatrixError("solve: smallest eigenvalue " + std::to_string(eig.min()) +
                                  " is below the singularity threshold");
    }
    Vec x(b.size(), 0.0);
    for (std::size_t k = 0; k < eig.dim(); ++k) {
        axpy(dot(eig.vectors[k], b) / eig.values[k], eig.vectors[k], x);
    }
    return x;
}

// Cholesky solve with one step of iterative refinement, guarded by an
// eigenvalue check so the singular-matrix threshold is exact.
Vec solve_psd(const SymMatrix& v, const Vec& b) {
    check_same_dim(v.dim(), b.size(), "solve_psd");
    const EigenDecomposition eig = eig_sym(v);
    if (eig.min() <= kSingularThreshold) {
        throw SingularMatrixError("solve_psd: smallest eigenvalue " + std::to_string(eig.min()) +
                                  " is below the singularity threshold");
    }
    const std::size_t n = v.dim();
    std::vector<double> l(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = v(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            d -= l[j * n + k] * l[j * n + k];
        }
        if (d <= 0.0) {
            return solve_eig(eig, b);
        }
        l[j * n + j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = v(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / l[j * n + j];
        }
    }
    auto chol_solve = [&](const Vec& rhs) {
        Vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = rhs[i];
            for (std::size_t k = 0; k < i; ++k) {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        Vec x(n);
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) {
                s -= l[k * n + ii] * x[k];
            }
            x[ii] = s / l[ii * n + ii];
        }
        return x;
    };
    Vec x = chol_solve(b);
    const Vec r = sub(b, v.apply(x));
    const Vec dx = chol_solve(r);
    axpy(1.0, dx, x);
    return x;
}

double dot(const Vec& a, const Vec& b) {
    check_same_dim(a.size(), b.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm(const Vec& a) {
    return std::sqrt(dot(a, a));
}

Vec normalized(const Vec& a) {
    const double n = norm(a);
    if (n == 0.0) {
        throw ContractError("normalized: zero vector");
    }
    return scaled(a, 1.0 / n);
}

Vec add(const Vec& a, const Vec& b) {
    check_same_dim(a.size(), b.size(), "add");
    Vec r(a);
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] += b[i];
    }
    return r;
}

Vec sub(const Vec& a, const Vec& b) {
    check_same_dim(a.size(), b.size(), "sub");
    Vec r(a);
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] -= b[i];
    }
    return r;
}

Vec scaled(const Vec& a, double s) {
    Vec r(a);
    for (double& x : r) {
        x *= s;
    }
    return r;
}

void axpy(double s, const Vec& x, Vec& y) {
    check_same_dim(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] += s * x[i];
    }
}

Vec unit_vector(std::size_t dim, std::size_t axis) {
    require(axis < dim, "unit_vector: axis out of range");
    Vec e(dim, 0.0);
    e[axis] = 1.0;
    return e;
}

}  // namespace qmab::matcore
