#include "rsmkit/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace rsmkit {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    assert(a.cols() == b.rows());
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
    assert(a.cols() == x.size());
    std::vector<double> out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) noexcept {
    // Scaled accumulation so huge or tiny entries do not overflow/underflow.
    double scale = 0.0;
    double ssq = 1.0;
    for (double v : a) {
        if (v == 0.0) continue;
        const double av = std::fabs(v);
        if (scale < av) {
            ssq = 1.0 + ssq * (scale / av) * (scale / av);
            scale = av;
        } else {
            ssq += (av / scale) * (av / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

namespace {

double column_tail_norm(const Matrix& m, std::size_t col, std::size_t from_row) {
    std::vector<double> tail;
    tail.reserve(m.rows() - from_row);
    for (std::size_t r = from_row; r < m.rows(); ++r) tail.push_back(m(r, col));
    return norm2(tail);
}

}  // namespace

PivotedQr PivotedQr::factor(const Matrix& a, double tolerance) {
    PivotedQr f;
    f.qr = a;
    const std::size_t n = a.rows();
    const std::size_t p = a.cols();
    const std::size_t steps = std::min(n, p);
    f.tau.assign(steps, 0.0);
    f.perm.resize(p);
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    Matrix& m = f.qr;

    for (std::size_t j = 0; j < steps; ++j) {
        // Norms are recomputed rather than downdated; p is small.
        std::size_t best = j;
        double best_norm = -1.0;
        for (std::size_t c = j; c < p; ++c) {
            const double nc = column_tail_norm(m, c, j);
            if (nc > best_norm) {
                best_norm = nc;
                best = c;
            }
        }
        if (best != j) {
            for (std::size_t r = 0; r < n; ++r) std::swap(m(r, j), m(r, best));
            std::swap(f.perm[j], f.perm[best]);
        }

        const double x0 = m(j, j);
        const double xnorm = best_norm;
        if (xnorm == 0.0) {
            f.tau[j] = 0.0;
            continue;
        }
        const double beta = -std::copysign(xnorm, x0);
        f.tau[j] = (beta - x0) / beta;
        const double scale = 1.0 / (x0 - beta);
        for (std::size_t r = j + 1; r < n; ++r) m(r, j) *= scale;
        m(j, j) = beta;

        for (std::size_t c = j + 1; c < p; ++c) {
            double w = m(j, c);
            for (std::size_t r = j + 1; r < n; ++r) w += m(r, j) * m(r, c);
            w *= f.tau[j];
            m(j, c) -= w;
            for (std::size_t r = j + 1; r < n; ++r) m(r, c) -= w * m(r, j);
        }
    }

    const double lead = steps > 0 ? std::fabs(m(0, 0)) : 0.0;
    f.rank = 0;
    if (lead > 0.0) {
        for (std::size_t j = 0; j < steps; ++j) {
            if (std::fabs(m(j, j)) < tolerance * lead) break;
            ++f.rank;
        }
    }
    return f;
}

std::vector<double> PivotedQr::apply_qt(std::span<const double> b) const {
    std::vector<double> out(b.begin(), b.end());
    const std::size_t n = qr.rows();
    for (std::size_t j = 0; j < tau.size(); ++j) {
        if (tau[j] == 0.0) continue;
        double w = out[j];
        for (std::size_t r = j + 1; r < n; ++r) w += qr(r, j) * out[r];
        w *= tau[j];
        out[j] -= w;
        for (std::size_t r = j + 1; r < n; ++r) out[r] -= w * qr(r, j);
    }
    return out;
}

std::vector<double> PivotedQr::solve(std::span<const double> b) const {
    const std::size_t p = qr.cols();
    assert(rank == p);
    const std::vector<double> c = apply_qt(b);
    std::vector<double> z(p);
    for (std::size_t jj = p; jj-- > 0;) {
        double s = c[jj];
        for (std::size_t k = jj + 1; k < p; ++k) s -= qr(jj, k) * z[k];
        z[jj] = s / qr(jj, jj);
    }
    std::vector<double> x(p);
    for (std::size_t j = 0; j < p; ++j) x[perm[j]] = z[j];
    return x;
}

Matrix PivotedQr::inverse_gram() const {
    const std::size_t p = qr.cols();
    assert(rank == p);
    Matrix rinv(p, p);
    for (std::size_t col = 0; col < p; ++col) {
        rinv(col, col) = 1.0 / qr(col, col);
        for (std::size_t row = col; row-- > 0;) {
            double s = 0.0;
            for (std::size_t k = row + 1; k <= col; ++k) s += qr(row, k) * rinv(k, col);
            rinv(row, col) = -s / qr(row, row);
        }
    }
    Matrix out(p, p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            double s = 0.0;
            for (std::size_t k = std::max(a, b); k < p; ++k) s += rinv(a, k) * rinv(b, k);
            out(perm[a], perm[b]) = s;
            out(perm[b], perm[a]) = s;
        }
    return out;
}

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double off_diagonal_tolerance, int max_sweeps) {
    const std::size_t n = symmetric.rows();
    Matrix a = symmetric;
    Matrix v = Matrix::identity(n);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };
    const double total = norm2(symmetric.data());

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= off_diagonal_tolerance * total) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        out.values[col] = a(src, src);
        // Sign convention: largest-magnitude component positive.
        std::size_t arg = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (std::fabs(v(k, src)) > std::fabs(v(arg, src))) arg = k;
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k) out.vectors(k, col) = sign * v(k, src);
    }
    return out;
}

}  // namespace rsmkit
