#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsmkit {

// Dense row-major matrix. Sizes in this toolkit are small (p <= 46 model
// terms, a few hundred runs), so no blocking or expression templates.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }
    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

    [[nodiscard]] std::vector<double> column(std::size_t c) const;
    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

    [[nodiscard]] Matrix transposed() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;

// Householder QR with column pivoting, A·P = Q·R.
struct PivotedQr {
    Matrix qr;                          // R in the upper triangle, reflectors below
    std::vector<double> tau;            // reflector scale factors
    std::vector<std::size_t> perm;      // column j of A·P is column perm[j] of A
    std::size_t rank = 0;

    // Pivots with |R_jj| < tolerance·|R_00| count as zero.
    static PivotedQr factor(const Matrix& a, double tolerance);

    // Qᵀ·b for a vector of length rows().
    [[nodiscard]] std::vector<double> apply_qt(std::span<const double> b) const;

    // Least-squares solution for a full-rank factorization (rank == cols).
    [[nodiscard]] std::vector<double> solve(std::span<const double> b) const;

    // (AᵀA)⁻¹ = P·R⁻¹·R⁻ᵀ·Pᵀ, for a full-rank factorization.
    [[nodiscard]] Matrix inverse_gram() const;
};

// Symmetric eigendecomposition by cyclic Jacobi rotations.
struct SymmetricEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column i pairs with values[i]
};

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double off_diagonal_tolerance = 1e-12,
                            int max_sweeps = 100);

}  // namespace rsmkit
