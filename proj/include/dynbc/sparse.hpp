#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dynbc {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using EigenSparse = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

struct Triplet {
    int row;
    int col;
    double value;
};

/// Real sparse matrix in compressed-row storage.
///
/// Column indices are sorted and unique within each row, and no explicit
/// zeros are stored once the matrix has been built.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols);

    /// Duplicates are summed in a fixed order (the order of `entries` after a
    /// stable sort by position), so the result is deterministic.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
    static SparseMatrix identity(std::size_t n);
    static SparseMatrix from_dense(const DenseMatrix& dense, double drop_tol = 0.0);
    static SparseMatrix from_eigen(const EigenSparse& m);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const int> row_offsets() const noexcept { return offsets_; }
    std::span<const int> col_indices() const noexcept { return cols_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Entry (i, j), zero if not stored.
    double operator()(std::size_t i, std::size_t j) const;

    Vector operator*(const Vector& x) const;
    /// y = Aᵀ x without forming the transpose.
    Vector transpose_times(const Vector& x) const;
    SparseMatrix transpose() const;
    SparseMatrix operator*(double s) const;
    SparseMatrix operator+(const SparseMatrix& other) const;
    SparseMatrix operator-(const SparseMatrix& other) const;
    SparseMatrix operator*(const SparseMatrix& other) const;

    double max_abs() const;
    /// max |a_ij - a_ji| / max |a|.
    double symmetry_defect() const;
    bool is_symmetric(double rel_tol = 1e-14) const { return symmetry_defect() <= rel_tol; }

    /// Sum of each row.
    Vector row_sums() const;

    DenseMatrix to_dense() const;
    EigenSparse to_eigen() const;
    std::vector<Triplet> triplets() const;

    /// MatrixMarket coordinate format with 17 significant digits.
    void write_matrix_market(std::ostream& out) const;
    void write_matrix_market(const std::string& path) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<int> offsets_{0};
    std::vector<int> cols_idx_;
    std::vector<double> values_;
};

/// Block matrix from a grid of optional blocks. Empty (0x0) entries are
/// treated as zero blocks; row heights and column widths are given.
SparseMatrix block_matrix(const std::vector<std::vector<const SparseMatrix*>>& blocks,
                          const std::vector<std::size_t>& row_sizes, const std::vector<std::size_t>& col_sizes);

/// Block diagonal of two matrices.
SparseMatrix block_diagonal(const SparseMatrix& a, const SparseMatrix& b);

/// Horizontal concatenation [a | b].
SparseMatrix hstack(const SparseMatrix& a, const SparseMatrix& b);

/// Numerical row rank of `m` from a column-pivoted QR of mᵀ (dense at desk
/// scale, sparse QR beyond).
std::size_t row_rank(const SparseMatrix& m, double rel_tol = 1e-10);

}  // namespace dynbc
