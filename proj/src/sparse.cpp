#include "dynbc/sparse.hpp"

#include "dynbc/error.hpp"

#include <Eigen/QR>
#include <Eigen/SparseQR>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace dynbc {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    for (const auto& t : entries)
        if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= rows || static_cast<std::size_t>(t.col) >= cols)
            throw InvalidArgument("SparseMatrix::from_triplets: index out of range");
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row < b.row || (a.row == b.row && a.col < b.col);
    });
    SparseMatrix m(rows, cols);
    std::size_t k = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        while (k < entries.size() && static_cast<std::size_t>(entries[k].row) == r) {
            const int c = entries[k].col;
            double v = 0.0;
            while (k < entries.size() && static_cast<std::size_t>(entries[k].row) == r && entries[k].col == c) {
                v += entries[k].value;
                ++k;
            }
            if (v != 0.0) {
                m.cols_idx_.push_back(c);
                m.values_.push_back(v);
            }
        }
        m.offsets_[r + 1] = static_cast<int>(m.values_.size());
    }
    return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({static_cast<int>(i), static_cast<int>(i), 1.0});
    return from_triplets(n, n, std::move(t));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense, double drop_tol) {
    std::vector<Triplet> t;
    for (Eigen::Index i = 0; i < dense.rows(); ++i)
        for (Eigen::Index j = 0; j < dense.cols(); ++j)
            if (std::abs(dense(i, j)) > drop_tol) t.push_back({static_cast<int>(i), static_cast<int>(j), dense(i, j)});
    return from_triplets(dense.rows(), dense.cols(), std::move(t));
}

SparseMatrix SparseMatrix::from_eigen(const EigenSparse& m) {
    std::vector<Triplet> t;
    t.reserve(m.nonZeros());
    for (int r = 0; r < m.outerSize(); ++r)
        for (EigenSparse::InnerIterator it(m, r); it; ++it) t.push_back({r, static_cast<int>(it.col()), it.value()});
    return from_triplets(m.rows(), m.cols(), std::move(t));
}

double SparseMatrix::operator()(std::size_t i, std::size_t j) const {
    const auto begin = cols_idx_.begin() + offsets_[i];
    const auto end = cols_idx_.begin() + offsets_[i + 1];
    const auto it = std::lower_bound(begin, end, static_cast<int>(j));
    if (it != end && *it == static_cast<int>(j)) return values_[it - cols_idx_.begin()];
    return 0.0;
}

Vector SparseMatrix::operator*(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != cols_) throw InvalidArgument("SparseMatrix: dimension mismatch in matvec");
    Vector y = Vector::Zero(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) acc += values_[k] * x[cols_idx_[k]];
        y[r] = acc;
    }
    return y;
}

Vector SparseMatrix::transpose_times(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != rows_) throw InvalidArgument("SparseMatrix: dimension mismatch in transpose matvec");
    Vector y = Vector::Zero(cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) y[cols_idx_[k]] += values_[k] * x[r];
    return y;
}

std::vector<Triplet> SparseMatrix::triplets() const {
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) t.push_back({static_cast<int>(r), cols_idx_[k], values_[k]});
    return t;
}

SparseMatrix SparseMatrix::transpose() const {
    auto t = triplets();
    for (auto& e : t) std::swap(e.row, e.col);
    return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::operator*(double s) const {
    SparseMatrix m = *this;
    if (s == 0.0) return SparseMatrix(rows_, cols_);
    for (double& v : m.values_) v *= s;
    return m;
}

SparseMatrix SparseMatrix::operator+(const SparseMatrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw InvalidArgument("SparseMatrix: dimension mismatch in sum");
    auto t = triplets();
    auto o = other.triplets();
    t.insert(t.end(), o.begin(), o.end());
    return from_triplets(rows_, cols_, std::move(t));
}

SparseMatrix SparseMatrix::operator-(const SparseMatrix& other) const { return *this + other * -1.0; }

SparseMatrix SparseMatrix::operator*(const SparseMatrix& other) const {
    if (cols_ != other.rows_) throw InvalidArgument("SparseMatrix: dimension mismatch in product");
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < rows_; ++r)
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            const int mid = cols_idx_[k];
            for (int l = other.offsets_[mid]; l < other.offsets_[mid + 1]; ++l)
                t.push_back({static_cast<int>(r), other.cols_idx_[l], values_[k] * other.values_[l]});
        }
    return from_triplets(rows_, other.cols_, std::move(t));
}

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double SparseMatrix::symmetry_defect() const {
    if (rows_ != cols_) return std::numeric_limits<double>::infinity();
    const double scale = max_abs();
    if (scale == 0.0) return 0.0;
    double defect = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k)
            defect = std::max(defect, std::abs(values_[k] - (*this)(cols_idx_[k], r)));
    return defect / scale;
}

Vector SparseMatrix::row_sums() const {
    Vector s = Vector::Zero(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) s[r] += values_[k];
    return s;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) d(r, cols_idx_[k]) = values_[k];
    return d;
}

EigenSparse SparseMatrix::to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values_.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) t.emplace_back(static_cast<int>(r), cols_idx_[k], values_[k]);
    EigenSparse m(rows_, cols_);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

void SparseMatrix::write_matrix_market(std::ostream& out) const {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << rows_ << ' ' << cols_ << ' ' << values_.size() << '\n';
    out << std::setprecision(17);
    for (std::size_t r = 0; r < rows_; ++r)
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k)
            out << r + 1 << ' ' << cols_idx_[k] + 1 << ' ' << values_[k] << '\n';
}

void SparseMatrix::write_matrix_market(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_matrix_market(out);
}

SparseMatrix block_matrix(const std::vector<std::vector<const SparseMatrix*>>& blocks,
                          const std::vector<std::size_t>& row_sizes, const std::vector<std::size_t>& col_sizes) {
    std::vector<Triplet> t;
    std::size_t row0 = 0;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        std::size_t col0 = 0;
        for (std::size_t bj = 0; bj < blocks[bi].size(); ++bj) {
            if (const SparseMatrix* b = blocks[bi][bj]; b != nullptr && b->nnz() > 0) {
                if (b->rows() != row_sizes[bi] || b->cols() != col_sizes[bj])
                    throw InvalidArgument("block_matrix: block dimensions inconsistent");
                for (auto e : b->triplets())
                    t.push_back({e.row + static_cast<int>(row0), e.col + static_cast<int>(col0), e.value});
            }
            col0 += col_sizes[bj];
        }
        row0 += row_sizes[bi];
    }
    std::size_t rows = 0, cols = 0;
    for (auto r : row_sizes) rows += r;
    for (auto c : col_sizes) cols += c;
    return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

SparseMatrix block_diagonal(const SparseMatrix& a, const SparseMatrix& b) {
    return block_matrix({{&a, nullptr}, {nullptr, &b}}, {a.rows(), b.rows()}, {a.cols(), b.cols()});
}

SparseMatrix hstack(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows() != b.rows()) throw InvalidArgument("hstack: row counts differ");
    return block_matrix({{&a, &b}}, {a.rows()}, {a.cols(), b.cols()});
}

std::size_t row_rank(const SparseMatrix& m, double rel_tol) {
    if (m.rows() == 0) return 0;
    const double threshold = rel_tol * std::max(1.0, m.max_abs());
    // SparseQR's rank estimate is unreliable on rank-deficient input; use
    // dense column pivoting while the matrix fits comfortably.
    if (static_cast<double>(m.rows()) * static_cast<double>(m.cols()) <= 4e7) {
        Eigen::ColPivHouseholderQR<DenseMatrix> qr(m.transpose().to_dense());
        qr.setThreshold(threshold / std::max(qr.maxPivot(), threshold));
        return static_cast<std::size_t>(qr.rank());
    }
    Eigen::SparseMatrix<double, Eigen::ColMajor, int> mt = m.transpose().to_eigen();
    mt.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> qr;
    qr.setPivotThreshold(threshold);
    qr.compute(mt);
    if (qr.info() != Eigen::Success) throw Error("row_rank: QR factorization failed");
    return static_cast<std::size_t>(qr.rank());
}

}  // namespace dynbc
