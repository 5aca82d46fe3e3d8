#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hiercc {

// Half-open index interval [lo, hi).
struct IndexRange {
    std::size_t lo = 0;
    std::size_t hi = 0;

    std::size_t size() const { return hi - lo; }
    bool valid_within(std::size_t n) const { return lo <= hi && hi <= n; }
};

inline bool operator==(const IndexRange& a, const IndexRange& b) {
    return a.lo == b.lo && a.hi == b.hi;
}

// Dense row-major matrix of 64-bit reals.
class Matrix {
  public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("matrix dimensions must be positive");
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("matrix dimensions must be positive");
        if (data_.size() != rows * cols)
            throw std::invalid_argument("matrix data length does not match rows*cols");
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        if (rows.size() == 0)
            throw std::invalid_argument("matrix needs at least one row");
        const std::size_t nc = rows.begin()->size();
        std::vector<double> data;
        data.reserve(rows.size() * nc);
        for (const auto& r : rows) {
            if (r.size() != nc)
                throw std::invalid_argument("ragged row in matrix literal");
            data.insert(data.end(), r.begin(), r.end());
        }
        Matrix m(rows.size(), nc, std::move(data));
        m.require_finite();
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<const double> values() const { return data_; }

    // Construction-from-input gate: NaN/Inf entries are rejected.
    void require_finite() const {
        for (double v : data_)
            if (!std::isfinite(v))
                throw std::invalid_argument("matrix entry is not finite");
    }

    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    // y += s * x, the encode/decode workhorse.
    Matrix& axpy(double s, const Matrix& x) {
        check_same_shape(x);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * x.data_[i];
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

  private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Rectangular window into a parent matrix.
struct BlockIndex {
    IndexRange rowRange;
    IndexRange colRange;
};

// Exact triple-loop product, g(a,b,c) = ab + c applied Nz times per entry.
// This is the correctness oracle every decode result is compared against.
inline Matrix matmul_reference(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ");
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Matrix c(n, m);
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
    for (std::size_t i = 0; i < n; ++i) {
        double* crow = cd + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ad[i * k + p];
            const double* brow = bd + p * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] = aip * brow[j] + crow[j];
        }
    }
    return c;
}

inline Matrix extract_block(const Matrix& m, const BlockIndex& idx) {
    if (!idx.rowRange.valid_within(m.rows()) || !idx.colRange.valid_within(m.cols()))
        throw std::invalid_argument("extract_block: index out of range");
    if (idx.rowRange.size() == 0 || idx.colRange.size() == 0)
        throw std::invalid_argument("extract_block: empty range");
    Matrix out(idx.rowRange.size(), idx.colRange.size());
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j)
            out(i, j) = m(idx.rowRange.lo + i, idx.colRange.lo + j);
    return out;
}

// Assemble a matrix from a 2-D grid of blocks. Heights must agree within a
// grid row, widths within a grid column.
inline Matrix concat_blocks(const std::vector<std::vector<Matrix>>& grid) {
    if (grid.empty() || grid.front().empty())
        throw std::invalid_argument("concat_blocks: empty grid");
    const std::size_t gcols = grid.front().size();
    std::size_t total_rows = 0, total_cols = 0;
    for (const auto& row : grid) {
        if (row.size() != gcols)
            throw std::invalid_argument("concat_blocks: ragged grid");
        for (std::size_t j = 0; j < gcols; ++j) {
            if (row[j].rows() != row[0].rows())
                throw std::invalid_argument("concat_blocks: block heights differ in a row");
            if (row[j].cols() != grid[0][j].cols())
                throw std::invalid_argument("concat_blocks: block widths differ in a column");
        }
        total_rows += row[0].rows();
    }
    for (std::size_t j = 0; j < gcols; ++j) total_cols += grid[0][j].cols();

    Matrix out(total_rows, total_cols);
    std::size_t roff = 0;
    for (const auto& row : grid) {
        std::size_t coff = 0;
        for (const auto& blk : row) {
            for (std::size_t i = 0; i < blk.rows(); ++i)
                for (std::size_t j = 0; j < blk.cols(); ++j)
                    out(roff + i, coff + j) = blk(i, j);
            coff += blk.cols();
        }
        roff += row[0].rows();
    }
    return out;
}

// Write src into dst starting at (row0, col0), adding onto existing entries.
inline void add_into(Matrix& dst, const Matrix& src, std::size_t row0, std::size_t col0) {
    if (row0 + src.rows() > dst.rows() || col0 + src.cols() > dst.cols())
        throw std::invalid_argument("add_into: block exceeds target");
    for (std::size_t i = 0; i < src.rows(); ++i)
        for (std::size_t j = 0; j < src.cols(); ++j)
            dst(row0 + i, col0 + j) += src(i, j);
}

inline double relative_frobenius_error(const Matrix& got, const Matrix& want) {
    if (got.rows() != want.rows() || got.cols() != want.cols())
        throw std::invalid_argument("relative error: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double d = got.values()[i] - want.values()[i];
        num += d * d;
        den += want.values()[i] * want.values()[i];
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

}  // namespace hiercc
