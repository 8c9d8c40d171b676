#pragma once

#include <cstddef>
#include <vector>

namespace dreco {

// Dense row-major matrix of doubles. Every row vector in the pipeline
// (interaction rows, noise, denoiser activations) lives in one of these.
// Immutable once handed across a module boundary; cheap to move.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool operator==(const Matrix& o) const = default;
};

// All of these throw std::invalid_argument on shape mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);       // a(MxK) * b(KxN)
Matrix matmul_nt(const Matrix& a, const Matrix& bt);   // a(MxK) * bt(NxK)^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);    // a(MxK)^T * b(MxN)

Matrix axpby(double a, const Matrix& x, double b, const Matrix& y);
void add_row_vector(Matrix& m, const Matrix& bias);    // bias is 1 x cols
Matrix column_sums(const Matrix& m);                   // 1 x cols
void tanh_inplace(Matrix& m);
void scale_inplace(Matrix& m, double a);

// Per-row L2 normalization; all-zero rows are left untouched.
void l2_normalize_rows(Matrix& m);

bool all_finite(const Matrix& m);
// Throws NumericError naming `what` if any entry is NaN/Inf.
void require_finite(const Matrix& m, const char* what);

}  // namespace dreco
