#include "dreco/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dreco/errors.hpp"
#include "dreco/kernels.hpp"

namespace dreco {

namespace {

void require_shape(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(std::string("shape mismatch in ") + what);
    }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    require_shape(a.cols == b.rows, "matmul");
    Matrix c(a.rows, b.cols);
    kernels::active().matmul_accum(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols);
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& bt) {
    require_shape(a.cols == bt.cols, "matmul_nt");
    Matrix c(a.rows, bt.rows);
    kernels::active().matmul_nt_accum(a.data.data(), bt.data.data(), c.data.data(), a.rows, a.cols, bt.rows);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require_shape(a.rows == b.rows, "matmul_tn");
    Matrix c(a.cols, b.cols);
    kernels::active().matmul_tn_accum(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols);
    return c;
}

Matrix axpby(double a, const Matrix& x, double b, const Matrix& y) {
    require_shape(x.same_shape(y), "axpby");
    Matrix out(x.rows, x.cols);
    kernels::active().axpby(a, x.data.data(), b, y.data.data(), out.data.data(), x.size());
    return out;
}

void add_row_vector(Matrix& m, const Matrix& bias) {
    require_shape(bias.rows == 1 && bias.cols == m.cols, "add_row_vector");
    for (std::size_t r = 0; r < m.rows; ++r) {
        kernels::active().add_inplace(bias.data.data(), m.row(r), m.cols);
    }
}

Matrix column_sums(const Matrix& m) {
    Matrix out(1, m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        kernels::active().add_inplace(m.row(r), out.data.data(), m.cols);
    }
    return out;
}

void tanh_inplace(Matrix& m) {
    for (double& v : m.data) {
        v = std::tanh(v);
    }
}

void scale_inplace(Matrix& m, double a) {
    kernels::active().scale(a, m.data.data(), m.data.data(), m.size());
}

void l2_normalize_rows(Matrix& m) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        double* row = m.row(r);
        const double sq = kernels::active().dot(row, row, m.cols);
        if (sq > 0.0) {
            kernels::active().scale(1.0 / std::sqrt(sq), row, row, m.cols);
        }
    }
}

bool all_finite(const Matrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

void require_finite(const Matrix& m, const char* what) {
    if (!all_finite(m)) {
        throw NumericError(std::string("non-finite values in ") + what);
    }
}

}  // namespace dreco
