#include "dreco/kernels.hpp"

#include <cmath>

// Reference kernels. Plain loops, no fused multiply-add: this is the
// baseline the SIMD variants are checked against.
namespace dreco::kernels {
namespace {

void axpby_scalar(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a * x[i] + b * y[i];
    }
}

void axpbypcz_scalar(double a, const double* x, double b, const double* y, double c, const double* z,
                     double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a * x[i] + b * y[i] + c * z[i];
    }
}

void scale_scalar(double a, const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a * x[i];
    }
}

void add_inplace_scalar(const double* x, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] += x[i];
    }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += x[i] * y[i];
    }
    return s;
}

double sumsq_diff_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

void matmul_accum_scalar(const double* a, const double* b, double* c,
                         std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            const double* brow = b + p * n;
            double* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void matmul_nt_accum_scalar(const double* a, const double* bt, double* c,
                            std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            c[i * n + j] += dot_scalar(arow, bt + j * k, k);
        }
    }
}

void matmul_tn_accum_scalar(const double* a, const double* b, double* c,
                            std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t r = 0; r < m; ++r) {
        const double* arow = a + r * k;
        const double* brow = b + r * n;
        for (std::size_t i = 0; i < k; ++i) {
            const double av = arow[i];
            double* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void adam_update_scalar(double* p, const double* g, double* mom1, double* mom2, std::size_t n,
                        double lr, double beta1, double beta2, double eps, double c1, double c2) {
    for (std::size_t i = 0; i < n; ++i) {
        mom1[i] = beta1 * mom1[i] + (1.0 - beta1) * g[i];
        mom2[i] = beta2 * mom2[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = mom1[i] / c1;
        const double vhat = mom2[i] / c2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar",
        axpby_scalar,
        axpbypcz_scalar,
        scale_scalar,
        add_inplace_scalar,
        dot_scalar,
        sumsq_diff_scalar,
        matmul_accum_scalar,
        matmul_nt_accum_scalar,
        matmul_tn_accum_scalar,
        adam_update_scalar,
    };
    return ops;
}

}  // namespace dreco::kernels
