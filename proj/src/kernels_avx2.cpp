#include "dreco/kernels.hpp"

#include <cmath>
#include <immintrin.h>

// AVX2+FMA variants of the hot loops. This translation unit is the only one
// compiled with -mavx2 -mfma; it must not be entered on CPUs without AVX2
// (dispatch in kernels.cpp guards that).
namespace dreco::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

void axpby_avx2(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    const __m256d bv = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        __m256d yv = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(av, xv, _mm256_mul_pd(bv, yv)));
    }
    for (; i < n; ++i) {
        out[i] = a * x[i] + b * y[i];
    }
}

void axpbypcz_avx2(double a, const double* x, double b, const double* y, double c, const double* z,
                   double* out, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    const __m256d bv = _mm256_set1_pd(b);
    const __m256d cv = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        __m256d yv = _mm256_loadu_pd(y + i);
        __m256d zv = _mm256_loadu_pd(z + i);
        __m256d r = _mm256_fmadd_pd(av, xv, _mm256_mul_pd(bv, yv));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(cv, zv, r));
    }
    for (; i < n; ++i) {
        out[i] = a * x[i] + b * y[i] + c * z[i];
    }
}

void scale_avx2(double a, const double* x, double* out, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) {
        out[i] = a * x[i];
    }
}

void add_inplace_avx2(const double* x, double* acc, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) {
        acc[i] += x[i];
    }
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        s += x[i] * y[i];
    }
    return s;
}

double sumsq_diff_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

// C(MxN) += A(MxK) B(KxN). Broadcast-A inner kernel: vectorizes over the
// output row, accumulation order over p matches the scalar reference.
void matmul_accum_avx2(const double* a, const double* b, double* c,
                       std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            const __m256d avv = _mm256_set1_pd(av);
            const double* brow = b + p * n;
            std::size_t j = 0;
            for (; j + 8 <= n; j += 8) {
                _mm256_storeu_pd(crow + j,
                                 _mm256_fmadd_pd(avv, _mm256_loadu_pd(brow + j), _mm256_loadu_pd(crow + j)));
                _mm256_storeu_pd(crow + j + 4,
                                 _mm256_fmadd_pd(avv, _mm256_loadu_pd(brow + j + 4), _mm256_loadu_pd(crow + j + 4)));
            }
            for (; j + 4 <= n; j += 4) {
                _mm256_storeu_pd(crow + j,
                                 _mm256_fmadd_pd(avv, _mm256_loadu_pd(brow + j), _mm256_loadu_pd(crow + j)));
            }
            for (; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void matmul_nt_accum_avx2(const double* a, const double* bt, double* c,
                          std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            c[i * n + j] += dot_avx2(arow, bt + j * k, k);
        }
    }
}

void matmul_tn_accum_avx2(const double* a, const double* b, double* c,
                          std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t r = 0; r < m; ++r) {
        const double* arow = a + r * k;
        const double* brow = b + r * n;
        for (std::size_t i = 0; i < k; ++i) {
            const double av = arow[i];
            const __m256d avv = _mm256_set1_pd(av);
            double* crow = c + i * n;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                _mm256_storeu_pd(crow + j,
                                 _mm256_fmadd_pd(avv, _mm256_loadu_pd(brow + j), _mm256_loadu_pd(crow + j)));
            }
            for (; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void adam_update_avx2(double* p, const double* g, double* mom1, double* mom2, std::size_t n,
                      double lr, double beta1, double beta2, double eps, double c1, double c2) {
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d ob1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d ob2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d ic1 = _mm256_set1_pd(1.0 / c1);
    const __m256d ic2 = _mm256_set1_pd(1.0 / c2);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d gv = _mm256_loadu_pd(g + i);
        __m256d m1 = _mm256_fmadd_pd(b1, _mm256_loadu_pd(mom1 + i), _mm256_mul_pd(ob1, gv));
        __m256d m2 = _mm256_fmadd_pd(b2, _mm256_loadu_pd(mom2 + i), _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(mom1 + i, m1);
        _mm256_storeu_pd(mom2 + i, m2);
        __m256d mhat = _mm256_mul_pd(m1, ic1);
        __m256d vhat = _mm256_mul_pd(m2, ic2);
        __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
        __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        mom1[i] = beta1 * mom1[i] + (1.0 - beta1) * g[i];
        mom2[i] = beta2 * mom2[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = mom1[i] / c1;
        const double vhat = mom2[i] / c2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

const Ops& avx2_ops();

const Ops& avx2_ops() {
    static const Ops ops = {
        "avx2",
        axpby_avx2,
        axpbypcz_avx2,
        scale_avx2,
        add_inplace_avx2,
        dot_avx2,
        sumsq_diff_avx2,
        matmul_accum_avx2,
        matmul_nt_accum_avx2,
        matmul_tn_accum_avx2,
        adam_update_avx2,
    };
    return ops;
}

}  // namespace dreco::kernels
