#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the whole toolkit: fused scale-adds for
// the noising/denoising formulas, the three matmul layouts the denoiser
// forward/backward needs, and the Adam element update. A scalar reference
// implementation always exists; on x86-64 an AVX2+FMA variant is selected at
// runtime when the CPU supports it. The two variants are equivalence-tested
// against each other (FMA changes low-order bits, so tests compare with a
// tight relative tolerance, not bitwise).
namespace dreco::kernels {

struct Ops {
    const char* name;

    // out[i] = a*x[i] + b*y[i]
    void (*axpby)(double a, const double* x, double b, const double* y, double* out, std::size_t n);
    // out[i] = a*x[i] + b*y[i] + c*z[i]
    void (*axpbypcz)(double a, const double* x, double b, const double* y, double c, const double* z,
                     double* out, std::size_t n);
    // out[i] = a*x[i]
    void (*scale)(double a, const double* x, double* out, std::size_t n);
    // acc[i] += x[i]
    void (*add_inplace)(const double* x, double* acc, std::size_t n);
    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum_i (x[i]-y[i])^2
    double (*sumsq_diff)(const double* x, const double* y, std::size_t n);

    // C(MxN) += A(MxK) * B(KxN), all row-major
    void (*matmul_accum)(const double* a, const double* b, double* c,
                         std::size_t m, std::size_t k, std::size_t n);
    // C(MxN) += A(MxK) * Bt(NxK)^T   (B supplied row-major transposed)
    void (*matmul_nt_accum)(const double* a, const double* bt, double* c,
                            std::size_t m, std::size_t k, std::size_t n);
    // C(KxN) += A(MxK)^T * B(MxN)
    void (*matmul_tn_accum)(const double* a, const double* b, double* c,
                            std::size_t m, std::size_t k, std::size_t n);

    // One bias-corrected Adam update over n elements; c1 = 1-beta1^t, c2 = 1-beta2^t.
    void (*adam_update)(double* p, const double* g, double* mom1, double* mom2, std::size_t n,
                        double lr, double beta1, double beta2, double eps, double c1, double c2);
};

const Ops& scalar_ops();
bool avx2_supported();

// Runtime-selected backend. Stable for the lifetime of the process unless
// force_scalar() is called (tests, or DRECO_KERNELS=scalar in the environment).
const Ops& active();
void force_scalar(bool on);

}  // namespace dreco::kernels
