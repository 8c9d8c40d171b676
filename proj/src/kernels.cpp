#include "dreco/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace dreco::kernels {

#if defined(DRECO_BUILD_AVX2)
const Ops& avx2_ops();
#endif

bool avx2_supported() {
#if defined(DRECO_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

std::atomic<bool> g_force_scalar{false};

bool env_forces_scalar() {
    const char* v = std::getenv("DRECO_KERNELS");
    return v != nullptr && std::strcmp(v, "scalar") == 0;
}

}  // namespace

void force_scalar(bool on) {
    g_force_scalar.store(on, std::memory_order_relaxed);
}

const Ops& active() {
    static const bool env_scalar = env_forces_scalar();
    if (env_scalar || g_force_scalar.load(std::memory_order_relaxed)) {
        return scalar_ops();
    }
#if defined(DRECO_BUILD_AVX2)
    static const bool have_avx2 = avx2_supported();
    if (have_avx2) {
        return avx2_ops();
    }
#endif
    return scalar_ops();
}

}  // namespace dreco::kernels
