#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dreco/matrix.hpp"

namespace dreco {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Moment accumulators shaped like the parameter set they update.
struct AdamState {
    AdamConfig cfg;
    std::uint64_t step = 0;
    std::vector<Matrix> mom1;
    std::vector<Matrix> mom2;

    static AdamState init_like(std::span<const Matrix* const> params, AdamConfig cfg);
};

// One bias-corrected Adam update across the whole parameter set.
// Throws std::invalid_argument if any shape disagrees with the state.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state);

}  // namespace dreco
