#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "dreco/matrix.hpp"
#include "dreco/rng.hpp"
#include "dreco/schedule.hpp"

namespace dreco {

enum class SampleStart {
    pure_noise,        // x_T ~ N(0, I)
    noised_guidance,   // x at start_step = forward-noised user history
};

struct DiffusionConfig {
    NoiseSchedule schedule;
    double guidance_weight = 0.0;                        // w
    SampleStart start = SampleStart::noised_guidance;
    int start_step = 0;                                  // defaults to schedule.steps when 0
};

// Closed-form jump to step t: sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps.
Matrix q_sample(const Matrix& x0, int t, const Matrix& eps, const NoiseSchedule& sched);

// Same, with an independent timestep per row (training batches).
Matrix q_sample_per_row(const Matrix& x0, std::span<const int> t_rows, const Matrix& eps,
                        const NoiseSchedule& sched);

// One reverse transition:
//   (1/sqrt(alpha_t)) * (x_t - beta_t/sqrt(1-abar_t) * eps_hat) + sqrt(beta_t) * z
// z must be all-zero at t = 1 (contract violation otherwise).
Matrix p_step(const Matrix& x_t, int t, const Matrix& eps_hat, const Matrix& z,
              const NoiseSchedule& sched);

// Classifier-free mixing: (1 + w) * eps_cond - w * eps_uncond.
Matrix guided_eps(const Matrix& eps_cond, const Matrix& eps_uncond, double w);

// Noise predictor: (x_t, guidance, t) -> eps_hat. Guidance rows are raw
// multi-hot histories; normalization is the predictor's concern.
using NoisePredictor = std::function<Matrix(const Matrix& x_t, const Matrix& guidance, int t)>;

// Full reverse chain. Each row draws its noise from rng.substream(row_keys[r]),
// so results do not depend on how users are batched. With w = 0 the predictor
// is invoked exactly once per step; with w > 0 a second, null-guidance pass is
// mixed in via guided_eps. Returns the final x0 estimate (per-item heatmap).
Matrix sample(const NoisePredictor& predictor, const Matrix& guidance, const DiffusionConfig& cfg,
              const RngState& rng, std::span<const std::uint64_t> row_keys);

}  // namespace dreco
