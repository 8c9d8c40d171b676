#pragma once

#include <vector>

namespace dreco {

// Noise schedule tables. Timesteps are 1-based everywhere in the public API:
// t in [1, T], t=0 means clean data and is never a valid index here.
struct NoiseSchedule {
    int steps = 0;                  // T
    std::vector<double> beta;       // beta[t-1] = beta_t
    std::vector<double> alpha;      // alpha_t = 1 - beta_t
    std::vector<double> alpha_bar;  // cumulative product of alpha_1..alpha_t

    double beta_at(int t) const;
    double alpha_at(int t) const;
    double alpha_bar_at(int t) const;
};

// beta_t linearly interpolated from beta_start to beta_end across T steps.
// Throws ConfigError unless T >= 1 and 0 < beta_start <= beta_end < 1.
NoiseSchedule linear_schedule(int steps, double beta_start, double beta_end);

}  // namespace dreco
