#include "dreco/schedule.hpp"

#include <stdexcept>
#include <string>

#include "dreco/errors.hpp"

namespace dreco {

namespace {

void check_step(const NoiseSchedule& s, int t) {
    if (t < 1 || t > s.steps) {
        throw std::invalid_argument("timestep " + std::to_string(t) + " outside [1, " +
                                    std::to_string(s.steps) + "]");
    }
}

}  // namespace

double NoiseSchedule::beta_at(int t) const {
    check_step(*this, t);
    return beta[t - 1];
}

double NoiseSchedule::alpha_at(int t) const {
    check_step(*this, t);
    return alpha[t - 1];
}

double NoiseSchedule::alpha_bar_at(int t) const {
    check_step(*this, t);
    return alpha_bar[t - 1];
}

NoiseSchedule linear_schedule(int steps, double beta_start, double beta_end) {
    if (steps < 1) {
        throw ConfigError("schedule: T must be >= 1");
    }
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
        throw ConfigError("schedule: endpoints must satisfy 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.steps = steps;
    s.beta.resize(steps);
    s.alpha.resize(steps);
    s.alpha_bar.resize(steps);
    double running = 1.0;
    for (int t = 1; t <= steps; ++t) {
        const double frac = steps > 1 ? static_cast<double>(t - 1) / static_cast<double>(steps - 1) : 0.0;
        const double b = beta_start + frac * (beta_end - beta_start);
        s.beta[t - 1] = b;
        s.alpha[t - 1] = 1.0 - b;
        running *= s.alpha[t - 1];
        s.alpha_bar[t - 1] = running;
    }
    return s;
}

}  // namespace dreco
