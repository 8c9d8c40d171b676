#include "dreco/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dreco/kernels.hpp"

namespace dreco {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string("shape mismatch in ") + what);
    }
}

}  // namespace

Matrix q_sample(const Matrix& x0, int t, const Matrix& eps, const NoiseSchedule& sched) {
    require_same_shape(x0, eps, "q_sample");
    const double abar = sched.alpha_bar_at(t);
    return axpby(std::sqrt(abar), x0, std::sqrt(1.0 - abar), eps);
}

Matrix q_sample_per_row(const Matrix& x0, std::span<const int> t_rows, const Matrix& eps,
                        const NoiseSchedule& sched) {
    require_same_shape(x0, eps, "q_sample_per_row");
    if (t_rows.size() != x0.rows) {
        throw std::invalid_argument("q_sample_per_row: one timestep per row required");
    }
    Matrix out(x0.rows, x0.cols);
    for (std::size_t r = 0; r < x0.rows; ++r) {
        const double abar = sched.alpha_bar_at(t_rows[r]);
        kernels::active().axpby(std::sqrt(abar), x0.row(r), std::sqrt(1.0 - abar), eps.row(r),
                                out.row(r), x0.cols);
    }
    return out;
}

Matrix p_step(const Matrix& x_t, int t, const Matrix& eps_hat, const Matrix& z,
              const NoiseSchedule& sched) {
    require_same_shape(x_t, eps_hat, "p_step");
    require_same_shape(x_t, z, "p_step");
    const double beta = sched.beta_at(t);
    const double alpha = sched.alpha_at(t);
    const double abar = sched.alpha_bar_at(t);
    if (t == 1) {
        for (double v : z.data) {
            if (v != 0.0) {
                throw std::invalid_argument("p_step: z must be all-zero at t = 1");
            }
        }
    }
    const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    const double eps_coeff = -inv_sqrt_alpha * beta / std::sqrt(1.0 - abar);
    Matrix out(x_t.rows, x_t.cols);
    kernels::active().axpbypcz(inv_sqrt_alpha, x_t.data.data(), eps_coeff, eps_hat.data.data(),
                               std::sqrt(beta), z.data.data(), out.data.data(), out.size());
    return out;
}

Matrix guided_eps(const Matrix& eps_cond, const Matrix& eps_uncond, double w) {
    require_same_shape(eps_cond, eps_uncond, "guided_eps");
    return axpby(1.0 + w, eps_cond, -w, eps_uncond);
}

Matrix sample(const NoisePredictor& predictor, const Matrix& guidance, const DiffusionConfig& cfg,
              const RngState& rng, std::span<const std::uint64_t> row_keys) {
    const NoiseSchedule& sched = cfg.schedule;
    const int start_step = cfg.start_step > 0 ? cfg.start_step : sched.steps;
    if (start_step < 1 || start_step > sched.steps) {
        throw std::invalid_argument("sample: start_step outside [1, T]");
    }
    if (row_keys.size() != guidance.rows) {
        throw std::invalid_argument("sample: one row key per guidance row required");
    }

    const std::size_t batch = guidance.rows;
    const std::size_t width = guidance.cols;

    // Row streams are consumed in a fixed order: the start noise first, then
    // one z per reverse step from start_step down to 2.
    std::vector<RngState> streams;
    streams.reserve(batch);
    for (std::size_t r = 0; r < batch; ++r) {
        streams.push_back(rng.substream(row_keys[r]));
    }
    auto draw_rows = [&](Matrix& dst) {
        for (std::size_t r = 0; r < batch; ++r) {
            double* row = dst.row(r);
            for (std::size_t c = 0; c < width; ++c) {
                row[c] = streams[r].next_gaussian();
            }
        }
    };

    Matrix x(batch, width);
    {
        Matrix eps0(batch, width);
        draw_rows(eps0);
        if (cfg.start == SampleStart::noised_guidance) {
            x = q_sample(guidance, start_step, eps0, sched);
        } else {
            x = std::move(eps0);
        }
    }

    const bool guided = cfg.guidance_weight > 0.0;
    const Matrix null_guidance(batch, width);
    for (int t = start_step; t >= 1; --t) {
        Matrix eps_hat = predictor(x, guidance, t);
        require_same_shape(eps_hat, x, "sample: predictor output");
        if (guided) {
            Matrix eps_uncond = predictor(x, null_guidance, t);
            eps_hat = guided_eps(eps_hat, eps_uncond, cfg.guidance_weight);
        }
        Matrix z(batch, width);
        if (t > 1) {
            draw_rows(z);
        }
        x = p_step(x, t, eps_hat, z, sched);
    }
    return x;
}

}  // namespace dreco
