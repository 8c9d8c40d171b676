#pragma once

#include <span>
#include <string>
#include <vector>

#include "dreco/matrix.hpp"
#include "dreco/rng.hpp"

namespace dreco {

// Conditional noise predictor: L2-normalize the guidance row, concatenate
// [guidance | x_t | time embedding], one tanh hidden layer, linear projection
// back to N item scores. Deliberately no extra layers: capacity is enforced
// by test (param count must stay at (2N+dt)*H + H + H*N + N).
struct DenoiserParams {
    int n_items = 0;   // N
    int hidden = 0;    // H
    int d_time = 0;    // time embedding width, even, >= 2
    Matrix w1;         // (2N + d_time) x H
    Matrix b1;         // 1 x H
    Matrix w2;         // H x N
    Matrix b2;         // 1 x N

    std::size_t input_width() const { return 2 * static_cast<std::size_t>(n_items) + d_time; }
    std::size_t param_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
};

// Sinusoidal features of the scalar step: pairs sin(t/rho^(2i/d)), cos(...)
// for i < d/2, rho = 10000. Every feature lies in [-1, 1].
std::vector<double> time_embedding(int t, int d_time);

struct ForwardCache {
    Matrix input;    // B x (2N + d_time), post-normalization concatenation
    Matrix hidden;   // B x H, post-tanh
    bool valid = false;
};

// eps_hat = tanh([g_norm | x_t | emb(t)] W1 + b1) W2 + b2, one t per row.
// Throws on shape mismatch or NaN in inputs. Fills *cache when given.
Matrix denoiser_forward(const DenoiserParams& params, const Matrix& x_t, const Matrix& guidance,
                        std::span<const int> t_rows, ForwardCache* cache = nullptr);
// Whole batch at a single timestep (sampling path).
Matrix denoiser_forward(const DenoiserParams& params, const Matrix& x_t, const Matrix& guidance,
                        int t, ForwardCache* cache = nullptr);

struct DenoiserGrads {
    Matrix w1, b1, w2, b2;
};

// Exact analytic gradients of the forward map composed with d_eps_hat.
// No gradient flows into x_t or guidance. Throws on a stale/mismatched cache.
DenoiserGrads denoiser_backward(const DenoiserParams& params, const ForwardCache& cache,
                                const Matrix& d_eps_hat);

// Glorot-uniform weights, zero biases. Values are rounded through f32 so a
// fresh parameter set round-trips bitwise through the f32 checkpoint format.
DenoiserParams denoiser_init(RngState& rng, int n_items, int hidden, int d_time);

struct LossResult {
    double loss = 0.0;
    Matrix d_eps_hat;
};

// Mean squared error over all B*N elements, with its gradient.
LossResult mse_loss(const Matrix& eps_hat, const Matrix& eps_true);

// Checkpoint binary format: magic "DRCFG1\0", little-endian u32 {N, H, d_time, T},
// then f32 arrays w1, b1, w2, b2 in declaration order, row-major.
void save_checkpoint(const std::string& path, const DenoiserParams& params, int schedule_steps);

struct Checkpoint {
    DenoiserParams params;
    int schedule_steps = 0;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace dreco
