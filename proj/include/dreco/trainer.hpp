#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dreco/adam.hpp"
#include "dreco/data.hpp"
#include "dreco/denoiser.hpp"
#include "dreco/diffusion.hpp"
#include "dreco/eval.hpp"
#include "dreco/rng.hpp"

namespace dreco {

struct TrainConfig {
    double p_uncond = 0.2;
    int batch_size = 64;
    int max_steps = 1000;
    int eval_every = 200;
    std::uint64_t seed = 0;
    int schedule_steps = 100;  // T
    double beta_start = 1e-4;
    double beta_end = 0.02;
    AdamConfig adam;
    int hidden = 1000;
    int d_time = 16;
    std::vector<int> ks = {1, 5, 10, 20};

    void validate() const;  // throws ConfigError
};

struct MaskResult {
    Matrix guidance;
    std::vector<std::uint8_t> masked;  // 1 where the row became the null token
};

// Each row is independently replaced by the all-zeros null token with
// probability p_uncond. One uniform draw per row, in row order.
MaskResult mask_guidance(const Matrix& guidance, double p_uncond, RngState& rng);

// One optimization step: per-row t ~ U[1, T], eps ~ N(0, I), noise the batch,
// mask the guidance, regress predicted noise against eps, Adam-update.
// Draw order from rng is fixed: timesteps, then eps, then mask decisions.
// Returns the step's loss; throws NumericError if it is not finite.
double train_step(DenoiserParams& params, AdamState& adam, const Matrix& batch_x0,
                  const TrainConfig& cfg, const NoiseSchedule& sched, RngState& rng);

struct RunManifest {
    TrainConfig config;
    std::uint64_t dataset_fingerprint = 0;
    double best_ndcg10 = 0.0;
    int best_step = -1;
    bool selection_on_test = false;  // 80:20 runs select on the test split
    std::vector<std::pair<int, double>> eval_history;        // (step, ndcg@10)
    std::vector<std::pair<int, double>> checkpoint_history;  // persisted improvements
    double wall_clock_sec = 0.0;

    std::string to_json() const;
};

struct FitResult {
    DenoiserParams best;
    RunManifest manifest;
    std::string checkpoint_path;
};

// Full training run. Evaluates the sampling pipeline on the selection split
// (valid when present, otherwise test) at step 0, every eval_every steps, and
// at the end; persists out_dir/checkpoint.bin whenever nDCG@10 improves.
// Writes out_dir/manifest.json and a line-delimited out_dir/train_log.jsonl.
// The returned parameters are the best checkpoint as loaded back from disk.
FitResult fit(const InteractionSet& dataset, const TrainConfig& cfg, const std::string& out_dir,
              std::ostream* progress = nullptr);

// Samples per-item heatmaps for the given users in fixed-size chunks.
// Row keys are the user ids, so scores do not depend on the chunking.
Matrix sample_scores(const DenoiserParams& params, const DiffusionConfig& cfg,
                     const MultiHotMatrix& guidance, const std::vector<int>& users,
                     std::uint64_t seed, std::size_t chunk = 1024);

}  // namespace dreco
