#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dreco/trainer.hpp"

namespace dreco {

// One flat run configuration driving every command. Loaded from a key=value
// text file ('#' starts a comment); CLI flags override file values.
struct RunConfig {
    // data
    std::string dataset_path;
    std::string format = "rated";  // rated | unrated
    std::string delimiter = ",";
    std::string mode = "clean";  // clean | noisy
    std::string ratios = "80:20";
    std::string cache_dir = "cache";
    // schedule
    int schedule_steps = 100;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    // model
    int hidden = 1000;
    int d_time = 16;
    // training
    double p_uncond = 0.2;
    double lr = 1e-3;
    int batch_size = 64;
    int max_steps = 1000;
    int eval_every = 200;
    std::optional<std::uint64_t> seed;  // absent -> seeded from entropy, echoed in the manifest
    // sampling
    std::vector<double> guidance_weights = {0.0};
    std::string sample_start = "noised_guidance";  // noised_guidance | pure_noise
    int start_step = 0;                            // 0 -> T
    // eval
    std::vector<int> ks = {1, 5, 10, 20};
    // output
    std::string out_dir = "out";

    static RunConfig from_file(const std::string& path);
    // Throws ConfigError on unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    void validate() const;

    std::uint64_t resolve_seed() const;  // config seed, or fresh entropy
    TrainConfig trainer_config(std::uint64_t resolved_seed) const;
    CsvFormat csv_format() const;
    FilterMode filter_mode() const;
    SampleStart parsed_sample_start() const;
};

}  // namespace dreco
