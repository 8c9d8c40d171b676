#include "dreco/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "dreco/errors.hpp"

namespace dreco {

void TrainConfig::validate() const {
    if (p_uncond < 0.0 || p_uncond > 1.0) {
        throw ConfigError("p_uncond must lie in [0, 1]");
    }
    if (batch_size < 1) {
        throw ConfigError("batch_size must be >= 1");
    }
    if (max_steps < 0 || eval_every < 0) {
        throw ConfigError("max_steps and eval_every must be >= 0");
    }
    if (schedule_steps < 1) {
        throw ConfigError("schedule T must be >= 1");
    }
    if (hidden < 1 || d_time < 2 || d_time % 2 != 0) {
        throw ConfigError("hidden must be >= 1 and d_time even and >= 2");
    }
    if (ks.empty()) {
        throw ConfigError("at least one evaluation K required");
    }
}

MaskResult mask_guidance(const Matrix& guidance, double p_uncond, RngState& rng) {
    if (p_uncond < 0.0 || p_uncond > 1.0) {
        throw ConfigError("mask_guidance: p_uncond must lie in [0, 1]");
    }
    MaskResult res;
    res.guidance = guidance;
    res.masked.assign(guidance.rows, 0);
    for (std::size_t r = 0; r < guidance.rows; ++r) {
        if (rng.next_unit() < p_uncond) {
            res.masked[r] = 1;
            std::fill_n(res.guidance.row(r), guidance.cols, 0.0);
        }
    }
    return res;
}

double train_step(DenoiserParams& params, AdamState& adam, const Matrix& batch_x0,
                  const TrainConfig& cfg, const NoiseSchedule& sched, RngState& rng) {
    const std::size_t batch = batch_x0.rows;
    std::vector<int> t_rows(batch);
    for (std::size_t r = 0; r < batch; ++r) {
        t_rows[r] = 1 + static_cast<int>(rng.next_unit() * sched.steps);
        t_rows[r] = std::min(t_rows[r], sched.steps);
    }
    Matrix eps = gaussian(rng, batch, batch_x0.cols);
    Matrix x_t = q_sample_per_row(batch_x0, t_rows, eps, sched);
    MaskResult masked = mask_guidance(batch_x0, cfg.p_uncond, rng);

    ForwardCache cache;
    Matrix eps_hat = denoiser_forward(params, x_t, masked.guidance, t_rows, &cache);
    LossResult loss = mse_loss(eps_hat, eps);
    if (!std::isfinite(loss.loss)) {
        throw NumericError("train_step produced non-finite loss at adam step " +
                           std::to_string(adam.step + 1));
    }
    DenoiserGrads grads = denoiser_backward(params, cache, loss.d_eps_hat);

    Matrix* param_list[] = {&params.w1, &params.b1, &params.w2, &params.b2};
    const Matrix* grad_list[] = {&grads.w1, &grads.b1, &grads.w2, &grads.b2};
    adam_step(param_list, grad_list, adam);
    return loss.loss;
}

Matrix sample_scores(const DenoiserParams& params, const DiffusionConfig& cfg,
                     const MultiHotMatrix& guidance, const std::vector<int>& users,
                     std::uint64_t seed, std::size_t chunk) {
    Matrix scores(users.size(), guidance.n_cols);
    const RngState base(seed);
    NoisePredictor predictor = [&params](const Matrix& x, const Matrix& g, int t) {
        return denoiser_forward(params, x, g, t);
    };
    for (std::size_t begin = 0; begin < users.size(); begin += chunk) {
        const std::size_t end = std::min(users.size(), begin + chunk);
        std::vector<int> batch_users(users.begin() + begin, users.begin() + end);
        Matrix g = guidance.dense_rows(batch_users);
        std::vector<std::uint64_t> keys(batch_users.size());
        for (std::size_t i = 0; i < batch_users.size(); ++i) {
            keys[i] = static_cast<std::uint64_t>(batch_users[i]);
        }
        Matrix x0 = sample(predictor, g, cfg, base, keys);
        for (std::size_t i = 0; i < batch_users.size(); ++i) {
            std::copy(x0.row(i), x0.row(i) + x0.cols, scores.row(begin + i));
        }
    }
    return scores;
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    nlohmann::json cfg_json;
    cfg_json["p_uncond"] = config.p_uncond;
    cfg_json["batch_size"] = config.batch_size;
    cfg_json["max_steps"] = config.max_steps;
    cfg_json["eval_every"] = config.eval_every;
    cfg_json["seed"] = config.seed;
    cfg_json["T"] = config.schedule_steps;
    cfg_json["beta_start"] = config.beta_start;
    cfg_json["beta_end"] = config.beta_end;
    cfg_json["lr"] = config.adam.lr;
    cfg_json["adam_beta1"] = config.adam.beta1;
    cfg_json["adam_beta2"] = config.adam.beta2;
    cfg_json["adam_eps"] = config.adam.eps;
    cfg_json["hidden"] = config.hidden;
    cfg_json["d_time"] = config.d_time;
    cfg_json["ks"] = config.ks;
    j["config"] = cfg_json;
    j["input_layout"] = "guidance|x|time";
    j["dataset_fingerprint"] = dataset_fingerprint;
    j["best_ndcg10"] = best_ndcg10;
    j["best_step"] = best_step;
    j["selection_on_test"] = selection_on_test;
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [step, v] : eval_history) {
        hist.push_back({{"step", step}, {"ndcg10", v}});
    }
    j["eval_history"] = hist;
    nlohmann::json ckpts = nlohmann::json::array();
    for (const auto& [step, v] : checkpoint_history) {
        ckpts.push_back({{"step", step}, {"ndcg10", v}});
    }
    j["checkpoint_history"] = ckpts;
    j["wall_clock_sec"] = wall_clock_sec;
    return j.dump(2) + "\n";
}

namespace {

double ndcg_at_10(const MetricsReport& report) {
    for (std::size_t ki = 0; ki < report.ks.size(); ++ki) {
        if (report.ks[ki] == 10) {
            return report.aggregate[ki].ndcg;
        }
    }
    throw std::logic_error("evaluation Ks must include 10 for model selection");
}

}  // namespace

FitResult fit(const InteractionSet& dataset, const TrainConfig& cfg, const std::string& out_dir,
              std::ostream* progress) {
    cfg.validate();
    const auto start_time = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out_dir);
    const std::string ckpt_path = (std::filesystem::path(out_dir) / "checkpoint.bin").string();
    const std::string manifest_path = (std::filesystem::path(out_dir) / "manifest.json").string();
    std::ofstream log(std::filesystem::path(out_dir) / "train_log.jsonl",
                      std::ios::binary | std::ios::trunc);

    const NoiseSchedule sched = linear_schedule(cfg.schedule_steps, cfg.beta_start, cfg.beta_end);
    const MultiHotMatrix train_mh = to_multihot(dataset, SplitTag::train);
    MultiHotMatrix selection_mh = to_multihot(dataset, SplitTag::valid);
    bool selection_on_test = false;
    if (std::all_of(selection_mh.row_items.begin(), selection_mh.row_items.end(),
                    [](const auto& r) { return r.empty(); })) {
        selection_mh = to_multihot(dataset, SplitTag::test);
        selection_on_test = true;
        if (progress != nullptr) {
            *progress << "note: no validation split; selecting the model on the test split\n";
        }
    }

    RngState rng(cfg.seed);
    DenoiserParams params = denoiser_init(rng, dataset.n_items, cfg.hidden, cfg.d_time);
    const Matrix* plist[] = {&params.w1, &params.b1, &params.w2, &params.b2};
    AdamState adam = AdamState::init_like(plist, cfg.adam);

    std::vector<int> eval_ks = cfg.ks;
    if (std::find(eval_ks.begin(), eval_ks.end(), 10) == eval_ks.end()) {
        eval_ks.push_back(10);  // selection metric
    }
    std::vector<int> all_users(dataset.n_users);
    std::iota(all_users.begin(), all_users.end(), 0);

    RunManifest manifest;
    manifest.config = cfg;
    manifest.dataset_fingerprint = fingerprint(dataset);
    manifest.selection_on_test = selection_on_test;

    FitResult result;
    double best = -1.0;

    auto evaluate = [&](int step) {
        DiffusionConfig dcfg;
        dcfg.schedule = sched;
        dcfg.guidance_weight = 0.0;  // validation never peeks through guidance mixing
        dcfg.start = SampleStart::noised_guidance;
        dcfg.start_step = sched.steps;
        Matrix scores = sample_scores(params, dcfg, train_mh, all_users, cfg.seed);
        const int k_max = *std::max_element(eval_ks.begin(), eval_ks.end());
        RankedList ranked = rank(scores, train_mh, k_max);
        MetricsReport report = metrics(ranked, selection_mh, eval_ks);
        const double score = ndcg_at_10(report);
        manifest.eval_history.emplace_back(step, score);
        if (log) {
            nlohmann::json rec;
            rec["kind"] = "eval";
            rec["step"] = step;
            rec["ndcg10"] = score;
            for (std::size_t ki = 0; ki < report.ks.size(); ++ki) {
                const std::string key = std::to_string(report.ks[ki]);
                rec["precision"][key] = report.aggregate[ki].precision;
                rec["recall"][key] = report.aggregate[ki].recall;
                rec["ndcg"][key] = report.aggregate[ki].ndcg;
                rec["mrr"][key] = report.aggregate[ki].mrr;
            }
            log << rec.dump() << '\n';
        }
        if (progress != nullptr) {
            *progress << "step " << step << " ndcg@10 " << score << '\n';
        }
        if (score > best) {
            best = score;
            manifest.best_ndcg10 = score;
            manifest.best_step = step;
            manifest.checkpoint_history.emplace_back(step, score);
            save_checkpoint(ckpt_path, params, sched.steps);
        }
    };

    evaluate(0);

    std::vector<int> order(dataset.n_users);
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = order.size();  // forces a shuffle on first use
    for (int step = 1; step <= cfg.max_steps; ++step) {
        std::vector<int> batch_users;
        batch_users.reserve(cfg.batch_size);
        for (int i = 0; i < cfg.batch_size && !order.empty(); ++i) {
            if (cursor == order.size()) {
                // Fisher-Yates reshuffle at each epoch boundary.
                for (std::size_t j = order.size(); j > 1; --j) {
                    const auto pick = static_cast<std::size_t>(rng.next_unit() * j);
                    std::swap(order[j - 1], order[std::min(pick, j - 1)]);
                }
                cursor = 0;
                if (i > 0) {
                    break;  // keep the last partial batch of the epoch
                }
            }
            batch_users.push_back(order[cursor++]);
        }
        Matrix batch_x0 = train_mh.dense_rows(batch_users);
        const double loss = train_step(params, adam, batch_x0, cfg, sched, rng);
        if (log) {
            log << "{\"kind\":\"step\",\"step\":" << step << ",\"loss\":" << loss << "}\n";
        }
        if ((cfg.eval_every > 0 && step % cfg.eval_every == 0) || step == cfg.max_steps) {
            evaluate(step);
        }
    }

    manifest.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    {
        std::ofstream mf(manifest_path, std::ios::binary | std::ios::trunc);
        mf << manifest.to_json();
    }

    Checkpoint ck = load_checkpoint(ckpt_path);
    result.best = std::move(ck.params);
    result.manifest = std::move(manifest);
    result.checkpoint_path = ckpt_path;
    return result;
}

}  // namespace dreco
