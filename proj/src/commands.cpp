#include "dreco/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dreco/errors.hpp"

namespace dreco {

namespace {

std::string format_weight(double w) {
    std::ostringstream os;
    os << w;
    return os.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw DataError("cannot write " + path);
    }
    os << contents;
}

// Sidecar manifest written by fit() next to the checkpoint.
nlohmann::json load_sidecar(const std::string& checkpoint_path) {
    const auto manifest_path = std::filesystem::path(checkpoint_path).parent_path() / "manifest.json";
    std::ifstream is(manifest_path);
    if (!is) {
        return nlohmann::json();
    }
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception&) {
        return nlohmann::json();
    }
    return j;
}

}  // namespace

PreprocessSummary cmd_preprocess(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    if (cfg.dataset_path.empty()) {
        throw ConfigError("preprocess: 'dataset' path is required");
    }
    IngestResult raw = ingest(cfg.dataset_path, cfg.csv_format(), cfg.delimiter);
    InteractionSet iset = preprocess(raw.reviews, cfg.filter_mode());
    const SplitSpec spec = SplitSpec::parse(cfg.ratios);
    const SplitReport split_report = split(iset, spec);

    std::vector<bool> in_history(iset.n_items, false);
    std::size_t items_only_in_test = 0;
    for (const Interaction& it : iset.interactions) {
        if (it.split != SplitTag::test) {
            in_history[static_cast<std::size_t>(it.item)] = true;
        }
    }
    for (bool b : in_history) {
        if (!b) ++items_only_in_test;
    }

    CacheMeta meta;
    meta.n_users = iset.n_users;
    meta.n_items = iset.n_items;
    meta.n_interactions = iset.interactions.size();
    meta.mode = cfg.mode;
    meta.ratios = spec.to_string();
    meta.source_checksum = fnv1a_file(cfg.dataset_path);
    meta.items_only_in_test = items_only_in_test;
    save_cache(cfg.cache_dir, iset, meta);

    out << "users " << meta.n_users << ", items " << meta.n_items << ", interactions "
        << meta.n_interactions << '\n';
    out << "malformed rows: " << raw.malformed_rows.size() << '\n';
    out << "users without a test segment: " << split_report.users_without_test << '\n';
    out << "items appearing only in test: " << items_only_in_test << '\n';
    out << "cache written to " << cfg.cache_dir << '\n';

    PreprocessSummary summary;
    summary.meta = meta;
    summary.split_report = split_report;
    summary.malformed_rows = raw.malformed_rows.size();
    return summary;
}

TrainOutcome cmd_train(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    InteractionSet dataset = load_cache(cfg.cache_dir);
    const std::uint64_t seed = cfg.resolve_seed();
    if (!cfg.seed.has_value()) {
        out << "seed (from entropy): " << seed << '\n';
    }
    TrainOutcome outcome;
    outcome.seed_used = seed;
    outcome.fit = fit(dataset, cfg.trainer_config(seed), cfg.out_dir, &out);
    out << "best checkpoint: " << outcome.fit.checkpoint_path << " (ndcg@10 "
        << outcome.fit.manifest.best_ndcg10 << " at step " << outcome.fit.manifest.best_step
        << ")\n";
    return outcome;
}

std::vector<std::string> cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                                      bool force, std::ostream& out) {
    cfg.validate();
    CacheMeta meta;
    InteractionSet dataset = load_cache(cfg.cache_dir, &meta);
    Checkpoint ck = load_checkpoint(checkpoint_path);
    if (ck.params.n_items != dataset.n_items) {
        throw DataError("checkpoint N=" + std::to_string(ck.params.n_items) +
                        " does not match cache N=" + std::to_string(dataset.n_items));
    }
    const nlohmann::json sidecar = load_sidecar(checkpoint_path);
    const std::uint64_t cache_fp = fingerprint(dataset);
    if (!force) {
        if (!sidecar.contains("dataset_fingerprint")) {
            throw DataError("checkpoint has no sidecar manifest to verify the dataset against "
                            "(use --force to skip)");
        }
        const auto ckpt_fp = sidecar["dataset_fingerprint"].get<std::uint64_t>();
        if (ckpt_fp != cache_fp) {
            throw DataError("dataset fingerprint mismatch: checkpoint " + std::to_string(ckpt_fp) +
                            " vs cache " + std::to_string(cache_fp) + " (use --force to skip)");
        }
    }

    // Test-time guidance and ranking mask are the user's full known history:
    // train plus valid.
    const MultiHotMatrix history = to_multihot_union(dataset, SplitTag::train, SplitTag::valid);
    const MultiHotMatrix truth = to_multihot(dataset, SplitTag::test);
    std::vector<int> users(dataset.n_users);
    std::iota(users.begin(), users.end(), 0);

    const std::uint64_t seed = cfg.resolve_seed();
    const NoiseSchedule sched = linear_schedule(ck.schedule_steps, cfg.beta_start, cfg.beta_end);
    const int k_max = *std::max_element(cfg.ks.begin(), cfg.ks.end());

    std::filesystem::create_directories(cfg.out_dir);
    std::vector<std::string> written;
    for (double w : cfg.guidance_weights) {
        DiffusionConfig dcfg;
        dcfg.schedule = sched;
        dcfg.guidance_weight = w;
        dcfg.start = cfg.parsed_sample_start();
        dcfg.start_step = cfg.start_step > 0 ? cfg.start_step : sched.steps;
        Matrix scores = sample_scores(ck.params, dcfg, history, users, seed);
        RankedList ranked = rank(scores, history, k_max);
        MetricsReport report = metrics(ranked, truth, cfg.ks);

        const std::string tag = "metrics_w" + format_weight(w);
        const std::string json_path = (std::filesystem::path(cfg.out_dir) / (tag + ".json")).string();
        write_text_file(json_path, report.to_json());
        write_text_file((std::filesystem::path(cfg.out_dir) / (tag + ".txt")).string(),
                        report.to_table());
        out << "guidance weight " << w << ":\n" << report.to_table() << '\n';
        written.push_back(json_path);
    }
    return written;
}

std::vector<Recommendation> cmd_recommend(const RunConfig& cfg, const std::string& checkpoint_path,
                                          const std::vector<int>& history, int k,
                                          std::ostream& out) {
    cfg.validate();
    if (k < 1) {
        throw ConfigError("recommend: k must be >= 1");
    }
    Checkpoint ck = load_checkpoint(checkpoint_path);
    const int n = ck.params.n_items;
    std::set<int> unique_items;
    for (int item : history) {
        if (item < 0 || item >= n) {
            throw ConfigError("recommend: unknown item id " + std::to_string(item) +
                              " (item universe is [0, " + std::to_string(n) + "))");
        }
        unique_items.insert(item);
    }
    if (static_cast<int>(unique_items.size()) >= n) {
        throw ConfigError("recommend: history covers every item; nothing left to recommend");
    }

    MultiHotMatrix guidance;
    guidance.n_rows = 1;
    guidance.n_cols = static_cast<std::size_t>(n);
    guidance.row_items.push_back({unique_items.begin(), unique_items.end()});

    const NoiseSchedule sched = linear_schedule(ck.schedule_steps, cfg.beta_start, cfg.beta_end);
    DiffusionConfig dcfg;
    dcfg.schedule = sched;
    dcfg.guidance_weight = cfg.guidance_weights.front();
    dcfg.start = cfg.parsed_sample_start();
    dcfg.start_step = cfg.start_step > 0 ? cfg.start_step : sched.steps;

    Matrix scores = sample_scores(ck.params, dcfg, guidance, {0}, cfg.resolve_seed());
    RankedList ranked = rank(scores, guidance, k);

    std::vector<Recommendation> recs;
    for (int item : ranked.items[0]) {
        recs.push_back({item, scores.at(0, static_cast<std::size_t>(item))});
    }
    for (const Recommendation& r : recs) {
        out << r.item << '\t' << r.score << '\n';
    }
    return recs;
}

}  // namespace dreco
