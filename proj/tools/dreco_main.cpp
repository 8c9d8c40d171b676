#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dreco/commands.hpp"
#include "dreco/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value, applied after the file
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "run config file (key = value lines)");
    cmd->add_option("-s,--set", args.overrides, "override a config key, e.g. --set seed=7")
        ->take_all();
}

dreco::RunConfig build_config(const CommonArgs& args) {
    dreco::RunConfig cfg;
    if (!args.config_path.empty()) {
        cfg = dreco::RunConfig::from_file(args.config_path);
    }
    for (const std::string& kv : args.overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw dreco::ConfigError("--set expects key=value, got '" + kv + "'");
        }
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

std::vector<int> parse_id_list(const std::string& text) {
    std::vector<int> ids;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string token = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                              : comma - pos);
        if (!token.empty()) {
            try {
                ids.push_back(std::stoi(token));
            } catch (const std::exception&) {
                throw dreco::ConfigError("bad item id: '" + token + "'");
            }
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return ids;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dreco: diffusion recommender with classifier-free guidance"};
    app.require_subcommand(1);

    CommonArgs pre_args;
    CLI::App* pre = app.add_subcommand("preprocess", "ingest a raw review file into a split cache");
    add_common(pre, pre_args);

    CommonArgs train_args;
    CLI::App* train = app.add_subcommand("train", "train a denoiser on a preprocessed cache");
    add_common(train, train_args);

    CommonArgs eval_args;
    std::string eval_ckpt;
    bool eval_force = false;
    CLI::App* evaluate = app.add_subcommand("evaluate", "sample and score a checkpoint on the test split");
    add_common(evaluate, eval_args);
    evaluate->add_option("checkpoint", eval_ckpt, "checkpoint file")->required();
    evaluate->add_flag("--force", eval_force, "skip the dataset fingerprint check");

    CommonArgs sweep_args;
    std::string sweep_ckpt;
    bool sweep_force = false;
    std::string sweep_weights;
    CLI::App* sweep = app.add_subcommand("sweep", "evaluate a checkpoint across guidance weights");
    add_common(sweep, sweep_args);
    sweep->add_option("checkpoint", sweep_ckpt, "checkpoint file")->required();
    sweep->add_option("-w,--weights", sweep_weights, "comma list of guidance weights, e.g. 0,1,2")
        ->required();
    sweep->add_flag("--force", sweep_force, "skip the dataset fingerprint check");

    CommonArgs rec_args;
    std::string rec_ckpt;
    std::string rec_items;
    int rec_k = 10;
    CLI::App* recommend = app.add_subcommand("recommend", "top-k items for an ad-hoc user history");
    add_common(recommend, rec_args);
    recommend->add_option("checkpoint", rec_ckpt, "checkpoint file")->required();
    recommend->add_option("--items", rec_items, "comma list of item ids already interacted with");
    recommend->add_option("-k", rec_k, "number of recommendations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (pre->parsed()) {
            dreco::cmd_preprocess(build_config(pre_args), std::cout);
        } else if (train->parsed()) {
            dreco::cmd_train(build_config(train_args), std::cout);
        } else if (evaluate->parsed()) {
            dreco::cmd_evaluate(build_config(eval_args), eval_ckpt, eval_force, std::cout);
        } else if (sweep->parsed()) {
            dreco::RunConfig cfg = build_config(sweep_args);
            cfg.set("guidance_weight", sweep_weights);
            dreco::cmd_evaluate(cfg, sweep_ckpt, sweep_force, std::cout);
        } else if (recommend->parsed()) {
            dreco::cmd_recommend(build_config(rec_args), rec_ckpt, parse_id_list(rec_items), rec_k,
                                 std::cout);
        }
    } catch (const dreco::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const dreco::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const dreco::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
