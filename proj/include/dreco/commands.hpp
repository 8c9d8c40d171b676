#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dreco/config.hpp"
#include "dreco/data.hpp"
#include "dreco/trainer.hpp"

namespace dreco {

// Command bodies behind the CLI, callable directly from tests. All throw the
// typed errors from errors.hpp; the CLI maps them to exit codes.

struct PreprocessSummary {
    CacheMeta meta;
    SplitReport split_report;
    std::size_t malformed_rows = 0;
};

PreprocessSummary cmd_preprocess(const RunConfig& cfg, std::ostream& out);

struct TrainOutcome {
    FitResult fit;
    std::uint64_t seed_used = 0;
};

TrainOutcome cmd_train(const RunConfig& cfg, std::ostream& out);

// One metrics report (JSON + text table) per guidance weight in the config.
// Returns the written JSON paths.
std::vector<std::string> cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                                      bool force, std::ostream& out);

struct Recommendation {
    int item = 0;
    double score = 0.0;
};

std::vector<Recommendation> cmd_recommend(const RunConfig& cfg, const std::string& checkpoint_path,
                                          const std::vector<int>& history, int k,
                                          std::ostream& out);

}  // namespace dreco
