#pragma once

#include <span>
#include <string>
#include <vector>

#include "dreco/data.hpp"
#include "dreco/matrix.hpp"

namespace dreco {

// Per-user ranked item lists with masked history excluded.
struct RankedList {
    std::vector<std::vector<int>> items;
    std::size_t truncated_users = 0;  // fewer than k_max candidates remained
};

// Per user: masked items score -inf, the rest sorted by descending score with
// ties broken by ascending item id. Deterministic for equal inputs.
RankedList rank(const Matrix& scores, const MultiHotMatrix& mask, int k_max);

struct KMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double ndcg = 0.0;
    double mrr = 0.0;
};

struct MetricsReport {
    std::vector<int> ks;
    std::vector<KMetrics> aggregate;                // one entry per K
    std::vector<int> evaluated_rows;                // rows that had test items
    std::vector<std::vector<KMetrics>> per_user;    // [evaluated user][k index]
    std::size_t evaluated_users = 0;
    std::size_t skipped_users = 0;                  // empty ground truth

    std::string to_json() const;
    // Aligned table, percentages with 2 decimals.
    std::string to_table() const;
};

// Binary-relevance precision/recall/nDCG/MRR at each K, unweighted mean over
// users with at least one ground-truth item; users without any are skipped
// and counted.
MetricsReport metrics(const RankedList& ranked, const MultiHotMatrix& ground_truth,
                      std::span<const int> ks);

// Baseline scores: every row ranks items by global interaction count in
// `history`. Ties resolve by item id through rank().
Matrix popularity_scores(const MultiHotMatrix& history, std::size_t n_rows);

}  // namespace dreco
