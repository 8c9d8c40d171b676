#include "dreco/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dreco {

RankedList rank(const Matrix& scores, const MultiHotMatrix& mask, int k_max) {
    if (scores.rows != mask.n_rows || scores.cols != mask.n_cols) {
        throw std::invalid_argument("rank: scores and mask shapes disagree");
    }
    if (k_max < 1) {
        throw std::invalid_argument("rank: k_max must be >= 1");
    }
    RankedList out;
    out.items.resize(scores.rows);
    std::vector<double> row(scores.cols);
    std::vector<int> order(scores.cols);
    for (std::size_t r = 0; r < scores.rows; ++r) {
        const double* src = scores.row(r);
        std::copy(src, src + scores.cols, row.begin());
        for (int item : mask.row_items[r]) {
            row[static_cast<std::size_t>(item)] = -std::numeric_limits<double>::infinity();
        }
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&row](int a, int b) {
            if (row[a] != row[b]) return row[a] > row[b];
            return a < b;
        });
        const std::size_t candidates = scores.cols - mask.row_items[r].size();
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k_max), candidates);
        if (take < static_cast<std::size_t>(k_max)) {
            ++out.truncated_users;
        }
        out.items[r].assign(order.begin(), order.begin() + take);
    }
    return out;
}

MetricsReport metrics(const RankedList& ranked, const MultiHotMatrix& ground_truth,
                      std::span<const int> ks) {
    if (ks.empty()) {
        throw std::invalid_argument("metrics: at least one K required");
    }
    if (ranked.items.size() != ground_truth.n_rows) {
        throw std::invalid_argument("metrics: ranked list and ground truth row counts disagree");
    }
    MetricsReport report;
    report.ks.assign(ks.begin(), ks.end());
    report.aggregate.assign(ks.size(), KMetrics{});

    for (std::size_t u = 0; u < ranked.items.size(); ++u) {
        const auto& truth = ground_truth.row_items[u];
        if (truth.empty()) {
            ++report.skipped_users;
            continue;
        }
        const auto& list = ranked.items[u];
        std::vector<KMetrics> user_metrics(ks.size());
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            const int k = ks[ki];
            const std::size_t depth = std::min<std::size_t>(static_cast<std::size_t>(k), list.size());
            std::size_t hits = 0;
            double dcg = 0.0;
            double mrr = 0.0;
            for (std::size_t i = 0; i < depth; ++i) {
                if (std::binary_search(truth.begin(), truth.end(), list[i])) {
                    ++hits;
                    dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
                    if (mrr == 0.0) {
                        mrr = 1.0 / static_cast<double>(i + 1);
                    }
                }
            }
            double idcg = 0.0;
            const std::size_t ideal = std::min<std::size_t>(truth.size(), static_cast<std::size_t>(k));
            for (std::size_t i = 0; i < ideal; ++i) {
                idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
            }
            KMetrics& m = user_metrics[ki];
            m.precision = static_cast<double>(hits) / static_cast<double>(k);
            m.recall = static_cast<double>(hits) / static_cast<double>(truth.size());
            m.ndcg = idcg > 0.0 ? dcg / idcg : 0.0;
            m.mrr = mrr;
        }
        report.evaluated_rows.push_back(static_cast<int>(u));
        report.per_user.push_back(std::move(user_metrics));
        ++report.evaluated_users;
    }

    if (report.evaluated_users > 0) {
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            KMetrics sum;
            for (const auto& user_metrics : report.per_user) {
                sum.precision += user_metrics[ki].precision;
                sum.recall += user_metrics[ki].recall;
                sum.ndcg += user_metrics[ki].ndcg;
                sum.mrr += user_metrics[ki].mrr;
            }
            const double n = static_cast<double>(report.evaluated_users);
            report.aggregate[ki] = {sum.precision / n, sum.recall / n, sum.ndcg / n, sum.mrr / n};
        }
    }
    return report;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    j["ks"] = ks;
    j["evaluated_users"] = evaluated_users;
    j["skipped_users"] = skipped_users;
    nlohmann::json agg = nlohmann::json::object();
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const std::string key = std::to_string(ks[ki]);
        agg["precision"][key] = aggregate[ki].precision;
        agg["recall"][key] = aggregate[ki].recall;
        agg["ndcg"][key] = aggregate[ki].ndcg;
        agg["mrr"][key] = aggregate[ki].mrr;
    }
    j["aggregate"] = agg;
    return j.dump(2) + "\n";
}

std::string MetricsReport::to_table() const {
    std::ostringstream os;
    os << std::left << std::setw(12) << "Metric";
    for (int k : ks) {
        os << std::right << std::setw(9) << ("@" + std::to_string(k));
    }
    os << '\n';
    auto row = [&](const char* name, auto getter) {
        os << std::left << std::setw(12) << name;
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            os << std::right << std::setw(9) << std::fixed << std::setprecision(2)
               << getter(aggregate[ki]) * 100.0;
        }
        os << '\n';
    };
    row("Precision", [](const KMetrics& m) { return m.precision; });
    row("Recall", [](const KMetrics& m) { return m.recall; });
    row("nDCG", [](const KMetrics& m) { return m.ndcg; });
    row("MRR", [](const KMetrics& m) { return m.mrr; });
    os << "users evaluated: " << evaluated_users << ", skipped (no ground truth): " << skipped_users
       << '\n';
    return os.str();
}

Matrix popularity_scores(const MultiHotMatrix& history, std::size_t n_rows) {
    std::vector<double> counts(history.n_cols, 0.0);
    for (const auto& row : history.row_items) {
        for (int item : row) {
            counts[static_cast<std::size_t>(item)] += 1.0;
        }
    }
    Matrix scores(n_rows, history.n_cols);
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::copy(counts.begin(), counts.end(), scores.row(r));
    }
    return scores;
}

}  // namespace dreco
