#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dreco/matrix.hpp"

namespace dreco {

struct RawReview {
    std::string user;
    std::string item;
    std::optional<int> rating;  // absent for unrated (Amazon-style) files
    std::int64_t timestamp = 0;
};

enum class CsvFormat { csv_rated, csv_unrated };
enum class FilterMode { clean, noisy };
enum class SplitTag : std::uint8_t { train = 0, valid = 1, test = 2 };

struct IngestResult {
    std::vector<RawReview> reviews;
    std::size_t total_rows = 0;
    std::vector<std::size_t> malformed_rows;  // 1-based line numbers
};

// Reads (user, item[, rating], timestamp) rows. The delimiter may be any
// non-empty string ("," default, "::" for MovieLens dumps). A leading header
// row is tolerated. Malformed rows are counted, not silently dropped; more
// than 1% malformed is a hard DataError naming the offending lines.
IngestResult ingest(const std::string& path, CsvFormat format, const std::string& delimiter = ",");

struct Interaction {
    int user = 0;
    int item = 0;
    std::int64_t time = 0;
    SplitTag split = SplitTag::train;
};

struct InteractionSet {
    int n_users = 0;
    int n_items = 0;
    // Sorted by (user, time); each user's interactions are contiguous.
    std::vector<Interaction> interactions;
    std::vector<std::string> user_names;  // dense id -> original id
    std::vector<std::string> item_names;
};

// clean keeps ratings 4-5 plus unrated reviews; noisy keeps everything.
// Duplicate (user, item) pairs keep the earliest occurrence. Surviving IDs
// are renumbered densely from zero in first-appearance order.
InteractionSet preprocess(const std::vector<RawReview>& reviews, FilterMode mode);

struct SplitSpec {
    double train = 0.8;
    double valid = 0.0;
    double test = 0.2;

    bool three_way() const { return valid > 0.0; }
    static SplitSpec parse(const std::string& text);  // "80:20" or "70:20:10"
    std::string to_string() const;
};

struct SplitReport {
    std::size_t users_without_test = 0;   // all interactions ended up in train
    std::size_t users_below_minimum = 0;  // fewer interactions than split segments
};

// Per-user temporal split: the first ceil(r_train * L) interactions go to
// train, the next segment to valid (three-way only), the remainder — always
// the latest interactions — to test.
SplitReport split(InteractionSet& iset, const SplitSpec& spec);

// Sparse binary rows; dense materialization on demand.
struct MultiHotMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::vector<int>> row_items;  // strictly increasing per row

    Matrix dense() const;
    Matrix dense_rows(const std::vector<int>& rows) const;
    bool contains(std::size_t row, int item) const;
    std::size_t row_count(std::size_t row) const { return row_items[row].size(); }
};

MultiHotMatrix to_multihot(const InteractionSet& iset, SplitTag which);
// Union of two splits (evaluation masks history = train + valid).
MultiHotMatrix to_multihot_union(const InteractionSet& iset, SplitTag a, SplitTag b);

// Preprocessed cache directory: meta.json plus one "user\titem\ttime" file
// per split. Byte-stable given identical input and config.
struct CacheMeta {
    int n_users = 0;
    int n_items = 0;
    std::size_t n_interactions = 0;
    std::string mode;
    std::string ratios;
    std::uint64_t source_checksum = 0;
    std::size_t items_only_in_test = 0;
};

void save_cache(const std::string& dir, const InteractionSet& iset, const CacheMeta& meta);
InteractionSet load_cache(const std::string& dir, CacheMeta* meta_out = nullptr);

// FNV-1a over the canonical interaction stream; used as dataset fingerprint.
std::uint64_t fingerprint(const InteractionSet& iset);
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace dreco
