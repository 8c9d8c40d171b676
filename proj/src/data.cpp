#include "dreco/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dreco/errors.hpp"

namespace dreco {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv1a_bytes(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

std::vector<std::string> split_fields(const std::string& line, const std::string& delim) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(delim, pos);
        if (next == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + delim.size();
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_i64(const std::string& s, std::int64_t& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace

IngestResult ingest(const std::string& path, CsvFormat format, const std::string& delimiter) {
    if (delimiter.empty()) {
        throw ConfigError("ingest: delimiter must be non-empty");
    }
    std::ifstream is(path);
    if (!is) {
        throw DataError("cannot open dataset file: " + path);
    }
    const std::size_t want_fields = format == CsvFormat::csv_rated ? 4 : 3;
    IngestResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        ++result.total_rows;
        const auto fields = split_fields(line, delimiter);
        bool ok = fields.size() == want_fields;
        RawReview review;
        std::int64_t rating = 0;
        std::int64_t ts = 0;
        if (ok) {
            review.user = trim(fields[0]);
            review.item = trim(fields[1]);
            ok = !review.user.empty() && !review.item.empty();
        }
        if (ok && format == CsvFormat::csv_rated) {
            ok = parse_i64(fields[2], rating) && rating >= 1 && rating <= 5;
            if (ok) review.rating = static_cast<int>(rating);
        }
        if (ok) {
            ok = parse_i64(fields[want_fields - 1], ts);
            if (ok) review.timestamp = ts;
        }
        if (ok) {
            result.reviews.push_back(std::move(review));
        } else if (result.total_rows == 1) {
            // A single unparsable first row is treated as a header.
            --result.total_rows;
        } else {
            result.malformed_rows.push_back(line_no);
        }
    }
    if (result.total_rows > 0 &&
        static_cast<double>(result.malformed_rows.size()) > 0.01 * static_cast<double>(result.total_rows)) {
        std::ostringstream msg;
        msg << path << ": " << result.malformed_rows.size() << " of " << result.total_rows
            << " rows malformed (>1%); first bad lines:";
        const std::size_t show = std::min<std::size_t>(result.malformed_rows.size(), 10);
        for (std::size_t i = 0; i < show; ++i) {
            msg << ' ' << result.malformed_rows[i];
        }
        throw DataError(msg.str());
    }
    return result;
}

InteractionSet preprocess(const std::vector<RawReview>& reviews, FilterMode mode) {
    if (reviews.empty()) {
        throw DataError("preprocess: no reviews to process");
    }

    // Filter: clean drops rated misses (<= 3); unrated reviews count as hits
    // in both modes.
    std::vector<const RawReview*> kept;
    kept.reserve(reviews.size());
    for (const RawReview& r : reviews) {
        if (mode == FilterMode::clean && r.rating.has_value() && *r.rating <= 3) {
            continue;
        }
        kept.push_back(&r);
    }
    if (kept.empty()) {
        throw DataError("preprocess: every review was filtered out");
    }

    // Dense user ids in first-appearance order over the surviving reviews.
    InteractionSet iset;
    std::unordered_map<std::string, int> user_ids;
    for (const RawReview* r : kept) {
        if (user_ids.emplace(r->user, static_cast<int>(user_ids.size())).second) {
            iset.user_names.push_back(r->user);
        }
    }

    struct Row {
        int user;
        std::int64_t time;
        std::size_t order;  // original position, for stable tie-breaks
        const RawReview* review;
    };
    std::vector<Row> rows;
    rows.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        rows.push_back({user_ids.at(kept[i]->user), kept[i]->timestamp, i, kept[i]});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.user != b.user) return a.user < b.user;
        if (a.time != b.time) return a.time < b.time;
        return a.order < b.order;
    });

    // Deduplicate (user, item), keeping the earliest occurrence, then assign
    // dense item ids in first appearance order over the sorted stream. The
    // stream is user-contiguous, so dedup state resets at user boundaries.
    std::unordered_map<std::string, int> item_ids;
    std::unordered_set<std::string> seen_items;
    int current_user = -1;
    for (const Row& row : rows) {
        if (row.user != current_user) {
            current_user = row.user;
            seen_items.clear();
        }
        if (!seen_items.insert(row.review->item).second) {
            continue;
        }
        auto [it, inserted] = item_ids.emplace(row.review->item, static_cast<int>(item_ids.size()));
        if (inserted) {
            iset.item_names.push_back(row.review->item);
        }
        iset.interactions.push_back({row.user, it->second, row.time, SplitTag::train});
    }

    iset.n_users = static_cast<int>(iset.user_names.size());
    iset.n_items = static_cast<int>(iset.item_names.size());
    return iset;
}

SplitSpec SplitSpec::parse(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ':')) {
        try {
            parts.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ConfigError("bad split ratio: " + text);
        }
    }
    double total = 0.0;
    for (double p : parts) total += p;
    if ((parts.size() != 2 && parts.size() != 3) || total <= 0.0) {
        throw ConfigError("split ratios must be R:R or R:R:R, got: " + text);
    }
    SplitSpec spec;
    spec.train = parts[0] / total;
    if (parts.size() == 2) {
        spec.valid = 0.0;
        spec.test = parts[1] / total;
    } else {
        spec.valid = parts[1] / total;
        spec.test = parts[2] / total;
    }
    if (spec.train <= 0.0 || spec.test <= 0.0) {
        throw ConfigError("train and test shares must be positive: " + text);
    }
    return spec;
}

std::string SplitSpec::to_string() const {
    std::ostringstream os;
    auto pct = [](double v) { return static_cast<int>(std::lround(v * 100.0)); };
    os << pct(train) << ':';
    if (three_way()) {
        os << pct(valid) << ':';
    }
    os << pct(test);
    return os.str();
}

SplitReport split(InteractionSet& iset, const SplitSpec& spec) {
    SplitReport report;
    const std::size_t min_len = spec.three_way() ? 3 : 2;
    std::size_t begin = 0;
    while (begin < iset.interactions.size()) {
        std::size_t end = begin;
        while (end < iset.interactions.size() &&
               iset.interactions[end].user == iset.interactions[begin].user) {
            ++end;
        }
        const std::size_t len = end - begin;
        std::size_t n_train = len;
        std::size_t n_valid = 0;
        if (len < min_len) {
            ++report.users_below_minimum;
        } else {
            n_train = static_cast<std::size_t>(
                std::ceil(spec.train * static_cast<double>(len) - 1e-9));
            n_train = std::min(n_train, len);
            if (spec.three_way()) {
                n_valid = static_cast<std::size_t>(
                    std::ceil(spec.valid * static_cast<double>(len) - 1e-9));
                n_valid = std::min(n_valid, len - n_train);
            }
        }
        if (n_train + n_valid >= len) {
            // no test segment left for this user
            n_valid = std::min(n_valid, len - n_train);
            ++report.users_without_test;
        }
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t offset = i - begin;
            if (offset < n_train) {
                iset.interactions[i].split = SplitTag::train;
            } else if (offset < n_train + n_valid) {
                iset.interactions[i].split = SplitTag::valid;
            } else {
                iset.interactions[i].split = SplitTag::test;
            }
        }
        begin = end;
    }
    return report;
}

Matrix MultiHotMatrix::dense() const {
    Matrix m(n_rows, n_cols);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (int item : row_items[r]) {
            m.at(r, static_cast<std::size_t>(item)) = 1.0;
        }
    }
    return m;
}

Matrix MultiHotMatrix::dense_rows(const std::vector<int>& rows) const {
    Matrix m(rows.size(), n_cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int item : row_items[static_cast<std::size_t>(rows[i])]) {
            m.at(i, static_cast<std::size_t>(item)) = 1.0;
        }
    }
    return m;
}

bool MultiHotMatrix::contains(std::size_t row, int item) const {
    const auto& items = row_items[row];
    return std::binary_search(items.begin(), items.end(), item);
}

namespace {

MultiHotMatrix multihot_filtered(const InteractionSet& iset, auto&& keep) {
    MultiHotMatrix m;
    m.n_rows = static_cast<std::size_t>(iset.n_users);
    m.n_cols = static_cast<std::size_t>(iset.n_items);
    m.row_items.resize(m.n_rows);
    for (const Interaction& it : iset.interactions) {
        if (keep(it.split)) {
            m.row_items[static_cast<std::size_t>(it.user)].push_back(it.item);
        }
    }
    for (auto& row : m.row_items) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return m;
}

}  // namespace

MultiHotMatrix to_multihot(const InteractionSet& iset, SplitTag which) {
    return multihot_filtered(iset, [which](SplitTag t) { return t == which; });
}

MultiHotMatrix to_multihot_union(const InteractionSet& iset, SplitTag a, SplitTag b) {
    return multihot_filtered(iset, [a, b](SplitTag t) { return t == a || t == b; });
}

namespace {

const char* split_file_name(SplitTag tag) {
    switch (tag) {
        case SplitTag::train: return "train.tsv";
        case SplitTag::valid: return "valid.tsv";
        case SplitTag::test: return "test.tsv";
    }
    return "train.tsv";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw DataError("cannot write " + tmp.string());
        }
        os << contents;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void save_cache(const std::string& dir, const InteractionSet& iset, const CacheMeta& meta) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);

    for (SplitTag tag : {SplitTag::train, SplitTag::valid, SplitTag::test}) {
        std::ostringstream os;
        for (const Interaction& it : iset.interactions) {
            if (it.split == tag) {
                os << it.user << '\t' << it.item << '\t' << it.time << '\n';
            }
        }
        write_file_atomic(base / split_file_name(tag), os.str());
    }

    nlohmann::json j;
    j["n_users"] = meta.n_users;
    j["n_items"] = meta.n_items;
    j["n_interactions"] = meta.n_interactions;
    j["mode"] = meta.mode;
    j["ratios"] = meta.ratios;
    j["source_checksum"] = meta.source_checksum;
    j["items_only_in_test"] = meta.items_only_in_test;
    write_file_atomic(base / "meta.json", j.dump(2) + "\n");
}

InteractionSet load_cache(const std::string& dir, CacheMeta* meta_out) {
    const std::filesystem::path base(dir);
    std::ifstream meta_is(base / "meta.json");
    if (!meta_is) {
        throw DataError("cache has no meta.json: " + dir);
    }
    nlohmann::json j;
    try {
        meta_is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad cache meta.json: " + std::string(e.what()));
    }
    CacheMeta meta;
    meta.n_users = j.at("n_users").get<int>();
    meta.n_items = j.at("n_items").get<int>();
    meta.n_interactions = j.at("n_interactions").get<std::size_t>();
    meta.mode = j.at("mode").get<std::string>();
    meta.ratios = j.at("ratios").get<std::string>();
    meta.source_checksum = j.at("source_checksum").get<std::uint64_t>();
    meta.items_only_in_test = j.value("items_only_in_test", std::size_t{0});

    InteractionSet iset;
    iset.n_users = meta.n_users;
    iset.n_items = meta.n_items;
    for (SplitTag tag : {SplitTag::train, SplitTag::valid, SplitTag::test}) {
        std::ifstream is(base / split_file_name(tag));
        if (!is) {
            continue;
        }
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            Interaction it;
            it.split = tag;
            std::istringstream ls(line);
            if (!(ls >> it.user >> it.item >> it.time)) {
                throw DataError("bad cache line in " + std::string(split_file_name(tag)) + ": " + line);
            }
            if (it.user < 0 || it.user >= iset.n_users || it.item < 0 || it.item >= iset.n_items) {
                throw DataError("cache id out of range: " + line);
            }
            iset.interactions.push_back(it);
        }
    }
    std::stable_sort(iset.interactions.begin(), iset.interactions.end(),
                     [](const Interaction& a, const Interaction& b) {
                         if (a.user != b.user) return a.user < b.user;
                         return a.time < b.time;
                     });
    if (iset.interactions.size() != meta.n_interactions) {
        throw DataError("cache interaction count disagrees with meta.json");
    }
    if (meta_out != nullptr) {
        *meta_out = meta;
    }
    return iset;
}

std::uint64_t fingerprint(const InteractionSet& iset) {
    std::uint64_t h = kFnvOffset;
    fnv1a_bytes(h, &iset.n_users, sizeof(iset.n_users));
    fnv1a_bytes(h, &iset.n_items, sizeof(iset.n_items));
    for (const Interaction& it : iset.interactions) {
        fnv1a_bytes(h, &it.user, sizeof(it.user));
        fnv1a_bytes(h, &it.item, sizeof(it.item));
        fnv1a_bytes(h, &it.time, sizeof(it.time));
        fnv1a_bytes(h, &it.split, sizeof(it.split));
    }
    return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw DataError("cannot open file for checksum: " + path);
    }
    std::uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        fnv1a_bytes(h, buf, static_cast<std::size_t>(is.gcount()));
    }
    return h;
}

}  // namespace dreco
