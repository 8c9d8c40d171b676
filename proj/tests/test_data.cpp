#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "dreco/data.hpp"
#include "dreco/errors.hpp"
#include "dreco/rng.hpp"

using namespace dreco;

namespace {

std::string write_temp(const std::string& name, const std::string& contents) {
    const std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << contents;
    return path;
}

RawReview rated(const std::string& u, const std::string& i, int r, std::int64_t t) {
    return {u, i, r, t};
}

}  // namespace

TEST_CASE("ingest: empty file gives an empty list") {
    const std::string path = write_temp("dreco_empty.csv", "");
    const IngestResult res = ingest(path, CsvFormat::csv_rated);
    CHECK(res.reviews.empty());
    CHECK(res.malformed_rows.empty());
}

TEST_CASE("ingest: three-row rated fixture round-trips exactly") {
    const std::string path = write_temp("dreco_three.csv",
                                        "u1,i1,5,100\n"
                                        "u2,i9,3,200\n"
                                        "u1,i2,4,150\n");
    const IngestResult res = ingest(path, CsvFormat::csv_rated);
    REQUIRE(res.reviews.size() == 3);
    CHECK(res.reviews[0].user == "u1");
    CHECK(res.reviews[0].item == "i1");
    CHECK(res.reviews[0].rating == 5);
    CHECK(res.reviews[0].timestamp == 100);
    CHECK(res.reviews[1].user == "u2");
    CHECK(res.reviews[1].rating == 3);
    CHECK(res.reviews[2].timestamp == 150);
}

TEST_CASE("ingest: unrated format leaves ratings absent") {
    const std::string path = write_temp("dreco_unrated.csv", "a,x,10\nb,y,20\n");
    const IngestResult res = ingest(path, CsvFormat::csv_unrated);
    REQUIRE(res.reviews.size() == 2);
    CHECK_FALSE(res.reviews[0].rating.has_value());
    CHECK_FALSE(res.reviews[1].rating.has_value());
}

TEST_CASE("ingest: custom multi-character delimiter") {
    const std::string path = write_temp("dreco_ml.dat", "1::31::5::978300760\n1::1029::3::978302205\n");
    const IngestResult res = ingest(path, CsvFormat::csv_rated, "::");
    REQUIRE(res.reviews.size() == 2);
    CHECK(res.reviews[0].item == "31");
    CHECK(res.reviews[1].rating == 3);
}

TEST_CASE("ingest: header row is tolerated, malformed rows are counted") {
    const std::string path = write_temp("dreco_hdr.csv",
                                        "user,item,rating,timestamp\n"
                                        "u1,i1,5,100\n");
    const IngestResult res = ingest(path, CsvFormat::csv_rated);
    CHECK(res.reviews.size() == 1);
    CHECK(res.malformed_rows.empty());

    // >1% malformed rows is a hard error that names line numbers
    const std::string bad = write_temp("dreco_bad.csv",
                                       "u1,i1,5,100\n"
                                       "u2,i2,junk,200\n"
                                       "u3,i3,4,300\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(ingest(bad, CsvFormat::csv_rated)),
                         doctest::Contains("2"), DataError);

    CHECK_THROWS_AS(static_cast<void>(ingest("/nonexistent/file.csv", CsvFormat::csv_rated)),
                    DataError);
}

TEST_CASE("preprocess: all-liked reviews make clean and noisy identical") {
    std::vector<RawReview> reviews = {rated("a", "x", 5, 1), rated("b", "y", 5, 2),
                                      rated("a", "z", 4, 3)};
    const InteractionSet clean = preprocess(reviews, FilterMode::clean);
    const InteractionSet noisy = preprocess(reviews, FilterMode::noisy);
    CHECK(clean.n_users == noisy.n_users);
    CHECK(clean.n_items == noisy.n_items);
    CHECK(clean.interactions.size() == noisy.interactions.size());
}

TEST_CASE("preprocess: ratings [5,3,4] keep 2 clean / 3 noisy") {
    std::vector<RawReview> reviews = {rated("u", "a", 5, 1), rated("u", "b", 3, 2),
                                      rated("u", "c", 4, 3)};
    CHECK(preprocess(reviews, FilterMode::clean).interactions.size() == 2);
    CHECK(preprocess(reviews, FilterMode::noisy).interactions.size() == 3);
}

TEST_CASE("preprocess: unrated reviews are hits in both modes") {
    std::vector<RawReview> reviews = {{"u", "a", std::nullopt, 1}, rated("u", "b", 2, 2)};
    const InteractionSet clean = preprocess(reviews, FilterMode::clean);
    CHECK(clean.interactions.size() == 1);
    CHECK(clean.item_names[0] == "a");
}

TEST_CASE("preprocess: duplicates keep the earliest occurrence") {
    std::vector<RawReview> reviews = {rated("u", "a", 5, 30), rated("u", "a", 4, 10),
                                      rated("u", "b", 5, 20)};
    const InteractionSet iset = preprocess(reviews, FilterMode::clean);
    REQUIRE(iset.interactions.size() == 2);
    CHECK(iset.interactions[0].time == 10);  // the earlier "a"
    CHECK(iset.interactions[1].time == 20);
}

TEST_CASE("preprocess: ids are dense, zero-based, first-appearance ordered") {
    std::vector<RawReview> reviews = {rated("zed", "m9", 5, 5), rated("ann", "m1", 5, 1),
                                      rated("zed", "m1", 5, 9), rated("ann", "m9", 1, 2)};
    const InteractionSet iset = preprocess(reviews, FilterMode::clean);
    CHECK(iset.n_users == 2);
    CHECK(iset.n_items == 2);
    CHECK(iset.user_names[0] == "zed");  // first survivor in file order
    CHECK(iset.user_names[1] == "ann");
    for (const Interaction& it : iset.interactions) {
        CHECK(it.user >= 0);
        CHECK(it.user < iset.n_users);
        CHECK(it.item >= 0);
        CHECK(it.item < iset.n_items);
    }
}

TEST_CASE("preprocess: filtering everything out is a hard error") {
    std::vector<RawReview> reviews = {rated("u", "a", 1, 1), rated("u", "b", 2, 2)};
    CHECK_THROWS_AS(static_cast<void>(preprocess(reviews, FilterMode::clean)), DataError);
    CHECK_THROWS_AS(static_cast<void>(preprocess({}, FilterMode::noisy)), DataError);
}

TEST_CASE("preprocess is idempotent on its own output") {
    std::vector<RawReview> reviews;
    RngState rng(71);
    for (int i = 0; i < 200; ++i) {
        reviews.push_back(rated("u" + std::to_string(static_cast<int>(rng.next_unit() * 12)),
                                "i" + std::to_string(static_cast<int>(rng.next_unit() * 30)),
                                1 + static_cast<int>(rng.next_unit() * 5),
                                static_cast<std::int64_t>(rng.next_unit() * 1000)));
    }
    const InteractionSet first = preprocess(reviews, FilterMode::clean);
    std::vector<RawReview> reencoded;
    for (const Interaction& it : first.interactions) {
        reencoded.push_back(rated(first.user_names[static_cast<std::size_t>(it.user)],
                                  first.item_names[static_cast<std::size_t>(it.item)], 5, it.time));
    }
    const InteractionSet second = preprocess(reencoded, FilterMode::clean);
    CHECK(second.n_users == first.n_users);
    CHECK(second.n_items == first.n_items);
    CHECK(second.interactions.size() == first.interactions.size());
}

namespace {

InteractionSet user_with_n_interactions(int n) {
    std::vector<RawReview> reviews;
    for (int i = 0; i < n; ++i) {
        reviews.push_back(rated("u", "i" + std::to_string(i), 5, i * 10));
    }
    reviews.push_back(rated("other", "i0", 5, 1));
    reviews.push_back(rated("other", "i1", 5, 2));
    return preprocess(reviews, FilterMode::clean);
}

}  // namespace

TEST_CASE("split: 10 interactions at 80:20 give the 2 latest to test") {
    InteractionSet iset = user_with_n_interactions(10);
    split(iset, SplitSpec::parse("80:20"));
    int train = 0, test = 0;
    std::int64_t min_test_time = 1'000'000;
    std::int64_t max_train_time = -1;
    for (const Interaction& it : iset.interactions) {
        if (it.user != 0) continue;
        if (it.split == SplitTag::train) {
            ++train;
            max_train_time = std::max(max_train_time, it.time);
        } else if (it.split == SplitTag::test) {
            ++test;
            min_test_time = std::min(min_test_time, it.time);
        }
    }
    CHECK(train == 8);
    CHECK(test == 2);
    CHECK(min_test_time > max_train_time);
}

TEST_CASE("split: 10 interactions at 70:20:10 give 7/2/1") {
    InteractionSet iset = user_with_n_interactions(10);
    split(iset, SplitSpec::parse("70:20:10"));
    int counts[3] = {0, 0, 0};
    for (const Interaction& it : iset.interactions) {
        if (it.user == 0) {
            ++counts[static_cast<int>(it.split)];
        }
    }
    CHECK(counts[0] == 7);
    CHECK(counts[1] == 2);
    CHECK(counts[2] == 1);
}

TEST_CASE("split: a single-interaction user goes entirely to train and is flagged") {
    InteractionSet iset = user_with_n_interactions(1);
    const SplitReport report = split(iset, SplitSpec::parse("80:20"));
    CHECK(report.users_below_minimum == 1);
    CHECK(report.users_without_test >= 1);
    for (const Interaction& it : iset.interactions) {
        if (it.user == 0) {
            CHECK(it.split == SplitTag::train);
        }
    }
}

TEST_CASE("split preserves the per-user interaction multiset") {
    InteractionSet iset = user_with_n_interactions(9);
    const std::size_t before = iset.interactions.size();
    std::multiset<std::tuple<int, int, std::int64_t>> original;
    for (const Interaction& it : iset.interactions) {
        original.insert({it.user, it.item, it.time});
    }
    split(iset, SplitSpec::parse("70:20:10"));
    CHECK(iset.interactions.size() == before);
    std::multiset<std::tuple<int, int, std::int64_t>> after;
    for (const Interaction& it : iset.interactions) {
        after.insert({it.user, it.item, it.time});
    }
    CHECK(after == original);
}

TEST_CASE("split: bad ratio specs are configuration errors") {
    CHECK_THROWS_AS(SplitSpec::parse("80"), ConfigError);
    CHECK_THROWS_AS(SplitSpec::parse("80:10:5:5"), ConfigError);
    CHECK_THROWS_AS(SplitSpec::parse("abc:def"), ConfigError);
}

TEST_CASE("to_multihot: dense row layout") {
    std::vector<RawReview> reviews;
    for (int i = 0; i < 8; ++i) {
        reviews.push_back(rated("pad", "i" + std::to_string(i), 5, i));
    }
    reviews.push_back(rated("u", "i0", 5, 100));
    reviews.push_back(rated("u", "i5", 5, 200));
    InteractionSet iset = preprocess(reviews, FilterMode::clean);
    const MultiHotMatrix mh = to_multihot(iset, SplitTag::train);
    const Matrix dense = mh.dense();
    REQUIRE(iset.n_items == 8);
    const double want[8] = {1, 0, 0, 0, 0, 1, 0, 0};
    for (int c = 0; c < 8; ++c) {
        CHECK(dense.at(1, static_cast<std::size_t>(c)) == want[c]);
    }
    // row sums equal per-user dedup'd interaction counts
    for (std::size_t r = 0; r < mh.n_rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < mh.n_cols; ++c) sum += dense.at(r, c);
        CHECK(sum == static_cast<double>(mh.row_count(r)));
    }
    for (std::size_t i = 0; i < dense.size(); ++i) {
        CHECK((dense.data[i] == 0.0 || dense.data[i] == 1.0));
    }
}

TEST_CASE("to_multihot: train and test rows are disjoint without repeat purchases") {
    RngState rng(83);
    std::vector<RawReview> reviews;
    for (int u = 0; u < 20; ++u) {
        std::set<int> items;
        while (items.size() < 8) {
            items.insert(static_cast<int>(rng.next_unit() * 25));
        }
        int t = 0;
        for (int item : items) {
            reviews.push_back(rated("u" + std::to_string(u), "i" + std::to_string(item), 5, t++));
        }
    }
    InteractionSet iset = preprocess(reviews, FilterMode::clean);
    split(iset, SplitSpec::parse("80:20"));
    const MultiHotMatrix train = to_multihot(iset, SplitTag::train);
    const MultiHotMatrix test = to_multihot(iset, SplitTag::test);
    for (std::size_t u = 0; u < train.n_rows; ++u) {
        for (int item : test.row_items[u]) {
            CHECK_FALSE(train.contains(u, item));
        }
    }
}

TEST_CASE("cache: save/load round-trip and byte stability") {
    InteractionSet iset = user_with_n_interactions(10);
    split(iset, SplitSpec::parse("80:20"));
    CacheMeta meta;
    meta.n_users = iset.n_users;
    meta.n_items = iset.n_items;
    meta.n_interactions = iset.interactions.size();
    meta.mode = "clean";
    meta.ratios = "80:20";
    meta.source_checksum = 12345;

    const std::string dir = (std::filesystem::temp_directory_path() / "dreco_cache_test").string();
    std::filesystem::remove_all(dir);
    save_cache(dir, iset, meta);
    CacheMeta loaded_meta;
    const InteractionSet loaded = load_cache(dir, &loaded_meta);
    CHECK(loaded.n_users == iset.n_users);
    CHECK(loaded.n_items == iset.n_items);
    REQUIRE(loaded.interactions.size() == iset.interactions.size());
    CHECK(loaded_meta.source_checksum == 12345);
    CHECK(fingerprint(loaded) == fingerprint(iset));

    // identical rewrite produces identical bytes
    const auto checksum_before = fnv1a_file(dir + "/train.tsv");
    save_cache(dir, iset, meta);
    CHECK(fnv1a_file(dir + "/train.tsv") == checksum_before);
}

TEST_CASE("renumbering preserves interaction counts") {
    RngState rng(91);
    std::vector<RawReview> reviews;
    for (int i = 0; i < 500; ++i) {
        reviews.push_back(rated("u" + std::to_string(static_cast<int>(rng.next_unit() * 40)),
                                "i" + std::to_string(static_cast<int>(rng.next_unit() * 60)), 4,
                                i));
    }
    const InteractionSet iset = preprocess(reviews, FilterMode::noisy);
    // only dedup removes rows; all surviving (user,item) pairs are unique
    std::set<std::pair<std::string, std::string>> unique_pairs;
    for (const RawReview& r : reviews) {
        unique_pairs.insert({r.user, r.item});
    }
    CHECK(iset.interactions.size() == unique_pairs.size());
}
