#include <gtest/gtest.h>

#include "fsmem/fingerprint.hpp"
#include "fsmem/synthgen.hpp"
#include "oracle/fingerprint_oracle.hpp"
#include "support.hpp"

using namespace fsmem;
using namespace testing_support;

TEST(FingerprintKeys, CanonicalOrderOfSeventeen) {
    const std::vector<std::string> want{"search_ratio",      "browse_ratio",     "revisit_ratio", "avg_output_length",
                                        "files_created",     "total_output_chars", "dirs_created", "max_dir_depth",
                                        "files_moved",       "total_edits",      "avg_lines_changed", "small_edit_ratio",
                                        "total_deletes",     "delete_to_create", "structured_files", "md_table_rows",
                                        "image_files"};
    ASSERT_EQ(kFeatureCount, want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(feature_name(static_cast<FeatureKey>(i)), want[i]);
        EXPECT_EQ(feature_from_name(want[i]), static_cast<FeatureKey>(i));
    }
    EXPECT_FALSE(feature_from_name("nope"));
}

TEST(Fingerprint, SearchAndBrowseRatios) {
    Trajectory t;
    std::int64_t ts = 0;
    for (int i = 0; i < 2; ++i) t.events.push_back(act(++ts, FileSearch{"keyword", "q", 0, 0}));
    for (int i = 0; i < 3; ++i) t.events.push_back(act(++ts, read("a.md")));
    for (int i = 0; i < 5; ++i) t.events.push_back(act(++ts, FileBrowse{"dir", 3, 1}));
    const auto fp = compute_fingerprint(t);
    EXPECT_DOUBLE_EQ(fp[FeatureKey::search_ratio], 0.2);
    EXPECT_DOUBLE_EQ(fp[FeatureKey::browse_ratio], 0.5);
}

TEST(Fingerprint, EmptyTrajectoryIsAllZero) {
    const auto fp = compute_fingerprint(Trajectory{});
    for (double v : fp.values) EXPECT_EQ(v, 0.0);
}

TEST(Fingerprint, EditArithmetic) {
    Trajectory t;
    t.events.push_back(act(1, edit("a.md", 3, 1)));
    t.events.push_back(act(2, edit("a.md", 7, 5)));
    const auto fp = compute_fingerprint(t);
    EXPECT_EQ(fp[FeatureKey::total_edits], 2.0);
    EXPECT_EQ(fp[FeatureKey::avg_lines_changed], 8.0);
    EXPECT_EQ(fp[FeatureKey::small_edit_ratio], 0.5);
}

TEST(Fingerprint, ExtensionSets) {
    Trajectory t;
    t.events.push_back(act(1, create("data/table.csv", 10)));
    t.events.push_back(act(2, create("notes.md", 10)));
    t.events.push_back(act(3, create("fig/Chart.PNG", 10)));
    const auto fp = compute_fingerprint(t);
    EXPECT_EQ(fp[FeatureKey::structured_files], 1.0);
    EXPECT_EQ(fp[FeatureKey::image_files], 1.0);
    EXPECT_EQ(fp[FeatureKey::files_created], 3.0);
}

TEST(Fingerprint, LengthFallsBackToSnapshot) {
    Trajectory t;
    t.events.push_back(act(1, create("a.md")));
    t.events.push_back(act(2, create("b.md", 40)));
    t.deltas[0] = {"a.md", DeltaKind::snapshot, "\xe4\xb8\xad\xe6\x96\x87" "ab"}; // 4 characters
    t.deltas[1] = {"b.md", DeltaKind::snapshot, "ignored because the event records a length"};
    const auto fp = compute_fingerprint(t);
    EXPECT_EQ(fp[FeatureKey::total_output_chars], 44.0);
    EXPECT_EQ(fp[FeatureKey::avg_output_length], 22.0);
}

TEST(Fingerprint, TableRowsAndRevisits) {
    Trajectory t;
    t.events.push_back(act(1, create("a.md")));
    t.deltas[0] = {"a.md", DeltaKind::snapshot, "# T\n| a | b |\n|---|---|\n  | 1 | 2 |  \nnot | a row\n|\n"};
    t.events.push_back(act(2, read("x.md", 10, 2)));
    t.events.push_back(act(3, read("y.md", 10, 1)));
    const auto fp = compute_fingerprint(t);
    EXPECT_EQ(fp[FeatureKey::md_table_rows], 3.0);
    EXPECT_EQ(fp[FeatureKey::revisit_ratio], 0.5);
}

TEST(Fingerprint, VectorRoundTrip) {
    EXPECT_EQ(to_vector(Fingerprint{}), FeatureVector{});
    Fingerprint fp;
    fp[FeatureKey::files_created] = 3;
    const auto v = to_vector(fp);
    for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_EQ(v[i], i == index_of(FeatureKey::files_created) ? 3.0 : 0.0);
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        Fingerprint r;
        for (auto& x : r.values) x = rng.unit() * 100;
        EXPECT_EQ(from_vector(to_vector(r)), r);
        EXPECT_EQ(fingerprint_from_json(to_json(r)), r);
    }
}

TEST(Fingerprint, InvariantUnderSameTimestampPermutation) {
    const auto& p = builtin_profiles()[3];
    auto b = generate_trajectory(p, "T-04", 11);
    auto t = b.trajectory;
    for (auto& e : t.events) e.ts = 1000; // every event at one instant
    const auto base = compute_fingerprint(t);
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<std::size_t> order(t.events.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        Trajectory s;
        for (std::size_t i = 0; i < order.size(); ++i) {
            s.events.push_back(t.events[order[i]]);
            if (auto it = t.deltas.find(order[i]); it != t.deltas.end()) s.deltas[i] = it->second;
        }
        EXPECT_EQ(compute_fingerprint(s), base);
    }
}

TEST(Fingerprint, AppendingDeleteIsMonotone) {
    Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        auto t = generate_trajectory(builtin_profiles()[static_cast<std::size_t>(rep)], "T-02", static_cast<std::uint64_t>(rep)).trajectory;
        const auto before = compute_fingerprint(t);
        t.events.push_back(act(t.events.back().ts + 1, FileDelete{"inputs/x.md", 0, false}));
        const auto after = compute_fingerprint(t);
        EXPECT_GE(after[FeatureKey::total_deletes], before[FeatureKey::total_deletes]);
        EXPECT_GE(after[FeatureKey::delete_to_create], before[FeatureKey::delete_to_create]);
    }
}

TEST(Fingerprint, MatchesBruteForceOracle) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto& p = builtin_profiles()[seed % 20];
        const auto b = generate_trajectory(p, "T-" + std::to_string(seed % 32 + 1), seed);
        const auto fp = compute_fingerprint(b.trajectory);
        const auto want = oracle::as_values(oracle::recount(b.trajectory));
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            if (oracle::is_mean(k))
                EXPECT_NEAR(fp.values[k], want[k], 1e-12) << feature_name(static_cast<FeatureKey>(k));
            else
                EXPECT_EQ(fp.values[k], want[k]) << feature_name(static_cast<FeatureKey>(k));
        }
    }
}

TEST(Fingerprint, RangesHold) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto fp = compute_fingerprint(generate_trajectory(builtin_profiles()[seed % 20], "T-07", seed).trajectory);
        for (auto k : {FeatureKey::search_ratio, FeatureKey::browse_ratio, FeatureKey::revisit_ratio,
                       FeatureKey::small_edit_ratio}) {
            EXPECT_GE(fp[k], 0.0);
            EXPECT_LE(fp[k], 1.0);
        }
        for (double v : fp.values) EXPECT_GE(v, 0.0);
    }
}

TEST(Fingerprint, Helpers) {
    EXPECT_EQ(file_extension("a/b/Report.Final.CSV"), "csv");
    EXPECT_EQ(file_extension("dir.v2/readme"), "");
    EXPECT_EQ(file_extension("trailing."), "");
    EXPECT_EQ(count_table_rows("|a|\n||\n|\n x |y|"), 2u);
}
