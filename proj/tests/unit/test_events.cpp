#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "fsmem/errors.hpp"
#include "fsmem/events.hpp"
#include "support.hpp"

using namespace fsmem;
using testing_support::act;

namespace {

Json minimal_payload(std::string_view type) {
    if (type == "file_read") return {{"path", "notes/a.md"}};
    if (type == "file_browse") return {{"dir_path", "notes"}};
    if (type == "file_search") return {{"query", "budget"}};
    if (type == "file_write") return {{"path", "out/a.md"}, {"operation", "create"}, {"media_ref", "m/1"}};
    if (type == "file_edit") return {{"path", "out/a.md"}, {"lines_added", 1}, {"lines_deleted", 0}, {"diff", "+x"}};
    if (type == "dir_create") return {{"dir_path", "out"}, {"depth", 1}};
    if (type == "file_copy") return {{"src_path", "a"}, {"dest_path", "b"}};
    if (type == "file_move") return {{"old_path", "a"}, {"new_path", "b"}};
    if (type == "file_delete") return {{"path", "a"}};
    if (type == "file_rename") return {{"old_path", "a"}, {"new_path", "b"}};
    if (type == "cross_file_ref") return {{"src_file", "a"}, {"target_file", "b"}};
    if (type == "context_switch") return {{"from_file", "a"}, {"to_file", "b"}};
    return Json::object();
}

std::vector<RawEvent> one_of_each() {
    std::vector<RawEvent> raw;
    std::int64_t ts = 1;
    for (auto t : kRetainedTypes) raw.push_back({ts++, std::string(t), minimal_payload(t)});
    for (auto t : kSimulationTypes) raw.push_back({ts++, std::string(t), {{"tokens", 12}}});
    return raw;
}

} // namespace

TEST(EventLog, ParsesSpecRecord) {
    const auto raw = parse_event_log(
        R"([{"ts": 1712000000000, "type": "file_read", "path": "notes/a.md", "file_type": "md", "depth": 1,
            "view_count": 1, "view_range": "1-40", "length": 812, "revisit_ms": 0}])");
    ASSERT_EQ(raw.size(), 1u);
    EXPECT_EQ(raw[0].type, "file_read");
    EXPECT_EQ(raw[0].ts, 1712000000000);
    EXPECT_EQ(raw[0].payload.at("length"), 812);
    EXPECT_FALSE(raw[0].payload.contains("ts"));
}

TEST(EventLog, EmptyArray) { EXPECT_TRUE(parse_event_log("[]").empty()); }

TEST(EventLog, AllTwentyTwoTagsInOrder) {
    const auto raw = one_of_each();
    const auto text = serialize_event_log(raw);
    const auto parsed = parse_event_log(text);
    ASSERT_EQ(parsed.size(), 22u);
    for (std::size_t i = 0; i < 22; ++i) EXPECT_EQ(parsed[i].type, raw[i].type);
}

TEST(EventLog, MalformedRecordCarriesIndex) {
    try {
        parse_event_log(R"([{"ts": 1, "type": "file_read", "path": "a"}, {"type": "file_read"}])");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.record(), 1u);
    }
}

TEST(EventLog, UnknownTypeNamesTag) {
    try {
        parse_event_log(R"([{"ts": 1, "type": "file_teleport"}])");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("file_teleport"), std::string::npos);
    }
}

TEST(EventLog, InvalidJsonAndNonArray) {
    EXPECT_THROW(parse_event_log("[{"), ParseError);
    EXPECT_THROW(parse_event_log("{}"), ParseError);
    EXPECT_THROW(parse_event_log(R"([{"ts": -1, "type": "file_read"}])"), ParseError);
}

TEST(EventLog, UnknownPayloadKeysPassThrough) {
    const auto raw = parse_event_log(R"([{"ts": 3, "type": "file_read", "path": "a.md", "custom": {"x": 1}}])");
    const auto clean = clean_events(raw);
    ASSERT_EQ(clean.size(), 1u);
    EXPECT_EQ(clean[0].extra.at("custom").at("x"), 1);
    const auto back = to_raw(clean);
    EXPECT_EQ(back[0].payload.at("custom").at("x"), 1);
}

TEST(Clean, OneOfEachKeepsTwelve) {
    const auto clean = clean_events(one_of_each());
    ASSERT_EQ(clean.size(), 12u);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(clean[i].type(), kRetainedTypes[i]);
}

TEST(Clean, StripsLeakFields) {
    std::vector<RawEvent> raw{{1, "file_read",
                               {{"path", "a.md"}, {"model_provider", "x"}, {"message_id", "m1"}, {"model_name", "y"}}}};
    const auto clean = clean_events(raw);
    ASSERT_EQ(clean.size(), 1u);
    for (auto f : kLeakFields) EXPECT_FALSE(clean[0].extra.contains(std::string(f)));
    const auto back = to_raw(clean);
    for (auto f : kLeakFields) EXPECT_FALSE(back[0].payload.contains(std::string(f)));
}

TEST(Clean, MissingRequiredFieldNamesEventAndField) {
    std::vector<RawEvent> raw{{1, "tool_call", Json::object()}, {2, "file_edit", {{"path", "a.md"}, {"lines_added", 2}}}};
    try {
        clean_events(raw);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.event(), 1u);
        EXPECT_EQ(e.field(), "lines_deleted");
    }
}

TEST(Clean, WrongTypeAndNegativeCounts) {
    EXPECT_THROW(clean_events(std::vector<RawEvent>{{1, "file_read", {{"path", 7}}}}), SchemaError);
    EXPECT_THROW(clean_events(std::vector<RawEvent>{{1, "file_read", {{"path", "a"}, {"view_count", -1}}}}), SchemaError);
}

TEST(Clean, IdempotentAndStable) {
    auto raw = one_of_each();
    std::reverse(raw.begin(), raw.end());
    const auto once = clean_events(raw);
    const auto twice = clean_events(to_raw(once));
    EXPECT_EQ(once, twice);
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once[i].type(), kRetainedTypes[11 - i]);
}

TEST(Clean, CountIdentity) {
    std::vector<RawEvent> raw;
    std::size_t sim = 0;
    for (int rep = 0; rep < 5; ++rep)
        for (auto t : kSimulationTypes) {
            raw.push_back({rep, std::string(t), Json::object()});
            ++sim;
        }
    for (auto t : kRetainedTypes) raw.push_back({9, std::string(t), minimal_payload(t)});
    EXPECT_EQ(clean_events(raw).size(), raw.size() - sim);
}

TEST(Clean, RoundTripFixedPoint) {
    const auto clean = clean_events(one_of_each());
    const auto text = serialize_event_log(to_raw(clean));
    EXPECT_EQ(clean_events(parse_event_log(text)), clean);
    EXPECT_EQ(serialize_event_log(parse_event_log(text)), text);
}

TEST(Validate, MonotonicTimestampsPass) {
    Trajectory t;
    for (std::int64_t ts : {1, 2, 3}) t.events.push_back(act(ts, testing_support::read("a.md")));
    EXPECT_TRUE(validate_trajectory(t).empty());
}

TEST(Validate, NonMonotonicAtIndexOne) {
    Trajectory t;
    t.events.push_back(act(5, testing_support::read("a.md")));
    t.events.push_back(act(2, testing_support::read("a.md")));
    const auto v = validate_trajectory(t);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].invariant, "non-monotonic timestamp");
    EXPECT_EQ(v[0].event_index, 1u);
}

TEST(Validate, CreateWithoutDelta) {
    Trajectory t;
    t.events.push_back(act(1, testing_support::create("out/a.md", 10)));
    const auto v = validate_trajectory(t);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].invariant, "missing delta");
    EXPECT_EQ(v[0].event_index, 0u);
}

TEST(Validate, DeltaKindMismatchAndStrayDeltas) {
    Trajectory t;
    t.events.push_back(act(1, testing_support::create("a.md")));
    t.events.push_back(act(2, testing_support::read("a.md")));
    t.deltas[0] = {"a.md", DeltaKind::patch, "+x"};
    t.deltas[1] = {"a.md", DeltaKind::snapshot, "x"};
    t.deltas[7] = {"a.md", DeltaKind::snapshot, "x"};
    std::map<std::string, std::size_t> seen;
    for (const auto& v : validate_trajectory(t)) ++seen[v.invariant];
    EXPECT_EQ(seen["delta kind mismatch"], 1u);
    EXPECT_EQ(seen["delta on non-content event"], 1u);
    EXPECT_EQ(seen["delta index out of range"], 1u);
}

TEST(Validate, UntargetedOutputFile) {
    TrajectoryBundle b;
    b.trajectory.events.push_back(act(1, testing_support::create("a.md")));
    b.trajectory.deltas[0] = {"a.md", DeltaKind::snapshot, "hello"};
    b.output_files["a.md"] = "hello";
    EXPECT_TRUE(validate_bundle(b).empty());
    b.output_files["ghost.md"] = "boo";
    const auto v = validate_bundle(b);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].invariant, "untargeted output file");
    EXPECT_NE(format_violations(v).find("ghost.md"), std::string::npos);
}

TEST(Events, PrimaryPath) {
    EXPECT_EQ(primary_path(act(1, FileMove{"a", "b/c", 1})), "b/c");
    EXPECT_EQ(primary_path(act(1, testing_support::read("x.md"))), "x.md");
}
