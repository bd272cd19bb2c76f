#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace fsmem {

using Json = nlohmann::ordered_json;

// Every tag that may appear in a raw log: the 12 retained atomic actions
// first, then the 10 simulation-metadata types that cleaning removes.
inline constexpr std::array<std::string_view, 12> kRetainedTypes{
    "file_read",   "file_browse", "file_search", "file_write",
    "file_edit",   "dir_create",  "file_copy",   "file_move",
    "file_delete", "file_rename", "cross_file_ref", "context_switch"};

inline constexpr std::array<std::string_view, 10> kSimulationTypes{
    "tool_call",     "llm_response", "iteration_start", "iteration_end",
    "fs_snapshot",   "session_start", "session_end",    "error_encounter",
    "error_response", "compaction_triggered"};

// Fields that identify the generating engine rather than the user.
inline constexpr std::array<std::string_view, 3> kLeakFields{
    "message_id", "model_provider", "model_name"};

bool is_known_type(std::string_view tag);
bool is_retained_type(std::string_view tag);

struct RawEvent {
    std::int64_t ts = 0;
    std::string type;
    Json payload = Json::object(); // everything except `ts` and `type`

    bool operator==(const RawEvent&) const = default;
};

// Parses an events.json document: one top-level array of flat objects.
std::vector<RawEvent> parse_event_log(std::string_view text);
std::string serialize_event_log(std::span<const RawEvent> events);

struct FileRead {
    std::string path;
    std::string file_type;
    std::int64_t depth = 0;
    std::int64_t view_count = 1;
    std::optional<std::string> view_range; // opaque, e.g. "1-40"
    std::int64_t length = 0;
    std::int64_t revisit_ms = 0;
    bool operator==(const FileRead&) const = default;
};

struct FileBrowse {
    std::string dir_path;
    std::int64_t files_listed = 0;
    std::int64_t depth = 0;
    bool operator==(const FileBrowse&) const = default;
};

struct FileSearch {
    std::string search_type;
    std::string query;
    std::int64_t files_matched = 0;
    std::int64_t files_opened = 0;
    bool operator==(const FileSearch&) const = default;
};

struct FileWrite {
    std::string path;
    std::string file_type;
    std::string operation; // "create", "overwrite", "append", ...
    std::optional<std::int64_t> length;
    std::optional<std::string> before_hash;
    std::optional<std::string> after_hash;
    std::optional<std::string> media_ref;
    bool is_create() const { return operation == "create"; }
    bool operator==(const FileWrite&) const = default;
};

struct FileEdit {
    std::string path;
    std::string tool;
    std::int64_t lines_added = 0;
    std::int64_t lines_deleted = 0;
    std::int64_t lines_modified = 0;
    std::optional<std::string> diff;
    std::optional<std::string> before_hash;
    std::optional<std::string> after_hash;
    bool operator==(const FileEdit&) const = default;
};

struct DirCreate {
    std::string dir_path;
    std::int64_t depth = 0;
    std::int64_t sibling_count = 0;
    bool operator==(const DirCreate&) const = default;
};

struct FileCopy {
    std::string src_path;
    std::string dest_path;
    bool is_backup = false;
    bool operator==(const FileCopy&) const = default;
};

struct FileMove {
    std::string old_path;
    std::string new_path;
    std::int64_t dest_depth = 0;
    bool operator==(const FileMove&) const = default;
};

struct FileDelete {
    std::string path;
    std::int64_t file_age_ms = 0;
    bool was_temporary = false;
    bool operator==(const FileDelete&) const = default;
};

struct FileRename {
    std::string old_path;
    std::string new_path;
    std::optional<std::string> naming_pattern;
    bool operator==(const FileRename&) const = default;
};

struct CrossFileRef {
    std::string src_file;
    std::string target_file;
    std::string ref_type;
    std::int64_t interval_ms = 0;
    bool operator==(const CrossFileRef&) const = default;
};

struct ContextSwitch {
    std::string from_file;
    std::string to_file;
    std::string trigger;
    std::int64_t switch_count = 0;
    bool operator==(const ContextSwitch&) const = default;
};

// Alternative order matches kRetainedTypes.
using ActionData = std::variant<FileRead, FileBrowse, FileSearch, FileWrite, FileEdit, DirCreate,
                                FileCopy, FileMove, FileDelete, FileRename, CrossFileRef,
                                ContextSwitch>;

enum class ActionKind : std::size_t {
    file_read, file_browse, file_search, file_write, file_edit, dir_create,
    file_copy, file_move, file_delete, file_rename, cross_file_ref, context_switch
};

struct AtomicAction {
    std::int64_t ts = 0;
    ActionData data;
    Json extra = Json::object(); // unrecognised payload keys, passed through

    ActionKind kind() const { return static_cast<ActionKind>(data.index()); }
    std::string_view type() const { return kRetainedTypes[data.index()]; }

    template <class T> const T* as() const { return std::get_if<T>(&data); }

    bool operator==(const AtomicAction&) const = default;
};

// Drops the simulation types and the leak fields; decodes the rest into
// typed actions. Throws SchemaError for a retained record that lacks a
// required field or carries a value of the wrong type.
std::vector<AtomicAction> clean_events(std::span<const RawEvent> raw);

RawEvent to_raw(const AtomicAction& action);
std::vector<RawEvent> to_raw(std::span<const AtomicAction> actions);

// Path the action is primarily about (target for copy/move/rename).
std::string primary_path(const AtomicAction& action);

enum class DeltaKind { snapshot, patch };

struct ContentDelta {
    std::string path;
    DeltaKind kind = DeltaKind::snapshot;
    std::string body;
    bool operator==(const ContentDelta&) const = default;
};

std::string_view delta_kind_name(DeltaKind kind);

struct Trajectory {
    std::string profile_id;
    std::string task_id;
    std::vector<AtomicAction> events;
    std::map<std::size_t, ContentDelta> deltas; // keyed by event index

    bool operator==(const Trajectory&) const = default;
};

struct TrajectoryBundle {
    Trajectory trajectory;
    std::map<std::string, std::string> output_files; // final contents by path
    std::map<std::string, std::string> captions;     // media path -> caption text

    bool operator==(const TrajectoryBundle&) const = default;
};

struct Violation {
    std::string invariant;
    std::size_t event_index = 0;
    std::string detail;
    bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_trajectory(const Trajectory& t);
// Trajectory checks plus the output-file provenance rule.
std::vector<Violation> validate_bundle(const TrajectoryBundle& b);

std::string format_violations(std::span<const Violation> violations);

} // namespace fsmem
