#include "fsmem/events.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "fsmem/errors.hpp"

namespace fsmem {
namespace {

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view tag) {
    return std::find(set.begin(), set.end(), tag) != set.end();
}

bool is_leak_field(std::string_view key) { return contains(kLeakFields, key); }

// Reads typed fields from one payload object and remembers which keys it
// consumed so the remainder can be passed through untouched.
class FieldReader {
public:
    FieldReader(const Json& payload, std::size_t index) : payload_(payload), index_(index) {}

    std::string required_string(const std::string& key) {
        const Json* v = find(key);
        if (!v) throw SchemaError(index_, key, "required field missing");
        return as_string(key, *v);
    }

    std::string string_or(const std::string& key, std::string fallback = {}) {
        const Json* v = find(key);
        return v ? as_string(key, *v) : fallback;
    }

    std::optional<std::string> maybe_string(const std::string& key) {
        const Json* v = find(key);
        if (!v) return std::nullopt;
        return as_string(key, *v);
    }

    std::int64_t required_count(const std::string& key) {
        const Json* v = find(key);
        if (!v) throw SchemaError(index_, key, "required field missing");
        return as_count(key, *v);
    }

    std::int64_t count_or(const std::string& key, std::int64_t fallback = 0) {
        const Json* v = find(key);
        return v ? as_count(key, *v) : fallback;
    }

    std::optional<std::int64_t> maybe_count(const std::string& key) {
        const Json* v = find(key);
        if (!v) return std::nullopt;
        return as_count(key, *v);
    }

    bool bool_or(const std::string& key, bool fallback = false) {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw SchemaError(index_, key, "expected boolean");
        return v->get<bool>();
    }

    Json leftovers() const {
        Json out = Json::object();
        for (const auto& [key, value] : payload_.items()) {
            if (used_.count(key) || is_leak_field(key)) continue;
            out[key] = value;
        }
        return out;
    }

private:
    const Json* find(const std::string& key) {
        used_.insert(key);
        auto it = payload_.find(key);
        if (it == payload_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    std::string as_string(const std::string& key, const Json& v) const {
        if (!v.is_string()) throw SchemaError(index_, key, "expected string");
        return v.get<std::string>();
    }

    std::int64_t as_count(const std::string& key, const Json& v) const {
        if (!v.is_number_integer()) throw SchemaError(index_, key, "expected integer");
        if (v.is_number_unsigned()) {
            if (v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
                throw SchemaError(index_, key, "integer out of range");
            return static_cast<std::int64_t>(v.get<std::uint64_t>());
        }
        const auto n = v.get<std::int64_t>();
        if (n < 0) throw SchemaError(index_, key, "must be non-negative");
        return n;
    }

    const Json& payload_;
    std::size_t index_;
    std::set<std::string> used_;
};

ActionData decode(std::string_view type, FieldReader& r) {
    if (type == "file_read") {
        FileRead a;
        a.path = r.required_string("path");
        a.file_type = r.string_or("file_type");
        a.depth = r.count_or("depth");
        a.view_count = r.count_or("view_count", 1);
        a.view_range = r.maybe_string("view_range");
        a.length = r.count_or("length");
        a.revisit_ms = r.count_or("revisit_ms");
        return a;
    }
    if (type == "file_browse") {
        FileBrowse a;
        a.dir_path = r.required_string("dir_path");
        a.files_listed = r.count_or("files_listed");
        a.depth = r.count_or("depth");
        return a;
    }
    if (type == "file_search") {
        FileSearch a;
        a.search_type = r.string_or("search_type");
        a.query = r.required_string("query");
        a.files_matched = r.count_or("files_matched");
        a.files_opened = r.count_or("files_opened");
        return a;
    }
    if (type == "file_write") {
        FileWrite a;
        a.path = r.required_string("path");
        a.file_type = r.string_or("file_type");
        a.operation = r.required_string("operation");
        a.length = r.maybe_count("length");
        a.before_hash = r.maybe_string("before_hash");
        a.after_hash = r.maybe_string("after_hash");
        a.media_ref = r.maybe_string("media_ref");
        return a;
    }
    if (type == "file_edit") {
        FileEdit a;
        a.path = r.required_string("path");
        a.tool = r.string_or("tool");
        a.lines_added = r.required_count("lines_added");
        a.lines_deleted = r.required_count("lines_deleted");
        a.lines_modified = r.count_or("lines_modified");
        a.diff = r.maybe_string("diff");
        a.before_hash = r.maybe_string("before_hash");
        a.after_hash = r.maybe_string("after_hash");
        return a;
    }
    if (type == "dir_create") {
        DirCreate a;
        a.dir_path = r.required_string("dir_path");
        a.depth = r.required_count("depth");
        a.sibling_count = r.count_or("sibling_count");
        return a;
    }
    if (type == "file_copy") {
        FileCopy a;
        a.src_path = r.required_string("src_path");
        a.dest_path = r.required_string("dest_path");
        a.is_backup = r.bool_or("is_backup");
        return a;
    }
    if (type == "file_move") {
        FileMove a;
        a.old_path = r.required_string("old_path");
        a.new_path = r.required_string("new_path");
        a.dest_depth = r.count_or("dest_depth");
        return a;
    }
    if (type == "file_delete") {
        FileDelete a;
        a.path = r.required_string("path");
        a.file_age_ms = r.count_or("file_age_ms");
        a.was_temporary = r.bool_or("was_temporary");
        return a;
    }
    if (type == "file_rename") {
        FileRename a;
        a.old_path = r.required_string("old_path");
        a.new_path = r.required_string("new_path");
        a.naming_pattern = r.maybe_string("naming_pattern");
        return a;
    }
    if (type == "cross_file_ref") {
        CrossFileRef a;
        a.src_file = r.required_string("src_file");
        a.target_file = r.required_string("target_file");
        a.ref_type = r.string_or("ref_type");
        a.interval_ms = r.count_or("interval_ms");
        return a;
    }
    ContextSwitch a;
    a.from_file = r.required_string("from_file");
    a.to_file = r.required_string("to_file");
    a.trigger = r.string_or("trigger");
    a.switch_count = r.count_or("switch_count");
    return a;
}

template <class T>
void put(Json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

struct Encoder {
    Json& j;
    void operator()(const FileRead& a) const {
        j["path"] = a.path;
        j["file_type"] = a.file_type;
        j["depth"] = a.depth;
        j["view_count"] = a.view_count;
        put(j, "view_range", a.view_range);
        j["length"] = a.length;
        j["revisit_ms"] = a.revisit_ms;
    }
    void operator()(const FileBrowse& a) const {
        j["dir_path"] = a.dir_path;
        j["files_listed"] = a.files_listed;
        j["depth"] = a.depth;
    }
    void operator()(const FileSearch& a) const {
        j["search_type"] = a.search_type;
        j["query"] = a.query;
        j["files_matched"] = a.files_matched;
        j["files_opened"] = a.files_opened;
    }
    void operator()(const FileWrite& a) const {
        j["path"] = a.path;
        j["file_type"] = a.file_type;
        j["operation"] = a.operation;
        put(j, "length", a.length);
        put(j, "before_hash", a.before_hash);
        put(j, "after_hash", a.after_hash);
        put(j, "media_ref", a.media_ref);
    }
    void operator()(const FileEdit& a) const {
        j["path"] = a.path;
        j["tool"] = a.tool;
        j["lines_added"] = a.lines_added;
        j["lines_deleted"] = a.lines_deleted;
        j["lines_modified"] = a.lines_modified;
        put(j, "diff", a.diff);
        put(j, "before_hash", a.before_hash);
        put(j, "after_hash", a.after_hash);
    }
    void operator()(const DirCreate& a) const {
        j["dir_path"] = a.dir_path;
        j["depth"] = a.depth;
        j["sibling_count"] = a.sibling_count;
    }
    void operator()(const FileCopy& a) const {
        j["src_path"] = a.src_path;
        j["dest_path"] = a.dest_path;
        j["is_backup"] = a.is_backup;
    }
    void operator()(const FileMove& a) const {
        j["old_path"] = a.old_path;
        j["new_path"] = a.new_path;
        j["dest_depth"] = a.dest_depth;
    }
    void operator()(const FileDelete& a) const {
        j["path"] = a.path;
        j["file_age_ms"] = a.file_age_ms;
        j["was_temporary"] = a.was_temporary;
    }
    void operator()(const FileRename& a) const {
        j["old_path"] = a.old_path;
        j["new_path"] = a.new_path;
        put(j, "naming_pattern", a.naming_pattern);
    }
    void operator()(const CrossFileRef& a) const {
        j["src_file"] = a.src_file;
        j["target_file"] = a.target_file;
        j["ref_type"] = a.ref_type;
        j["interval_ms"] = a.interval_ms;
    }
    void operator()(const ContextSwitch& a) const {
        j["from_file"] = a.from_file;
        j["to_file"] = a.to_file;
        j["trigger"] = a.trigger;
        j["switch_count"] = a.switch_count;
    }
};

} // namespace

bool is_known_type(std::string_view tag) {
    return contains(kRetainedTypes, tag) || contains(kSimulationTypes, tag);
}

bool is_retained_type(std::string_view tag) { return contains(kRetainedTypes, tag); }

std::vector<RawEvent> parse_event_log(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(ParseError::npos, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError(ParseError::npos, "top-level value must be an array");

    std::vector<RawEvent> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const Json& rec = doc[i];
        if (!rec.is_object()) throw ParseError(i, "record is not an object");
        auto ts = rec.find("ts");
        if (ts == rec.end() || !ts->is_number_integer())
            throw ParseError(i, "missing or non-integer 'ts'");
        if (ts->is_number_unsigned() ? ts->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)
                                     : ts->get<std::int64_t>() < 0)
            throw ParseError(i, "'ts' out of range");
        auto type = rec.find("type");
        if (type == rec.end() || !type->is_string()) throw ParseError(i, "missing or non-string 'type'");
        const auto tag = type->get<std::string>();
        if (!is_known_type(tag)) throw ParseError(i, "unknown event type '" + tag + "'");

        RawEvent ev;
        ev.ts = ts->get<std::int64_t>();
        ev.type = tag;
        for (const auto& [key, value] : rec.items())
            if (key != "ts" && key != "type") ev.payload[key] = value;
        out.push_back(std::move(ev));
    }
    return out;
}

std::string serialize_event_log(std::span<const RawEvent> events) {
    std::string out = "[";
    for (std::size_t i = 0; i < events.size(); ++i) {
        Json rec = Json::object();
        rec["ts"] = events[i].ts;
        rec["type"] = events[i].type;
        for (const auto& [key, value] : events[i].payload.items()) rec[key] = value;
        out += i == 0 ? "\n  " : ",\n  ";
        out += rec.dump(-1, ' ', false, Json::error_handler_t::strict);
    }
    out += events.empty() ? "]\n" : "\n]\n";
    return out;
}

std::vector<AtomicAction> clean_events(std::span<const RawEvent> raw) {
    std::vector<AtomicAction> out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const RawEvent& ev = raw[i];
        if (!is_retained_type(ev.type)) {
            if (!is_known_type(ev.type)) throw SchemaError(i, "type", "unknown event type '" + ev.type + "'");
            continue;
        }
        const Json payload = ev.payload.is_object() ? ev.payload : Json::object();
        FieldReader reader(payload, i);
        AtomicAction action;
        action.ts = ev.ts;
        action.data = decode(ev.type, reader);
        action.extra = reader.leftovers();
        out.push_back(std::move(action));
    }
    return out;
}

RawEvent to_raw(const AtomicAction& action) {
    RawEvent ev;
    ev.ts = action.ts;
    ev.type = std::string(action.type());
    std::visit(Encoder{ev.payload}, action.data);
    for (const auto& [key, value] : action.extra.items())
        if (!ev.payload.contains(key)) ev.payload[key] = value;
    return ev;
}

std::vector<RawEvent> to_raw(std::span<const AtomicAction> actions) {
    std::vector<RawEvent> out;
    out.reserve(actions.size());
    for (const auto& a : actions) out.push_back(to_raw(a));
    return out;
}

std::string primary_path(const AtomicAction& action) {
    struct Visitor {
        std::string operator()(const FileRead& a) const { return a.path; }
        std::string operator()(const FileBrowse& a) const { return a.dir_path; }
        std::string operator()(const FileSearch& a) const { return a.query; }
        std::string operator()(const FileWrite& a) const { return a.path; }
        std::string operator()(const FileEdit& a) const { return a.path; }
        std::string operator()(const DirCreate& a) const { return a.dir_path; }
        std::string operator()(const FileCopy& a) const { return a.dest_path; }
        std::string operator()(const FileMove& a) const { return a.new_path; }
        std::string operator()(const FileDelete& a) const { return a.path; }
        std::string operator()(const FileRename& a) const { return a.new_path; }
        std::string operator()(const CrossFileRef& a) const { return a.src_file; }
        std::string operator()(const ContextSwitch& a) const { return a.to_file; }
    };
    return std::visit(Visitor{}, action.data);
}

std::string_view delta_kind_name(DeltaKind kind) {
    return kind == DeltaKind::snapshot ? "snapshot" : "patch";
}

std::vector<Violation> validate_trajectory(const Trajectory& t) {
    std::vector<Violation> out;
    const auto& ev = t.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (ev[i].ts < 0) out.push_back({"negative timestamp", i, std::to_string(ev[i].ts)});
        if (i > 0 && ev[i].ts < ev[i - 1].ts)
            out.push_back({"non-monotonic timestamp", i,
                           std::to_string(ev[i - 1].ts) + " -> " + std::to_string(ev[i].ts)});

        const bool has_delta = t.deltas.count(i) > 0;
        if (const auto* w = ev[i].as<FileWrite>(); w && w->is_create() && !w->media_ref && !has_delta)
            out.push_back({"missing delta", i, "file_write(create) of " + w->path + " has no snapshot"});
        if (const auto* e = ev[i].as<FileEdit>(); e && !e->diff && !has_delta)
            out.push_back({"missing delta", i, "file_edit of " + e->path + " has no patch"});
    }
    for (const auto& [index, delta] : t.deltas) {
        if (index >= ev.size()) {
            out.push_back({"delta index out of range", index, delta.path});
            continue;
        }
        const auto* w = ev[index].as<FileWrite>();
        const bool is_create = w && w->is_create();
        const bool is_edit = ev[index].kind() == ActionKind::file_edit;
        if (!is_create && !is_edit) {
            out.push_back({"delta on non-content event", index, std::string(ev[index].type())});
        } else if ((is_create && delta.kind != DeltaKind::snapshot) ||
                   (is_edit && delta.kind != DeltaKind::patch)) {
            out.push_back({"delta kind mismatch", index, std::string(delta_kind_name(delta.kind))});
        }
    }
    return out;
}

std::vector<Violation> validate_bundle(const TrajectoryBundle& b) {
    auto out = validate_trajectory(b.trajectory);
    std::set<std::string> targeted;
    for (const auto& a : b.trajectory.events) {
        if (const auto* w = a.as<FileWrite>()) targeted.insert(w->path);
        else if (const auto* e = a.as<FileEdit>()) targeted.insert(e->path);
        else if (const auto* c = a.as<FileCopy>()) targeted.insert(c->dest_path);
        else if (const auto* m = a.as<FileMove>()) targeted.insert(m->new_path);
        else if (const auto* r = a.as<FileRename>()) targeted.insert(r->new_path);
    }
    for (const auto& [path, _] : b.output_files)
        if (!targeted.count(path))
            out.push_back({"untargeted output file", b.trajectory.events.size(), path});
    return out;
}

std::string format_violations(std::span<const Violation> violations) {
    std::ostringstream os;
    for (const auto& v : violations)
        os << v.invariant << " at event " << v.event_index << ": " << v.detail << '\n';
    return os.str();
}

} // namespace fsmem
