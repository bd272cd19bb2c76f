#include "fsmem/engram.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <set>
#include <sstream>

#include "fsmem/errors.hpp"
#include "fsmem/text.hpp"

namespace fsmem {
namespace {

std::string stat_of(const AtomicAction& a, std::string& verb) {
    struct Visitor {
        std::string& verb;
        std::string operator()(const FileRead& e) const {
            verb = "read";
            return "len " + std::to_string(e.length);
        }
        std::string operator()(const FileBrowse& e) const {
            verb = "browse";
            return std::to_string(e.files_listed) + " files";
        }
        std::string operator()(const FileSearch& e) const {
            verb = "search";
            return std::to_string(e.files_matched) + " hits";
        }
        std::string operator()(const FileWrite& e) const {
            verb = e.is_create() ? "create" : "write";
            if (e.media_ref) return "media";
            if (e.is_create()) return e.length ? "len " + std::to_string(*e.length) : "new";
            return e.operation;
        }
        std::string operator()(const FileEdit& e) const {
            verb = "edit";
            return "+" + std::to_string(e.lines_added) + " -" + std::to_string(e.lines_deleted);
        }
        std::string operator()(const DirCreate& e) const {
            verb = "mkdir";
            return "d" + std::to_string(e.depth);
        }
        std::string operator()(const FileCopy& e) const {
            verb = "copy";
            return e.is_backup ? "backup" : "copy";
        }
        std::string operator()(const FileMove& e) const {
            verb = "move";
            return "d" + std::to_string(e.dest_depth);
        }
        std::string operator()(const FileDelete& e) const {
            verb = "delete";
            return e.was_temporary ? "temp" : "age " + std::to_string(e.file_age_ms / 1000) + "s";
        }
        std::string operator()(const FileRename& e) const {
            verb = "rename";
            return e.naming_pattern.value_or("rename");
        }
        std::string operator()(const CrossFileRef& e) const {
            verb = "ref";
            return e.ref_type.empty() ? "link" : e.ref_type;
        }
        std::string operator()(const ContextSwitch& e) const {
            verb = "switch";
            return e.trigger.empty() ? "switch" : e.trigger;
        }
    };
    return std::visit(Visitor{verb}, a.data);
}

const char* verb_noun(ActionKind k) {
    switch (k) {
    case ActionKind::file_read: return "reads";
    case ActionKind::file_browse: return "directory listings";
    case ActionKind::file_search: return "searches";
    case ActionKind::file_write: return "writes";
    case ActionKind::file_edit: return "edits";
    case ActionKind::dir_create: return "folder creations";
    case ActionKind::file_copy: return "copies";
    case ActionKind::file_move: return "moves";
    case ActionKind::file_delete: return "deletions";
    case ActionKind::file_rename: return "renames";
    case ActionKind::cross_file_ref: return "cross-file references";
    case ActionKind::context_switch: return "context switches";
    }
    return "actions";
}

const char* phase_title(ActionKind k) {
    switch (k) {
    case ActionKind::file_read:
    case ActionKind::file_browse:
    case ActionKind::file_search: return "Document survey";
    case ActionKind::file_write: return "Content creation";
    case ActionKind::file_edit: return "Revision";
    case ActionKind::dir_create:
    case ActionKind::file_move:
    case ActionKind::file_rename:
    case ActionKind::file_copy: return "Workspace organization";
    case ActionKind::file_delete: return "Cleanup";
    default: return "Cross-file work";
    }
}

// Extracts the first balanced JSON value that opens with `open`.
std::optional<Json> find_json(std::string_view reply, char open, char close) {
    const auto start = reply.find(open);
    if (start == std::string_view::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < reply.size(); ++i) {
        const char c = reply[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == open) ++depth;
        else if (c == close && --depth == 0) {
            try {
                return Json::parse(reply.substr(start, i - start + 1));
            } catch (const Json::parse_error&) {
                return std::nullopt;
            }
        }
    }
    return std::nullopt;
}

std::string stem_of(std::string_view path) {
    if (auto slash = path.find_last_of('/'); slash != std::string_view::npos) path.remove_prefix(slash + 1);
    if (auto dot = path.find_last_of('.'); dot != std::string_view::npos && dot > 0) path = path.substr(0, dot);
    return std::string(path);
}

bool has_version_tag(std::string_view s) {
    const std::string l = text::lower(s);
    for (std::size_t i = 0; i + 1 < l.size(); ++i) {
        if (l[i] != 'v' || !std::isdigit(static_cast<unsigned char>(l[i + 1]))) continue;
        if (i == 0 || !std::isalpha(static_cast<unsigned char>(l[i - 1]))) return true;
    }
    return false;
}

bool starts_with_date(std::string_view s) {
    auto digits = [&](std::size_t from, std::size_t n) {
        if (from + n > s.size()) return false;
        for (std::size_t i = from; i < from + n; ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    if (digits(0, 8)) return true;
    return digits(0, 4) && s.size() > 4 && (s[4] == '-' || s[4] == '_') && digits(5, 2);
}

std::vector<std::string> produced_paths(const TrajectoryBundle& bundle) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto add = [&](const std::string& p) {
        if (seen.insert(p).second) out.push_back(p);
    };
    for (const auto& a : bundle.trajectory.events) {
        if (const auto* w = a.as<FileWrite>()) add(w->path);
        else if (const auto* c = a.as<FileCopy>()) add(c->dest_path);
    }
    for (const auto& [path, _] : bundle.output_files) add(path);
    return out;
}

} // namespace

double FileMetadata::mean_output_length() const {
    return created_files ? static_cast<double>(output_chars) / static_cast<double>(created_files) : 0.0;
}

std::string render_event_line(const AtomicAction& action) {
    std::string verb;
    std::string stat = text::middle_truncate(stat_of(action, verb), 20);
    const std::size_t overhead = verb.size() + 1 + text::length(stat) + 3;
    const std::size_t budget = kEventLineLimit > overhead ? kEventLineLimit - overhead : 4;
    std::string line = verb;
    line += ' ';
    line += text::middle_truncate(primary_path(action), budget);
    line += " (";
    line += stat;
    line += ')';
    return line;
}

std::string render_timeline(std::span<const AtomicAction> events, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end && i < events.size(); ++i) {
        out += std::to_string(i);
        out += ": ";
        out += render_event_line(events[i]);
        out += '\n';
    }
    return out;
}

std::optional<std::vector<std::size_t>> parse_boundaries(std::string_view reply, std::size_t event_count,
                                                         std::size_t cap) {
    auto doc = find_json(reply, '[', ']');
    if (!doc || !doc->is_array()) return std::nullopt;
    std::vector<std::size_t> out;
    for (const auto& v : *doc) {
        if (!v.is_number_integer()) return std::nullopt;
        if (v.is_number_unsigned() ? false : v.get<std::int64_t>() <= 0) return std::nullopt;
        const auto b = v.get<std::uint64_t>();
        if (b == 0 || b >= event_count) return std::nullopt;
        out.push_back(static_cast<std::size_t>(b));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.size() > cap) out.resize(cap);
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> spans_from_boundaries(std::size_t event_count,
                                                                       std::span<const std::size_t> boundaries,
                                                                       std::size_t min_events) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t start = 0;
    auto push = [&](std::size_t end) {
        if (!spans.empty() && end - start < min_events) spans.back().second = end;
        else spans.emplace_back(start, end);
        start = end;
    };
    for (auto b : boundaries)
        if (b > start && b < event_count) push(b);
    push(event_count);
    if (spans.size() > 1 && spans[0].second - spans[0].first < min_events) {
        spans[1].first = spans[0].first;
        spans.erase(spans.begin());
    }
    return spans;
}

Episode fallback_episode(std::span<const AtomicAction> events, std::size_t begin, std::size_t end) {
    Episode ep;
    ep.begin = begin;
    ep.end = end;
    if (begin >= end) {
        ep.title = "Empty session";
        ep.narrative = "The user performed no file operations in this session. No files were read. "
                       "No files were produced or changed.";
        ep.summary = "The user performed no file operations.";
        return ep;
    }

    std::array<std::size_t, kRetainedTypes.size()> counts{};
    std::set<std::string> paths;
    for (std::size_t i = begin; i < end; ++i) {
        ++counts[events[i].data.index()];
        paths.insert(primary_path(events[i]));
    }
    std::size_t first = 0, second = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        if (counts[k] > counts[first]) first = k;
    second = first == 0 ? 1 : 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        if (k != first && counts[k] > counts[second]) second = k;
    const auto dominant = static_cast<ActionKind>(first);
    const auto runner_up = static_cast<ActionKind>(second);
    const std::size_t n = end - begin;

    std::ostringstream title;
    title << phase_title(dominant) << " (events " << begin << "-" << end - 1 << ")";
    ep.title = title.str();

    std::ostringstream narrative;
    narrative << "The user performed " << n << " file operations between event " << begin << " and event "
              << end - 1 << ". ";
    narrative << "Most of them were " << verb_noun(dominant) << " (" << counts[first] << ")";
    if (counts[second] > 0) narrative << ", followed by " << verb_noun(runner_up) << " (" << counts[second] << ")";
    narrative << ". ";
    narrative << "The session touched " << paths.size() << " distinct paths, starting with "
              << text::middle_truncate(primary_path(events[begin]), 40) << ".";
    ep.narrative = narrative.str();

    std::ostringstream summary;
    summary << "The user mainly carried out " << verb_noun(dominant) << " across " << n << " events.";
    ep.summary = summary.str();
    return ep;
}

std::vector<Episode> segment_episodes(std::span<const AtomicAction> events, CompletionProvider& llm,
                                      std::span<const std::string> previews, const EncoderOptions& options) {
    const std::size_t n = events.size();
    std::vector<std::pair<std::size_t, std::size_t>> spans{{0, n}};

    if (n >= options.min_episode_events) {
        CompletionRequest req;
        req.system = "You segment a user's file-system activity timeline into episodes. An episode is a "
                     "stretch of work with one focus, such as surveying documents or drafting a report.";
        req.user = "Timeline (index: action):\n" + render_timeline(events, 0, n) +
                   "\nIdentify 2 to 5 focus-shift boundaries. Reply with only a JSON array of the event "
                   "indices where a new episode begins, e.g. [4, 11].";
        req.max_output_tokens = 128;
        if (auto reply = try_complete(llm, req)) {
            if (auto bounds = parse_boundaries(*reply, n, options.max_boundaries))
                spans = spans_from_boundaries(n, *bounds, options.min_episode_events);
        }
    }

    std::vector<Episode> out;
    out.reserve(spans.size());
    for (const auto& [begin, end] : spans) {
        Episode ep = fallback_episode(events, begin, end);
        if (begin < end) {
            CompletionRequest req;
            req.system = "You summarize one episode of a user's file-system activity in the third person.";
            req.user = "Episode timeline:\n" + render_timeline(events, begin, end);
            for (std::size_t i = 0; i < previews.size() && i < 3; ++i)
                req.user += "\nContent preview " + std::to_string(i + 1) + ":\n" + text::prefix(previews[i], 300);
            req.user += "\nReply with a JSON object with string fields \"title\" (a few words), \"narrative\" "
                        "(3 to 8 sentences, third person) and \"summary\" (one sentence).";
            req.max_output_tokens = 512;
            if (auto reply = try_complete(llm, req)) {
                auto doc = find_json(*reply, '{', '}');
                auto field = [&](const char* key) -> std::string {
                    if (!doc || !doc->is_object()) return {};
                    auto it = doc->find(key);
                    return it != doc->end() && it->is_string() ? std::string(text::trim(it->get<std::string>())) : "";
                };
                auto title = field("title"), narrative = field("narrative"), summary = field("summary");
                if (!title.empty() && !narrative.empty() && !summary.empty()) {
                    ep.title = std::move(title);
                    ep.narrative = std::move(narrative);
                    ep.summary = std::move(summary);
                }
            }
        }
        out.push_back(std::move(ep));
    }
    return out;
}

std::string classify_naming(std::string_view path) {
    const std::string stem = stem_of(path);
    if (stem.empty()) return "other";
    if (has_version_tag(stem)) return "versioned";
    if (starts_with_date(stem)) return "dated";
    bool upper = false, lower = false, underscore = false, dash = false, space = false, other = false;
    for (unsigned char c : stem) {
        if (std::isupper(c)) upper = true;
        else if (std::islower(c)) lower = true;
        else if (c == '_') underscore = true;
        else if (c == '-') dash = true;
        else if (c == ' ') space = true;
        else if (!std::isdigit(c)) other = true;
    }
    if (space) return "spaced";
    if (other) return "other";
    if (underscore && !dash && !upper) return "snake_case";
    if (dash && !underscore && !upper) return "kebab-case";
    if (!underscore && !dash && upper && lower)
        return std::isupper(static_cast<unsigned char>(stem[0])) ? "PascalCase" : "camelCase";
    if (!underscore && !dash && !upper) return "lowercase";
    return "mixed";
}

std::string detect_script(std::string_view body) {
    std::size_t latin = 0, cjk = 0;
    for (std::size_t i = 0; i < body.size();) {
        const auto c = static_cast<unsigned char>(body[i]);
        std::uint32_t cp = c;
        std::size_t len = 1;
        if (c >= 0xF0) { cp = c & 0x07; len = 4; }
        else if (c >= 0xE0) { cp = c & 0x0F; len = 3; }
        else if (c >= 0xC0) { cp = c & 0x1F; len = 2; }
        for (std::size_t k = 1; k < len && i + k < body.size(); ++k)
            cp = (cp << 6) | (static_cast<unsigned char>(body[i + k]) & 0x3F);
        i += len;
        if (cp < 0x80 && std::isalpha(static_cast<int>(cp))) ++latin;
        else if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0xAC00 && cp <= 0xD7AF))
            ++cjk;
    }
    if (cjk == 0 && latin == 0) return "unknown";
    return cjk > latin ? "cjk" : "latin";
}

FileMetadata extract_metadata(const TrajectoryBundle& bundle, const FingerprintOptions& options) {
    const Trajectory& t = bundle.trajectory;
    FileMetadata m;
    const auto paths = produced_paths(bundle);
    for (const auto& p : paths) {
        const auto ext = file_extension(p);
        ++m.file_types[ext.empty() ? "(none)" : ext];
        ++m.naming[classify_naming(p)];
        if (m.representative_files.size() < 10) m.representative_files.push_back(p);
    }
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const auto* w = t.events[i].as<FileWrite>();
        if (!w || !w->is_create()) continue;
        ++m.created_files;
        m.output_chars += created_length(t, i);
        if (options.image_extensions.count(file_extension(w->path))) continue;
        if (auto d = t.deltas.find(i); d != t.deltas.end()) ++m.languages[detect_script(d->second.body)];
    }
    return m;
}

std::vector<Chunk> extract_chunks(const TrajectoryBundle& bundle, std::size_t chunk_size) {
    const Trajectory& t = bundle.trajectory;
    std::vector<Chunk> out;
    std::map<std::string, std::size_t> next_index;
    std::set<std::string> captioned;
    auto emit = [&](const std::string& source, std::string_view body) {
        for (auto& piece : text::chunk(body, chunk_size))
            out.push_back({source, std::move(piece), next_index[source]++});
    };
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const auto& a = t.events[i];
        if (auto d = t.deltas.find(i); d != t.deltas.end()) {
            const auto* w = a.as<FileWrite>();
            if ((w && w->is_create() && d->second.kind == DeltaKind::snapshot) ||
                (a.kind() == ActionKind::file_edit && d->second.kind == DeltaKind::patch))
                emit(d->second.path, d->second.body);
        }
        if (const auto* w = a.as<FileWrite>()) {
            if (auto c = bundle.captions.find(w->path); c != bundle.captions.end() && captioned.insert(w->path).second)
                emit(w->path, c->second);
        }
    }
    return out;
}

std::string fallback_descriptor(const FileMetadata& m) {
    if (m.file_types.empty() && m.created_files == 0) return std::string(kNoContentDescriptor);

    auto dominant = [](const std::map<std::string, std::size_t>& tally) {
        std::pair<std::string, std::size_t> best{"", 0};
        for (const auto& [k, v] : tally)
            if (v > best.second) best = {k, v};
        return best;
    };
    std::size_t total = 0;
    for (const auto& [_, v] : m.file_types) total += v;
    const auto [type, type_count] = dominant(m.file_types);
    const auto [naming, naming_count] = dominant(m.naming);
    const double mean = m.mean_output_length();
    const char* bucket = mean >= 3000 ? "long, detailed" : mean >= 800 ? "medium-length" : "short, concise";

    std::ostringstream os;
    os << "Produces mostly " << type << " files (" << type_count << " of " << total << "), with " << bucket
       << " outputs averaging " << static_cast<long long>(mean + 0.5) << " characters";
    if (naming_count > 0) os << " and " << naming << " file names";
    os << '.';
    return os.str();
}

SemanticUnit extract_semantic_unit(const TrajectoryBundle& bundle, CompletionProvider& llm,
                                   const EncoderOptions& options) {
    SemanticUnit unit;
    unit.metadata = extract_metadata(bundle, options.fingerprint);
    unit.chunks = extract_chunks(bundle, options.chunk_size);
    unit.descriptor = fallback_descriptor(unit.metadata);
    if (unit.chunks.empty() && unit.metadata.file_types.empty()) return unit;

    CompletionRequest req;
    req.system = "You describe a user's content-production style from the files they produced.";
    req.user = "File metadata:\n" + to_json(unit.metadata).dump(2) + "\n";
    for (std::size_t i = 0; i < unit.chunks.size() && i < 3; ++i)
        req.user += "\nExcerpt from " + unit.chunks[i].source_path + ":\n" + text::prefix(unit.chunks[i].text, 400) + "\n";
    req.user += "\nIn one or two sentences, summarize the user's style, formatting preferences and level of detail.";
    req.max_output_tokens = 200;
    if (auto reply = try_complete(llm, req)) {
        auto trimmed = std::string(text::trim(*reply));
        if (!trimmed.empty()) unit.descriptor = std::move(trimmed);
    }
    return unit;
}

Engram encode_engram(const TrajectoryBundle& bundle, const Providers& providers, const EncoderOptions& options) {
    const Trajectory& t = bundle.trajectory;
    if (auto violations = validate_trajectory(t); !violations.empty()) {
        const auto& v = violations.front();
        throw SchemaError(v.event_index, v.invariant, v.detail);
    }
    if (!providers.completion) throw ConfigError("no completion provider configured");
    CompletionProvider& llm = *providers.completion;

    auto semantic = [&] { return extract_semantic_unit(bundle, llm, options); };
    auto episodic = [&] {
        std::vector<std::string> previews;
        for (const auto& [_, d] : t.deltas) {
            if (previews.size() == 3) break;
            previews.push_back(d.body);
        }
        return segment_episodes(t.events, llm, previews, options);
    };

    Engram e;
    e.profile_id = t.profile_id;
    e.task_id = t.task_id;
    if (options.parallel) {
        auto sem = std::async(std::launch::async, semantic);
        auto epi = std::async(std::launch::async, episodic);
        e.procedural = compute_fingerprint(t, options.fingerprint);
        e.semantic = sem.get();
        e.episodic = epi.get();
    } else {
        e.procedural = compute_fingerprint(t, options.fingerprint);
        e.semantic = semantic();
        e.episodic = episodic();
    }
    return e;
}

Json to_json(const FileMetadata& m) {
    Json j = Json::object();
    j["languages"] = m.languages;
    j["file_types"] = m.file_types;
    j["naming"] = m.naming;
    j["representative_files"] = m.representative_files;
    j["created_files"] = m.created_files;
    j["output_chars"] = m.output_chars;
    return j;
}

FileMetadata metadata_from_json(const Json& j) {
    FileMetadata m;
    m.languages = j.at("languages").get<std::map<std::string, std::size_t>>();
    m.file_types = j.at("file_types").get<std::map<std::string, std::size_t>>();
    m.naming = j.at("naming").get<std::map<std::string, std::size_t>>();
    m.representative_files = j.at("representative_files").get<std::vector<std::string>>();
    m.created_files = j.at("created_files").get<std::size_t>();
    m.output_chars = j.at("output_chars").get<std::int64_t>();
    return m;
}

Json to_json(const Episode& e) {
    Json j = Json::object();
    j["begin"] = e.begin;
    j["end"] = e.end;
    j["title"] = e.title;
    j["narrative"] = e.narrative;
    j["summary"] = e.summary;
    return j;
}

Episode episode_from_json(const Json& j) {
    Episode e;
    e.begin = j.at("begin").get<std::size_t>();
    e.end = j.at("end").get<std::size_t>();
    e.title = j.at("title").get<std::string>();
    e.narrative = j.at("narrative").get<std::string>();
    e.summary = j.at("summary").get<std::string>();
    return e;
}

Json to_json(const Engram& e) {
    Json j = Json::object();
    j["format_version"] = kFingerprintVersion;
    j["profile_id"] = e.profile_id;
    j["task_id"] = e.task_id;
    j["procedural"] = to_json(e.procedural);
    Json sem = Json::object();
    sem["metadata"] = to_json(e.semantic.metadata);
    sem["descriptor"] = e.semantic.descriptor;
    Json chunks = Json::array();
    for (const auto& c : e.semantic.chunks)
        chunks.push_back({{"source_path", c.source_path}, {"chunk_index", c.chunk_index}, {"text", c.text}});
    sem["chunks"] = std::move(chunks);
    j["semantic"] = std::move(sem);
    Json episodes = Json::array();
    for (const auto& ep : e.episodic) episodes.push_back(to_json(ep));
    j["episodic"] = std::move(episodes);
    return j;
}

Engram engram_from_json(const Json& j) {
    try {
        if (j.at("format_version").get<int>() != kFingerprintVersion)
            throw InputError("unsupported engram format version");
        Engram e;
        e.profile_id = j.at("profile_id").get<std::string>();
        e.task_id = j.at("task_id").get<std::string>();
        e.procedural = fingerprint_from_json(j.at("procedural"));
        const auto& sem = j.at("semantic");
        e.semantic.metadata = metadata_from_json(sem.at("metadata"));
        e.semantic.descriptor = sem.at("descriptor").get<std::string>();
        for (const auto& c : sem.at("chunks"))
            e.semantic.chunks.push_back({c.at("source_path").get<std::string>(), c.at("text").get<std::string>(),
                                         c.at("chunk_index").get<std::size_t>()});
        for (const auto& ep : j.at("episodic")) e.episodic.push_back(episode_from_json(ep));
        return e;
    } catch (const Json::exception& ex) {
        throw InputError(std::string("malformed engram: ") + ex.what());
    }
}

} // namespace fsmem
