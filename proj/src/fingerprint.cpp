#include "fsmem/fingerprint.hpp"

#include <algorithm>

#include "fsmem/errors.hpp"
#include "fsmem/text.hpp"

namespace fsmem {
namespace {

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

} // namespace

std::string_view feature_name(FeatureKey k) { return kFeatureNames[index_of(k)]; }

std::optional<FeatureKey> feature_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (kFeatureNames[i] == name) return static_cast<FeatureKey>(i);
    return std::nullopt;
}

std::string file_extension(std::string_view path) {
    const auto slash = path.find_last_of('/');
    if (slash != std::string_view::npos) path.remove_prefix(slash + 1);
    const auto dot = path.find_last_of('.');
    if (dot == std::string_view::npos || dot + 1 == path.size()) return {};
    return text::lower(path.substr(dot + 1));
}

std::size_t count_table_rows(std::string_view body) {
    std::size_t rows = 0;
    for (auto line : text::split_lines(body)) {
        line = text::trim(line);
        if (line.size() >= 2 && line.front() == '|' && line.back() == '|') ++rows;
    }
    return rows;
}

std::int64_t created_length(const Trajectory& t, std::size_t event_index) {
    const auto* w = t.events[event_index].as<FileWrite>();
    if (w && w->length) return *w->length;
    auto it = t.deltas.find(event_index);
    if (it == t.deltas.end()) return 0;
    return static_cast<std::int64_t>(text::length(it->second.body));
}

Fingerprint compute_fingerprint(const Trajectory& t, const FingerprintOptions& options) {
    std::size_t reads = 0, browses = 0, searches = 0, revisits = 0;
    std::size_t creates = 0, structured = 0, images = 0, table_rows = 0;
    std::int64_t output_chars = 0;
    std::size_t dirs = 0, moves = 0, edits = 0, small_edits = 0, deletes = 0;
    std::int64_t max_depth = 0, lines_changed = 0;

    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const AtomicAction& a = t.events[i];
        switch (a.kind()) {
        case ActionKind::file_read:
            ++reads;
            if (a.as<FileRead>()->view_count > 1) ++revisits;
            break;
        case ActionKind::file_browse: ++browses; break;
        case ActionKind::file_search: ++searches; break;
        case ActionKind::file_write: {
            const auto* w = a.as<FileWrite>();
            if (!w->is_create()) break;
            ++creates;
            output_chars += created_length(t, i);
            const auto ext = file_extension(w->path);
            if (options.structured_extensions.count(ext)) ++structured;
            if (options.image_extensions.count(ext)) ++images;
            if (auto d = t.deltas.find(i); d != t.deltas.end() && d->second.kind == DeltaKind::snapshot)
                table_rows += count_table_rows(d->second.body);
            break;
        }
        case ActionKind::file_edit: {
            const auto* e = a.as<FileEdit>();
            ++edits;
            const auto delta = e->lines_added + e->lines_deleted;
            lines_changed += delta;
            if (delta < static_cast<std::int64_t>(options.small_edit_lines)) ++small_edits;
            break;
        }
        case ActionKind::dir_create:
            ++dirs;
            max_depth = std::max(max_depth, a.as<DirCreate>()->depth);
            break;
        case ActionKind::file_move: ++moves; break;
        case ActionKind::file_delete: ++deletes; break;
        default: break;
        }
    }

    const double consumption = static_cast<double>(reads + browses + searches);
    Fingerprint fp;
    fp[FeatureKey::search_ratio] = ratio(static_cast<double>(searches), consumption);
    fp[FeatureKey::browse_ratio] = ratio(static_cast<double>(browses), consumption);
    fp[FeatureKey::revisit_ratio] = ratio(static_cast<double>(revisits), static_cast<double>(reads));
    fp[FeatureKey::avg_output_length] = ratio(static_cast<double>(output_chars), static_cast<double>(creates));
    fp[FeatureKey::files_created] = static_cast<double>(creates);
    fp[FeatureKey::total_output_chars] = static_cast<double>(output_chars);
    fp[FeatureKey::dirs_created] = static_cast<double>(dirs);
    fp[FeatureKey::max_dir_depth] = static_cast<double>(max_depth);
    fp[FeatureKey::files_moved] = static_cast<double>(moves);
    fp[FeatureKey::total_edits] = static_cast<double>(edits);
    fp[FeatureKey::avg_lines_changed] = ratio(static_cast<double>(lines_changed), static_cast<double>(edits));
    fp[FeatureKey::small_edit_ratio] = ratio(static_cast<double>(small_edits), static_cast<double>(edits));
    fp[FeatureKey::total_deletes] = static_cast<double>(deletes);
    fp[FeatureKey::delete_to_create] = ratio(static_cast<double>(deletes), static_cast<double>(creates));
    fp[FeatureKey::structured_files] = static_cast<double>(structured);
    fp[FeatureKey::md_table_rows] = static_cast<double>(table_rows);
    fp[FeatureKey::image_files] = static_cast<double>(images);
    return fp;
}

FeatureVector to_vector(const Fingerprint& fp) { return fp.values; }

Fingerprint from_vector(const FeatureVector& v) { return Fingerprint{v}; }

Json to_json(const Fingerprint& fp) {
    Json j = Json::object();
    for (auto k : kAllFeatures) j[std::string(feature_name(k))] = fp[k];
    return j;
}

Fingerprint fingerprint_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("fingerprint must be a JSON object");
    Fingerprint fp;
    for (auto k : kAllFeatures) {
        const auto name = std::string(feature_name(k));
        auto it = j.find(name);
        if (it == j.end() || !it->is_number()) throw InputError("fingerprint missing feature '" + name + "'");
        fp[k] = it->get<double>();
    }
    return fp;
}

} // namespace fsmem
