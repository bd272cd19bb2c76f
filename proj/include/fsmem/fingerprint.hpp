#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "fsmem/events.hpp"

namespace fsmem {

// Canonical feature order. Vectorization, serialization and statistics all
// index by this enum; reordering it is a format change.
enum class FeatureKey : std::size_t {
    search_ratio,
    browse_ratio,
    revisit_ratio,
    avg_output_length,
    files_created,
    total_output_chars,
    dirs_created,
    max_dir_depth,
    files_moved,
    total_edits,
    avg_lines_changed,
    small_edit_ratio,
    total_deletes,
    delete_to_create,
    structured_files,
    md_table_rows,
    image_files,
};

inline constexpr std::size_t kFeatureCount = 17;
inline constexpr int kFingerprintVersion = 1;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "search_ratio",   "browse_ratio",      "revisit_ratio",    "avg_output_length",
    "files_created",  "total_output_chars", "dirs_created",    "max_dir_depth",
    "files_moved",    "total_edits",       "avg_lines_changed", "small_edit_ratio",
    "total_deletes",  "delete_to_create",  "structured_files", "md_table_rows",
    "image_files"};

inline constexpr std::array<FeatureKey, kFeatureCount> kAllFeatures = [] {
    std::array<FeatureKey, kFeatureCount> keys{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) keys[i] = static_cast<FeatureKey>(i);
    return keys;
}();

constexpr std::size_t index_of(FeatureKey k) { return static_cast<std::size_t>(k); }
std::string_view feature_name(FeatureKey k);
std::optional<FeatureKey> feature_from_name(std::string_view name);

using FeatureVector = std::array<double, kFeatureCount>;

struct Fingerprint {
    FeatureVector values{};

    double& operator[](FeatureKey k) { return values[index_of(k)]; }
    double operator[](FeatureKey k) const { return values[index_of(k)]; }

    bool operator==(const Fingerprint&) const = default;
};

struct FingerprintOptions {
    std::set<std::string> structured_extensions{"csv", "tsv", "json", "xlsx", "xls",
                                                "yaml", "yml", "toml", "xml"};
    std::set<std::string> image_extensions{"png", "jpg", "jpeg", "svg", "gif"};
    std::size_t small_edit_lines = 10; // edits with added+deleted below this are "small"
};

// Deterministic counting over the trajectory's atomic actions. Ratios and
// means with an empty denominator are 0.
Fingerprint compute_fingerprint(const Trajectory& t, const FingerprintOptions& options = {});

FeatureVector to_vector(const Fingerprint& fp);
Fingerprint from_vector(const FeatureVector& v);

// Flat map of the 17 canonical keys.
Json to_json(const Fingerprint& fp);
Fingerprint fingerprint_from_json(const Json& j);

// Lower-cased extension after the last '.' of the final path component.
std::string file_extension(std::string_view path);

// Lines that, once trimmed, both start and end with '|'.
std::size_t count_table_rows(std::string_view text);

// Characters of content produced by a create: the event's recorded length
// when present, else the snapshot body length, else 0.
std::int64_t created_length(const Trajectory& t, std::size_t event_index);

} // namespace fsmem
