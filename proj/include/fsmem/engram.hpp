#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsmem/events.hpp"
#include "fsmem/fingerprint.hpp"
#include "fsmem/providers.hpp"

namespace fsmem {

inline constexpr std::size_t kEventLineLimit = 60;

struct FileMetadata {
    std::map<std::string, std::size_t> languages;  // script class of produced text
    std::map<std::string, std::size_t> file_types; // extension tally
    std::map<std::string, std::size_t> naming;     // naming-convention tally
    std::vector<std::string> representative_files; // at most 10, first-seen order
    std::size_t created_files = 0;
    std::int64_t output_chars = 0;

    double mean_output_length() const;
    bool operator==(const FileMetadata&) const = default;
};

struct Chunk {
    std::string source_path;
    std::string text;
    std::size_t chunk_index = 0; // position within its source
    bool operator==(const Chunk&) const = default;
};

struct SemanticUnit {
    FileMetadata metadata;
    std::string descriptor;
    std::vector<Chunk> chunks;
    bool operator==(const SemanticUnit&) const = default;
};

// Half-open event span [begin, end). An empty trajectory has one episode
// with begin == end == 0.
struct Episode {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string title;
    std::string narrative;
    std::string summary;

    std::size_t size() const { return end - begin; }
    bool operator==(const Episode&) const = default;
};

struct Engram {
    std::string profile_id;
    std::string task_id;
    Fingerprint procedural;
    SemanticUnit semantic;
    std::vector<Episode> episodic;
    bool operator==(const Engram&) const = default;
};

struct EncoderOptions {
    std::size_t chunk_size = 800;
    std::size_t max_boundaries = 4;
    std::size_t min_episode_events = 3;
    bool parallel = true; // run the three extraction streams concurrently
    FingerprintOptions fingerprint;
};

// "<verb> <path> (<stat>)", at most kEventLineLimit characters.
std::string render_event_line(const AtomicAction& action);
std::string render_timeline(std::span<const AtomicAction> events, std::size_t begin, std::size_t end);

// Validated interior boundaries from a provider reply: a JSON integer array
// somewhere in the text, every value in (0, event_count), sorted,
// deduplicated and capped. nullopt if anything fails validation.
std::optional<std::vector<std::size_t>> parse_boundaries(std::string_view reply, std::size_t event_count,
                                                         std::size_t cap = 4);

// Segment spans from boundaries, merging segments shorter than
// `min_events` into the preceding one (the first into its successor).
std::vector<std::pair<std::size_t, std::size_t>> spans_from_boundaries(std::size_t event_count,
                                                                       std::span<const std::size_t> boundaries,
                                                                       std::size_t min_events = 3);

std::vector<Episode> segment_episodes(std::span<const AtomicAction> events, CompletionProvider& llm,
                                      std::span<const std::string> previews = {},
                                      const EncoderOptions& options = {});

// Deterministic title / narrative / summary for a span.
Episode fallback_episode(std::span<const AtomicAction> events, std::size_t begin, std::size_t end);

std::string classify_naming(std::string_view path);
std::string detect_script(std::string_view body);

FileMetadata extract_metadata(const TrajectoryBundle& bundle, const FingerprintOptions& options = {});
std::vector<Chunk> extract_chunks(const TrajectoryBundle& bundle, std::size_t chunk_size = 800);

inline constexpr std::string_view kNoContentDescriptor = "no produced content observed";
std::string fallback_descriptor(const FileMetadata& metadata);

SemanticUnit extract_semantic_unit(const TrajectoryBundle& bundle, CompletionProvider& llm,
                                   const EncoderOptions& options = {});

// Throws SchemaError when the bundle's trajectory fails validation.
// Provider failures degrade to the fallbacks above.
Engram encode_engram(const TrajectoryBundle& bundle, const Providers& providers,
                     const EncoderOptions& options = {});

Json to_json(const FileMetadata& m);
FileMetadata metadata_from_json(const Json& j);
Json to_json(const Episode& e);
Episode episode_from_json(const Json& j);
Json to_json(const Engram& e);
Engram engram_from_json(const Json& j);

} // namespace fsmem
