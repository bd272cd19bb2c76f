#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fsmem/consolidator.hpp"
#include "fsmem/dimensions.hpp"
#include "fsmem/providers.hpp"

namespace fsmem {

enum class Channel { procedural, semantic, episodic };
std::optional<Channel> channel_from_name(std::string_view name); // proc|sem|epi or full names

struct Query {
    std::string text;
    std::vector<Dimension> dimensions; // explicit targets; empty means "infer from text"
};

// Keyword lexicon lookup; all six dimensions when nothing matches.
std::vector<Dimension> extract_target_dimensions(const Query& q);

struct ScoredChunk {
    std::string source_path;
    std::string text;
    std::size_t trajectory_index = 0;
    std::size_t chunk_index = 0;
    double score = 0.0;
};

struct ScoredEpisode {
    std::size_t trajectory_index = 0;
    std::string task_id;
    std::string title;
    std::string narrative;
    std::size_t cluster = 0;
    double score = 0.0;
};

struct ModeSummary {
    std::vector<std::string> task_ids;
};

struct AnomalyEntry {
    std::size_t trajectory_index = 0;
    std::string task_id;
    double delta = 0.0;
    std::vector<FeatureDeviation> top_features;
    std::optional<AnomalyVerdict> verdict;
};

struct ProceduralBlock {
    std::size_t trajectory_count = 0;
    std::vector<Dimension> targets;
    std::vector<TierEvidence> tiers; // all six, targets first
    FeatureStats stats;
};

struct SemanticBlock {
    FileMetadata metadata;
    std::string summary;
    std::vector<ScoredChunk> chunks; // score non-increasing
};

struct EpisodicBlock {
    std::vector<ModeSummary> modes;
    std::size_t episode_cluster_count = 0;
    double threshold = 0.0;
    std::vector<AnomalyEntry> anomalies;
    std::vector<ScoredEpisode> episodes; // score non-increasing
};

// Absent blocks are channels disabled for this query.
struct RetrievalContext {
    std::optional<ProceduralBlock> procedural;
    std::optional<SemanticBlock> semantic;
    std::optional<EpisodicBlock> episodic;
};

struct RetrievalOptions {
    std::size_t top_k = 5;
    std::set<Channel> disabled;
};

// Throws ConfigError when the embedder does not match the store's index.
RetrievalContext retrieve_context(const MemoryStore& store, const Query& q, Embedder& embedder,
                                  const RetrievalOptions& options = {});

inline constexpr std::size_t kFilenameLimit = 40;
inline constexpr std::string_view kTruncationMarker = " [...]";

std::string render_preview(std::string_view text, std::size_t display_limit);

inline constexpr std::string_view kProceduralHeading = "## Procedural Patterns";
inline constexpr std::string_view kSemanticHeading = "## Semantic Content";
inline constexpr std::string_view kEpisodicHeading = "## Episodic Consistency";

// Markdown sections in fixed order: procedural, semantic, episodic.
std::string render_context(const RetrievalContext& ctx, std::size_t display_limit = 800);

// Prompt for the answer stage: the rendered memory followed by the question.
CompletionRequest answer_prompt(std::string_view rendered_context, std::string_view question);

} // namespace fsmem
