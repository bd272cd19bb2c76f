#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsmem/clustering.hpp"
#include "fsmem/dimensions.hpp"
#include "fsmem/engram.hpp"
#include "fsmem/fingerprint.hpp"
#include "fsmem/providers.hpp"

namespace fsmem {

struct SummaryStats {
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0; // population
    double min = 0.0;
    double max = 0.0;
    bool operator==(const SummaryStats&) const = default;
};

struct FeatureStats {
    std::array<SummaryStats, kFeatureCount> features{};

    const SummaryStats& operator[](FeatureKey k) const { return features[index_of(k)]; }
    SummaryStats& operator[](FeatureKey k) { return features[index_of(k)]; }
    bool operator==(const FeatureStats&) const = default;
};

SummaryStats summarize(std::span<const double> values);
// Throws InputError on an empty list.
FeatureStats aggregate_procedural(std::span<const Fingerprint> fps);

// Session deviation scores: per-feature z-scores against the corpus, the
// distance of each z-row from the mean z-row, and a flag for distances
// above mean + tau * std of all distances.
struct DeviationReport {
    std::vector<FeatureVector> z;
    FeatureVector z_mean{};
    std::vector<double> delta;
    double delta_mean = 0.0;
    double delta_std = 0.0;
    double tau = 1.5;
    double epsilon = 1e-9;
    std::vector<bool> flags;

    double threshold() const { return delta_mean + tau * delta_std; }
    bool empty() const { return delta.empty(); }
    std::vector<std::size_t> flagged() const;
    bool operator==(const DeviationReport&) const = default;
};

// Throws InputError when fewer than two fingerprints are given.
DeviationReport detect_deviations(std::span<const Fingerprint> fps, double tau = 1.5, double epsilon = 1e-9);

enum class AnomalyLabel { variation, outlier, uncertain };
std::string_view label_name(AnomalyLabel label);
std::optional<AnomalyLabel> label_from_name(std::string_view name);

struct FeatureDeviation {
    FeatureKey feature = FeatureKey::search_ratio;
    double z = 0.0;
    bool operator==(const FeatureDeviation&) const = default;
};

// Everything the judge sees about one flagged session.
struct AnomalyContext {
    std::size_t trajectory_index = 0;
    std::string task_id;
    std::vector<FeatureDeviation> top_features; // at most 5, by |z|
    std::size_t behavior_mode = 0;
    std::size_t mode_size = 0;
    std::size_t mode_count = 0;
    std::vector<std::string> episode_summaries;
    double delta = 0.0;
    double threshold = 0.0;
};

struct AnomalyVerdict {
    std::size_t trajectory_index = 0;
    AnomalyLabel label = AnomalyLabel::uncertain;
    std::string rationale;
    bool operator==(const AnomalyVerdict&) const = default;
};

std::vector<FeatureDeviation> top_deviating_features(const FeatureVector& z, std::size_t limit = 5);
CompletionRequest anomaly_prompt(const AnomalyContext& ctx);
// Reads the label from the reply's leading word or a {"label": ...} object.
AnomalyVerdict parse_verdict(std::size_t trajectory_index, std::string_view reply);
AnomalyVerdict fallback_judge(const AnomalyContext& ctx);
AnomalyVerdict judge_anomaly(const AnomalyContext& ctx, CompletionProvider& llm);

// Cosine average-linkage grouping of episode-summary embeddings.
inline ClusterLabels cluster_episode_summaries(std::span<const EmbeddingVector> vectors, double threshold = 0.6) {
    return cluster_by_cosine(vectors, threshold);
}

// Mean-feature thresholds mapping each dimension to a tier. Ties at a
// threshold resolve to the neutral tier M.
struct TierThresholds {
    double a_activation = 0.25;   // min search/browse ratio to leave L
    double b_long = 3000.0;       // avg_output_length >= -> L
    double b_short = 800.0;       // avg_output_length <= -> R
    double c_deep = 2.5;          // max_dir_depth >= -> L
    double c_flat = 0.5;          // max_dir_depth <= -> R
    double d_small = 0.6;         // small_edit_ratio >= -> L
    double d_bulk = 0.2;          // small_edit_ratio <= -> R
    double e_active = 0.3;        // delete_to_create >= -> L
    double e_keep = 0.05;         // delete_to_create <= -> R
    bool operator==(const TierThresholds&) const = default;
};

struct TierEvidence {
    Dimension dimension = Dimension::A;
    Tier tier = Tier::M;
    std::vector<std::pair<FeatureKey, double>> features; // feature means consulted
    std::string rule;
    bool operator==(const TierEvidence&) const = default;
};

TierEvidence classify_dimension(const FeatureStats& stats, Dimension dim, const TierThresholds& thresholds = {});

struct ProceduralChannel {
    std::size_t trajectory_count = 0;
    std::vector<std::string> task_ids;
    std::vector<Fingerprint> fingerprints;
    FeatureStats stats;
    std::array<TierEvidence, kDimensionCount> tiers{};
    bool operator==(const ProceduralChannel&) const = default;
};

struct IndexedChunk {
    EmbeddingVector vector;
    std::string text;
    std::string source_path;
    std::size_t trajectory_index = 0;
    std::size_t chunk_index = 0;
    bool operator==(const IndexedChunk&) const = default;
};

struct SemanticChannel {
    FileMetadata metadata;
    std::vector<std::string> descriptors; // one per trajectory
    std::string summary;                  // cross-session style summary
    std::vector<IndexedChunk> chunks;
    bool operator==(const SemanticChannel&) const = default;
};

struct EpisodeRecord {
    std::size_t trajectory_index = 0;
    Episode episode;
    std::size_t cluster = 0;
    EmbeddingVector vector; // narrative embedding, used at query time
    bool operator==(const EpisodeRecord&) const = default;
};

struct EpisodicChannel {
    ClusterLabels behavior_modes; // one label per trajectory
    std::vector<EpisodeRecord> episodes;
    std::size_t episode_cluster_count = 0;
    DeviationReport deviations; // empty when fewer than two trajectories
    std::vector<AnomalyVerdict> verdicts;
    bool operator==(const EpisodicChannel&) const = default;
};

struct MemoryStore {
    std::string profile_id;
    std::size_t embedding_dim = 0;
    std::string embedder_id;
    ProceduralChannel procedural;
    SemanticChannel semantic;
    EpisodicChannel episodic;
    bool operator==(const MemoryStore&) const = default;
};

struct ConsolidationOptions {
    double tau = 1.5;
    double epsilon = 1e-9;
    std::size_t chunk_budget = 50;
    double cluster_threshold = 0.6;
    ModeOptions modes;
    TierThresholds tiers;
};

// Chunk selection: trajectories by ascending deviation (ties by index),
// then chunks in their original order, up to `budget`. Returns
// (trajectory, chunk) index pairs.
std::vector<std::pair<std::size_t, std::size_t>> select_chunks(std::span<const Engram> engrams,
                                                               std::span<const double> delta, std::size_t budget);

FileMetadata merge_metadata(std::span<const Engram> engrams);

// Throws InputError on an empty list or mixed profile ids. Embedding
// failures of a live embedder fall back to the hashing embedder, which is
// then recorded as the store's embedder.
MemoryStore consolidate(std::span<const Engram> engrams, const Providers& providers,
                        const ConsolidationOptions& options = {});

} // namespace fsmem
