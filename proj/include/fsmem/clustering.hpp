#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fsmem/fingerprint.hpp"
#include "fsmem/providers.hpp"

namespace fsmem {

// One step of an agglomerative run: cluster `absorbed` merged into `kept`
// (both identified by their smallest original member) at linkage `value`.
struct MergeStep {
    std::size_t kept = 0;
    std::size_t absorbed = 0;
    double value = 0.0;
};

// Labels are 0..k-1, numbered by first appearance in input order.
using ClusterLabels = std::vector<std::size_t>;

// Average linkage over a symmetric pairwise matrix. With `maximize` the
// matrix holds similarities and the most similar pair merges first;
// otherwise it holds distances. Merging continues while the best linkage
// satisfies the threshold (>= for similarities, <= for distances) and more
// than `min_clusters` clusters remain.
ClusterLabels average_linkage(const std::vector<std::vector<double>>& pairwise, bool maximize, double threshold,
                              std::size_t min_clusters = 1, std::vector<MergeStep>* history = nullptr);

// Agglomerative average linkage on cosine similarity; stops when no pair of
// clusters has mean pairwise similarity >= threshold. Throws InputError on
// a zero vector or mismatched dimensions.
ClusterLabels cluster_by_cosine(std::span<const EmbeddingVector> vectors, double threshold = 0.6);

// Per-feature z-scores (population std, epsilon in the denominator).
std::vector<FeatureVector> zscore_rows(std::span<const Fingerprint> fps, double epsilon = 1e-9);

struct ModeOptions {
    std::size_t max_modes = 3;
    double min_gap_ratio = 2.0; // a cut must jump the merge distance by at least this factor
    double epsilon = 1e-9;
};

// Euclidean average linkage on z-scored fingerprints. The number of modes
// k <= min(max_modes, N) is the cut with the largest relative jump between
// consecutive merge distances; 1 when no jump reaches min_gap_ratio.
ClusterLabels cluster_behavior_modes(std::span<const Fingerprint> fps, const ModeOptions& options = {});

std::size_t cluster_count(const ClusterLabels& labels);

} // namespace fsmem
