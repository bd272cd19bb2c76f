#include "fsmem/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fsmem/errors.hpp"

namespace fsmem {
namespace {

ClusterLabels relabel(const std::vector<std::size_t>& root) {
    ClusterLabels labels(root.size());
    std::vector<std::size_t> seen(root.size(), std::numeric_limits<std::size_t>::max());
    std::size_t next = 0;
    for (std::size_t i = 0; i < root.size(); ++i) {
        auto& slot = seen[root[i]];
        if (slot == std::numeric_limits<std::size_t>::max()) slot = next++;
        labels[i] = slot;
    }
    return labels;
}

} // namespace

ClusterLabels average_linkage(const std::vector<std::vector<double>>& pairwise, bool maximize, double threshold,
                              std::size_t min_clusters, std::vector<MergeStep>* history) {
    const std::size_t n = pairwise.size();
    auto d = pairwise;
    std::vector<std::size_t> size(n, 1);
    std::vector<bool> active(n, true);
    std::vector<std::size_t> root(n);
    std::iota(root.begin(), root.end(), 0);

    std::size_t clusters = n;
    while (clusters > std::max<std::size_t>(min_clusters, 1)) {
        std::size_t bi = 0, bj = 0;
        bool found = false;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                const double v = d[i][j];
                if (!found || (maximize ? v > best : v < best)) {
                    best = v;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        if (!found) break;
        if (maximize ? best < threshold : best > threshold) break;

        // Lance-Williams update for average linkage.
        const double si = static_cast<double>(size[bi]), sj = static_cast<double>(size[bj]);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            const double v = (si * d[bi][k] + sj * d[bj][k]) / (si + sj);
            d[bi][k] = d[k][bi] = v;
        }
        size[bi] += size[bj];
        active[bj] = false;
        for (auto& r : root)
            if (r == bj) r = bi;
        if (history) history->push_back({bi, bj, best});
        --clusters;
    }
    return relabel(root);
}

ClusterLabels cluster_by_cosine(std::span<const EmbeddingVector> vectors, double threshold) {
    const std::size_t n = vectors.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (vectors[i].size() != vectors[0].size()) throw InputError("embedding dimensions differ");
        if (std::all_of(vectors[i].begin(), vectors[i].end(), [](float x) { return x == 0.0f; }))
            throw InputError("cannot cluster a zero vector (index " + std::to_string(i) + ")");
    }
    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sim[i][j] = sim[j][i] = cosine_similarity(vectors[i], vectors[j]);
    return average_linkage(sim, true, threshold);
}

std::vector<FeatureVector> zscore_rows(std::span<const Fingerprint> fps, double epsilon) {
    const std::size_t n = fps.size();
    std::vector<FeatureVector> z(n);
    if (n == 0) return z;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        double sum = 0.0;
        for (const auto& f : fps) sum += f.values[k];
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& f : fps) ss += (f.values[k] - mean) * (f.values[k] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        for (std::size_t j = 0; j < n; ++j) z[j][k] = (fps[j].values[k] - mean) / (sd + epsilon);
    }
    return z;
}

ClusterLabels cluster_behavior_modes(std::span<const Fingerprint> fps, const ModeOptions& options) {
    const std::size_t n = fps.size();
    if (n <= 1) return ClusterLabels(n, 0);

    const auto z = zscore_rows(fps, options.epsilon);
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < kFeatureCount; ++k) s += (z[i][k] - z[j][k]) * (z[i][k] - z[j][k]);
            dist[i][j] = dist[j][i] = std::sqrt(s);
        }

    std::vector<MergeStep> history;
    average_linkage(dist, false, std::numeric_limits<double>::infinity(), 1, &history);

    // Cutting into k clusters undoes the last k-1 merges; the cut is
    // justified when merge N-k jumps well above merge N-k-1.
    const std::size_t max_k = std::min(options.max_modes, n - 1);
    std::size_t best_k = 1;
    double best_ratio = 0.0;
    for (std::size_t k = 2; k <= max_k; ++k) {
        const double below = history[n - k - 1].value;
        const double above = history[n - k].value;
        const double ratio = above / std::max(below, 1e-12);
        if (above > 0.0 && ratio >= options.min_gap_ratio && ratio > best_ratio) {
            best_ratio = ratio;
            best_k = k;
        }
    }
    return average_linkage(dist, false, std::numeric_limits<double>::infinity(), best_k);
}

std::size_t cluster_count(const ClusterLabels& labels) {
    if (labels.empty()) return 0;
    return *std::max_element(labels.begin(), labels.end()) + 1;
}

} // namespace fsmem
