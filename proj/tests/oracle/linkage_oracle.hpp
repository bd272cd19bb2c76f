#pragma once

// Naive agglomerative clustering that recomputes every cluster-pair
// average from the raw similarity matrix at each step, plus a checker for
// the stopping condition.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

inline double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += double(a[i]) * b[i];
        na += double(a[i]) * a[i];
        nb += double(b[i]) * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double average_similarity(const std::vector<std::vector<double>>& sim, const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b) {
    double s = 0;
    for (auto i : a)
        for (auto j : b) s += sim[i][j];
    return s / double(a.size() * b.size());
}

// Groups (lists of member indices) from labels.
inline std::vector<std::vector<std::size_t>> groups(const std::vector<std::size_t>& labels) {
    std::vector<std::vector<std::size_t>> g;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= g.size()) g.resize(labels[i] + 1);
        g[labels[i]].push_back(i);
    }
    return g;
}

inline std::vector<std::vector<std::size_t>> naive_average_linkage(const std::vector<std::vector<double>>& sim,
                                                                   double threshold) {
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < sim.size(); ++i) clusters.push_back({i});
    for (;;) {
        double best = -2;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double v = average_similarity(sim, clusters[i], clusters[j]);
                if (v > best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (clusters.size() < 2 || best < threshold) break;
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return clusters;
}

// Same partition regardless of label numbering.
inline std::vector<std::size_t> canonical_labels(const std::vector<std::vector<std::size_t>>& clusters, std::size_t n) {
    std::vector<std::size_t> owner(n, 0);
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (auto i : clusters[c]) owner[i] = c;
    std::vector<std::size_t> map(clusters.size(), SIZE_MAX), out(n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (map[owner[i]] == SIZE_MAX) map[owner[i]] = next++;
        out[i] = map[owner[i]];
    }
    return out;
}

} // namespace oracle
