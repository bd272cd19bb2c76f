#include "fsmem/providers.hpp"

#include <cmath>

#include "fsmem/errors.hpp"
#include "fsmem/text.hpp"

namespace fsmem {

CompletionResponse OfflineCompletion::complete(const CompletionRequest&) {
    return {std::string(kReply), FinishStatus::offline};
}

std::optional<std::string> try_complete(CompletionProvider& provider, const CompletionRequest& request) {
    try {
        auto response = provider.complete(request);
        if (response.finish == FinishStatus::offline) return std::nullopt;
        return std::move(response.text);
    } catch (const ProviderUnavailable&) {
        return std::nullopt;
    }
}

EmbeddingVector hashed_embedding(std::string_view input, std::size_t dim) {
    if (dim == 0) throw ConfigError("embedding dimension must be positive");
    EmbeddingVector v(dim, 0.0f);
    auto tokens = text::tokenize(input);
    if (tokens.empty()) tokens.emplace_back(input);
    for (const auto& tok : tokens) {
        const auto h = text::fnv1a(tok);
        const auto bucket = static_cast<std::size_t>(h % dim);
        const float sign = (h >> 63) ? -1.0f : 1.0f;
        v[bucket] += sign;
    }
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    for (float& x : v) x = static_cast<float>(x / norm);
    return v;
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
}

std::vector<EmbeddingVector> HashingEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        if (t.empty()) throw InputError("cannot embed an empty string");
        out.push_back(hashed_embedding(t, dim_));
    }
    return out;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw ConfigError("embedding dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Providers offline_providers(std::size_t embedding_dim) {
    return {std::make_shared<OfflineCompletion>(), std::make_shared<HashingEmbedder>(embedding_dim)};
}

Providers make_providers(const ProviderSettings& settings) {
    if (settings.fallback_only || settings.endpoint.empty()) return offline_providers(settings.embedding_dim);
    Providers p;
    p.completion = std::make_shared<HttpCompletion>(settings);
    if (settings.embedding_model.empty())
        p.embedder = std::make_shared<HashingEmbedder>(settings.embedding_dim);
    else
        p.embedder = std::make_shared<HttpEmbedder>(settings);
    return p;
}

std::vector<std::size_t> fallback_boundaries(std::string_view) { return {}; }

} // namespace fsmem
