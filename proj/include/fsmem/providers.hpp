#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsmem {

struct CompletionRequest {
    std::string system;
    std::string user;
    std::size_t max_output_tokens = 1024;
};

enum class FinishStatus { stop, length, offline };

struct CompletionResponse {
    std::string text;
    FinishStatus finish = FinishStatus::stop;
};

// Text-completion backend. Implementations must be safe to call from
// several threads at once. Callers must tolerate arbitrary reply text.
class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    // Throws ProviderUnavailable once transport retries are exhausted.
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

// Always answers with the same template and FinishStatus::offline, which
// tells every call site to take its deterministic fallback path.
class OfflineCompletion final : public CompletionProvider {
public:
    static constexpr std::string_view kReply = "offline: no completion provider configured";
    CompletionResponse complete(const CompletionRequest&) override;
};

// The reply text, or nullopt when the provider is offline or unreachable.
std::optional<std::string> try_complete(CompletionProvider& provider, const CompletionRequest& request);

using EmbeddingVector = std::vector<float>;

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    // Recorded in stores so queries can refuse a mismatched embedder.
    virtual std::string id() const = 0;
    // One vector per text, same order. Empty strings are rejected.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

// Signed feature hashing of lower-cased alphanumeric tokens into `dim`
// buckets, L2-normalized. Texts with no tokens hash as a single token.
EmbeddingVector hashed_embedding(std::string_view text, std::size_t dim);

class HashingEmbedder final : public Embedder {
public:
    static constexpr std::string_view kId = "hashing-v1";

    explicit HashingEmbedder(std::size_t dim = 1024);
    std::size_t dimension() const override { return dim_; }
    std::string id() const override { return std::string(kId); }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

private:
    std::size_t dim_;
};

double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{500}; // doubled after each failure
};

struct ProviderSettings {
    std::string endpoint;          // base URL of an OpenAI-compatible API, e.g. https://host/v1
    std::string completion_model;
    std::string embedding_model;
    std::string api_key_env = "FSMEM_API_KEY";
    std::size_t embedding_dim = 1024;
    bool fallback_only = false;
    RetryPolicy retry;
    std::chrono::seconds timeout{60};
};

class HttpCompletion final : public CompletionProvider {
public:
    explicit HttpCompletion(ProviderSettings settings);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    ProviderSettings settings_;
};

class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(ProviderSettings settings);
    std::size_t dimension() const override { return settings_.embedding_dim; }
    std::string id() const override { return "http:" + settings_.embedding_model; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

private:
    ProviderSettings settings_;
};

struct Providers {
    std::shared_ptr<CompletionProvider> completion;
    std::shared_ptr<Embedder> embedder;
};

Providers offline_providers(std::size_t embedding_dim = 1024);
// Offline when fallback_only is set or no endpoint is configured.
Providers make_providers(const ProviderSettings& settings);

// Boundary fallback: no interior boundaries, i.e. a single episode.
std::vector<std::size_t> fallback_boundaries(std::string_view timeline);

} // namespace fsmem
