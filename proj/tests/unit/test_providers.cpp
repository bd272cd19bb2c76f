#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "fsmem/errors.hpp"
#include "fsmem/providers.hpp"

using namespace fsmem;

TEST(Offline, RepliesDeterministicallyAndSignalsFallback) {
    OfflineCompletion llm;
    const auto a = llm.complete({"sys", "user", 10});
    const auto b = llm.complete({"sys", "user", 10});
    EXPECT_EQ(a.text, b.text);
    EXPECT_EQ(a.finish, FinishStatus::offline);
    EXPECT_FALSE(try_complete(llm, {"s", "u", 1}));
}

TEST(HashingEmbedding, IdenticalTextsGiveIdenticalVectors) {
    HashingEmbedder e(256);
    const std::vector<std::string> texts{"a b", "a b", "quarterly report"};
    const auto v = e.embed(texts);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[0], v[1]);
    EXPECT_NEAR(cosine_similarity(v[0], v[1]), 1.0, 1e-6);
    EXPECT_EQ(v[0].size(), 256u);
}

TEST(HashingEmbedding, DisjointTokensAreNearlyOrthogonal) {
    HashingEmbedder e;
    const std::vector<std::string> texts{"budget spreadsheet quarterly revenue", "poem about river stones"};
    const auto v = e.embed(texts);
    EXPECT_LE(cosine_similarity(v[0], v[1]), 0.1);
}

TEST(HashingEmbedding, UnitNormAndCaseInsensitive) {
    const auto a = hashed_embedding("Hello World", 64);
    const auto b = hashed_embedding("hello, world!", 64);
    EXPECT_EQ(a, b);
    double n = 0;
    for (float x : a) n += static_cast<double>(x) * x;
    EXPECT_NEAR(n, 1.0, 1e-6);
    // punctuation only still yields a usable vector
    const auto p = hashed_embedding("---", 64);
    EXPECT_NEAR(cosine_similarity(p, p), 1.0, 1e-6);
}

TEST(HashingEmbedding, RejectsEmptyStringAndZeroDimension) {
    HashingEmbedder e(8);
    const std::vector<std::string> texts{"ok", ""};
    EXPECT_THROW(e.embed(texts), InputError);
    EXPECT_THROW(HashingEmbedder(0), ConfigError);
}

TEST(Cosine, MismatchedDimensionIsConfigError) {
    const std::vector<float> a{1, 0}, b{1, 0, 0};
    EXPECT_THROW(cosine_similarity(a, b), ConfigError);
    const std::vector<float> z{0, 0};
    EXPECT_EQ(cosine_similarity(z, std::vector<float>{1, 0}), 0.0);
}

TEST(Factory, OfflineWhenNoEndpointOrFallbackOnly) {
    ProviderSettings s;
    auto p = make_providers(s);
    EXPECT_EQ(p.embedder->id(), "hashing-v1");
    EXPECT_FALSE(try_complete(*p.completion, {}));
    s.endpoint = "http://127.0.0.1:1/v1";
    s.fallback_only = true;
    EXPECT_EQ(make_providers(s).embedder->id(), "hashing-v1");
    EXPECT_TRUE(fallback_boundaries("anything").empty());
}

TEST(Factory, EndpointWithoutSchemeIsConfigError) {
    ProviderSettings s;
    s.endpoint = "localhost:8080";
    EXPECT_THROW(make_providers(s), ConfigError);
}

namespace {

// Local OpenAI-style server on an ephemeral port.
class MockServer {
public:
    MockServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    ProviderSettings settings() const {
        ProviderSettings s;
        s.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
        s.completion_model = "m";
        s.embedding_model = "e";
        s.embedding_dim = 3;
        s.retry.attempts = 3;
        s.retry.initial_backoff = std::chrono::milliseconds(1);
        s.timeout = std::chrono::seconds(5);
        s.api_key_env = "";
        return s;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

std::string chat_reply(const std::string& text) {
    nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}, {"finish_reason", "stop"}}}}};
    return j.dump();
}

} // namespace

TEST(Http, CompletionRetriesTransientFailures) {
    MockServer mock;
    std::atomic<int> hits{0};
    mock.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (++hits < 3) {
            res.status = 503;
            return;
        }
        const auto body = nlohmann::json::parse(req.body);
        res.set_content(chat_reply("echo " + body["messages"][1]["content"].get<std::string>()), "application/json");
    });
    HttpCompletion llm(mock.settings());
    const auto r = llm.complete({"sys", "hi", 16});
    EXPECT_EQ(r.text, "echo hi");
    EXPECT_EQ(hits.load(), 3);
}

TEST(Http, CompletionGivesUpAfterRetries) {
    MockServer mock;
    std::atomic<int> hits{0};
    mock.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 500;
    });
    HttpCompletion llm(mock.settings());
    EXPECT_THROW(llm.complete({}), ProviderUnavailable);
    EXPECT_EQ(hits.load(), 3);
    EXPECT_FALSE(try_complete(llm, {}));
}

TEST(Http, AuthFailureIsNotRetried) {
    MockServer mock;
    std::atomic<int> hits{0};
    mock.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
    });
    HttpCompletion llm(mock.settings());
    EXPECT_THROW(llm.complete({}), ProviderUnavailable);
    EXPECT_EQ(hits.load(), 1);
}

TEST(Http, EmbeddingsParsedAndDimensionChecked) {
    MockServer mock;
    int dim = 3;
    mock.server().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json data = nlohmann::json::array();
        for (std::size_t i = 0; i < body["input"].size(); ++i)
            data.push_back({{"index", i}, {"embedding", std::vector<float>(static_cast<std::size_t>(dim), float(i + 1))}});
        res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });
    HttpEmbedder emb(mock.settings());
    const std::vector<std::string> texts{"a", "b"};
    const auto v = emb.embed(texts);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[1], (EmbeddingVector{2, 2, 2}));
    dim = 4;
    EXPECT_THROW(emb.embed(texts), ConfigError);
}

TEST(Http, UnreachableEndpointIsUnavailable) {
    ProviderSettings s;
    s.endpoint = "http://127.0.0.1:1/v1";
    s.retry.attempts = 2;
    s.retry.initial_backoff = std::chrono::milliseconds(1);
    s.timeout = std::chrono::seconds(1);
    HttpCompletion llm(s);
    EXPECT_THROW(llm.complete({}), ProviderUnavailable);
}
