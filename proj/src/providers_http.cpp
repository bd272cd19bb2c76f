#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "fsmem/errors.hpp"
#include "fsmem/providers.hpp"

namespace fsmem {
namespace {

using Json = nlohmann::json;

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string base;   // path prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    e.origin = url.substr(0, path_start);
    e.base = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!e.base.empty() && e.base.back() == '/') e.base.pop_back();
    return e;
}

std::string api_key(const ProviderSettings& s) {
    if (s.api_key_env.empty()) return {};
    const char* v = std::getenv(s.api_key_env.c_str());
    return v ? v : "";
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

// POSTs a JSON body with bounded retries; returns the parsed response body.
Json post_json(const ProviderSettings& s, const std::string& route, const Json& body) {
    const Endpoint ep = split_endpoint(s.endpoint);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(s.timeout);
    client.set_read_timeout(s.timeout);
    client.set_write_timeout(s.timeout);

    httplib::Headers headers;
    if (auto key = api_key(s); !key.empty()) headers.emplace("Authorization", "Bearer " + key);

    const std::string payload = body.dump();
    auto backoff = s.retry.initial_backoff;
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < std::max(1, s.retry.attempts); ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        auto res = client.Post(ep.base + route, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw ProviderUnavailable("authentication rejected (HTTP " + std::to_string(res->status) + ")");
        if (retryable(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300)
            throw ProviderUnavailable("request rejected (HTTP " + std::to_string(res->status) + ")");
        try {
            return Json::parse(res->body);
        } catch (const Json::parse_error&) {
            throw ProviderUnavailable("response is not valid JSON");
        }
    }
    throw ProviderUnavailable("provider unreachable after retries: " + last_error);
}

} // namespace

HttpCompletion::HttpCompletion(ProviderSettings settings) : settings_(std::move(settings)) {
    split_endpoint(settings_.endpoint);
}

CompletionResponse HttpCompletion::complete(const CompletionRequest& request) {
    Json body = {
        {"model", settings_.completion_model},
        {"max_tokens", request.max_output_tokens},
        {"messages", Json::array({{{"role", "system"}, {"content", request.system}},
                                  {{"role", "user"}, {"content", request.user}}})},
    };
    const Json reply = post_json(settings_, "/chat/completions", body);
    try {
        const auto& choice = reply.at("choices").at(0);
        CompletionResponse out;
        out.text = choice.at("message").at("content").get<std::string>();
        const auto reason = choice.value("finish_reason", std::string("stop"));
        out.finish = reason == "length" ? FinishStatus::length : FinishStatus::stop;
        return out;
    } catch (const Json::exception& e) {
        throw ProviderUnavailable(std::string("unexpected completion response: ") + e.what());
    }
}

HttpEmbedder::HttpEmbedder(ProviderSettings settings) : settings_(std::move(settings)) {
    split_endpoint(settings_.endpoint);
    if (settings_.embedding_dim == 0) throw ConfigError("embedding dimension must be positive");
}

std::vector<EmbeddingVector> HttpEmbedder::embed(std::span<const std::string> texts) {
    if (texts.empty()) return {};
    Json input = Json::array();
    for (const auto& t : texts) {
        if (t.empty()) throw InputError("cannot embed an empty string");
        input.push_back(t);
    }
    const Json reply = post_json(settings_, "/embeddings", {{"model", settings_.embedding_model}, {"input", input}});

    std::vector<EmbeddingVector> out(texts.size());
    try {
        const auto& data = reply.at("data");
        if (data.size() != texts.size()) throw ProviderUnavailable("embedding count does not match input count");
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto index = data[i].value("index", i);
            if (index >= out.size()) throw ProviderUnavailable("embedding index out of range");
            out[index] = data[i].at("embedding").get<EmbeddingVector>();
        }
    } catch (const Json::exception& e) {
        throw ProviderUnavailable(std::string("unexpected embedding response: ") + e.what());
    }
    for (const auto& v : out)
        if (v.size() != settings_.embedding_dim)
            throw ConfigError("provider returned dimension " + std::to_string(v.size()) + ", configured " +
                              std::to_string(settings_.embedding_dim));
    return out;
}

} // namespace fsmem
