#include "fsmem/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "fsmem/errors.hpp"
#include "fsmem/storage.hpp"
#include "fsmem/text.hpp"

namespace fsmem {
namespace {

double to_double(std::string_view key, std::string_view v) {
    const std::string s(text::trim(v));
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("config key '" + std::string(key) + "': not a number: " + s);
    return d;
}

std::size_t to_size(std::string_view key, std::string_view v) {
    const auto s = text::trim(v);
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("config key '" + std::string(key) + "': not a non-negative integer: " + std::string(s));
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    const auto s = text::lower(text::trim(v));
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw ConfigError("config key '" + std::string(key) + "': not a boolean: " + s);
}

std::set<Channel> to_channels(std::string_view key, std::string_view v) {
    std::set<Channel> out;
    std::string item;
    std::stringstream ss{std::string(v)};
    while (std::getline(ss, item, ',')) {
        const auto name = text::trim(item);
        if (name.empty()) continue;
        auto c = channel_from_name(name);
        if (!c) throw ConfigError("config key '" + std::string(key) + "': unknown channel '" + std::string(name) + "'");
        out.insert(*c);
    }
    return out;
}

std::string_view channel_short(Channel c) {
    switch (c) {
    case Channel::procedural: return "proc";
    case Channel::semantic: return "sem";
    case Channel::episodic: return "epi";
    }
    return "proc";
}

void positive(std::string_view key, double v) {
    if (!(v > 0)) throw ConfigError("config key '" + std::string(key) + "' must be positive");
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "tau", "epsilon", "embedding_dim", "chunk_size", "chunk_budget", "display_limit", "top_k",
        "cluster_threshold", "max_modes", "min_gap_ratio",
        "tier.a_activation", "tier.b_long", "tier.b_short", "tier.c_deep", "tier.c_flat",
        "tier.d_small", "tier.d_bulk", "tier.e_active", "tier.e_keep",
        "disabled_channels", "endpoint", "completion_model", "embedding_model", "api_key_env",
        "fallback_only", "retry_attempts", "retry_backoff_ms", "timeout_s"};
    return keys;
}

std::string env_name(std::string_view key) {
    std::string out = "FSMEM_";
    for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value) {
    const std::string k(key);
    auto& t = cfg.tiers;
    auto& p = cfg.provider;
    if (k == "tau") cfg.tau = to_double(k, value);
    else if (k == "epsilon") cfg.epsilon = to_double(k, value);
    else if (k == "embedding_dim") cfg.embedding_dim = p.embedding_dim = to_size(k, value);
    else if (k == "chunk_size") cfg.chunk_size = to_size(k, value);
    else if (k == "chunk_budget") cfg.chunk_budget = to_size(k, value);
    else if (k == "display_limit") cfg.display_limit = to_size(k, value);
    else if (k == "top_k") cfg.top_k = to_size(k, value);
    else if (k == "cluster_threshold") cfg.cluster_threshold = to_double(k, value);
    else if (k == "max_modes") cfg.max_modes = to_size(k, value);
    else if (k == "min_gap_ratio") cfg.min_gap_ratio = to_double(k, value);
    else if (k == "tier.a_activation") t.a_activation = to_double(k, value);
    else if (k == "tier.b_long") t.b_long = to_double(k, value);
    else if (k == "tier.b_short") t.b_short = to_double(k, value);
    else if (k == "tier.c_deep") t.c_deep = to_double(k, value);
    else if (k == "tier.c_flat") t.c_flat = to_double(k, value);
    else if (k == "tier.d_small") t.d_small = to_double(k, value);
    else if (k == "tier.d_bulk") t.d_bulk = to_double(k, value);
    else if (k == "tier.e_active") t.e_active = to_double(k, value);
    else if (k == "tier.e_keep") t.e_keep = to_double(k, value);
    else if (k == "disabled_channels") cfg.disabled_channels = to_channels(k, value);
    else if (k == "endpoint") p.endpoint = std::string(text::trim(value));
    else if (k == "completion_model") p.completion_model = std::string(text::trim(value));
    else if (k == "embedding_model") p.embedding_model = std::string(text::trim(value));
    else if (k == "api_key_env") p.api_key_env = std::string(text::trim(value));
    else if (k == "fallback_only") p.fallback_only = to_bool(k, value);
    else if (k == "retry_attempts") p.retry.attempts = static_cast<int>(to_size(k, value));
    else if (k == "retry_backoff_ms") p.retry.initial_backoff = std::chrono::milliseconds(to_size(k, value));
    else if (k == "timeout_s") p.timeout = std::chrono::seconds(to_size(k, value));
    else throw ConfigError("unknown config key '" + k + "'");
}

std::map<std::string, std::string> parse_config_text(std::string_view body) {
    std::map<std::string, std::string> out;
    std::size_t line_no = 0;
    for (auto line : text::split_lines(body)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const auto key = text::trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        out[std::string(key)] = std::string(text::trim(line.substr(eq + 1)));
    }
    return out;
}

void apply_environment(PipelineConfig& cfg) {
    for (const auto& key : config_keys())
        if (const char* v = std::getenv(env_name(key).c_str())) apply_setting(cfg, key, v);
}

PipelineConfig load_config(const std::filesystem::path& file) {
    PipelineConfig cfg;
    if (!file.empty()) {
        if (!std::filesystem::exists(file)) throw ConfigError("config file not found: " + file.string());
        for (const auto& [k, v] : parse_config_text(read_text_file(file))) apply_setting(cfg, k, v);
    }
    apply_environment(cfg);
    cfg.validate();
    return cfg;
}

void PipelineConfig::validate() const {
    positive("tau", tau);
    positive("epsilon", epsilon);
    positive("embedding_dim", static_cast<double>(embedding_dim));
    positive("chunk_size", static_cast<double>(chunk_size));
    positive("chunk_budget", static_cast<double>(chunk_budget));
    positive("top_k", static_cast<double>(top_k));
    positive("cluster_threshold", cluster_threshold);
    positive("max_modes", static_cast<double>(max_modes));
    positive("min_gap_ratio", min_gap_ratio);
    positive("retry_attempts", provider.retry.attempts);
    if (display_limit < 300 || display_limit > 1000) throw ConfigError("config key 'display_limit' must be in [300, 1000]");
    if (cluster_threshold > 1.0) throw ConfigError("config key 'cluster_threshold' must be at most 1");
    if (provider.embedding_dim != embedding_dim) throw ConfigError("embedding dimension is inconsistent");
    for (double v : {tiers.a_activation, tiers.b_long, tiers.b_short, tiers.c_deep, tiers.c_flat, tiers.d_small,
                     tiers.d_bulk, tiers.e_active, tiers.e_keep})
        positive("tier", v);
}

EncoderOptions PipelineConfig::encoder_options() const {
    EncoderOptions o;
    o.chunk_size = chunk_size;
    return o;
}

ConsolidationOptions PipelineConfig::consolidation_options() const {
    ConsolidationOptions o;
    o.tau = tau;
    o.epsilon = epsilon;
    o.chunk_budget = chunk_budget;
    o.cluster_threshold = cluster_threshold;
    o.modes.max_modes = max_modes;
    o.modes.min_gap_ratio = min_gap_ratio;
    o.modes.epsilon = epsilon;
    o.tiers = tiers;
    return o;
}

RetrievalOptions PipelineConfig::retrieval_options() const {
    RetrievalOptions o;
    o.top_k = top_k;
    o.disabled = disabled_channels;
    return o;
}

std::string render_config(const PipelineConfig& cfg) {
    std::ostringstream os;
    os << "tau = " << text::fixed(cfg.tau, 6) << "\n";
    os << "epsilon = " << cfg.epsilon << "\n";
    os << "embedding_dim = " << cfg.embedding_dim << "\n";
    os << "chunk_size = " << cfg.chunk_size << "\n";
    os << "chunk_budget = " << cfg.chunk_budget << "\n";
    os << "display_limit = " << cfg.display_limit << "\n";
    os << "top_k = " << cfg.top_k << "\n";
    os << "cluster_threshold = " << text::fixed(cfg.cluster_threshold, 6) << "\n";
    os << "max_modes = " << cfg.max_modes << "\n";
    os << "min_gap_ratio = " << text::fixed(cfg.min_gap_ratio, 6) << "\n";
    os << "disabled_channels = ";
    bool first = true;
    for (auto c : cfg.disabled_channels) {
        os << (first ? "" : ",") << channel_short(c);
        first = false;
    }
    os << "\nendpoint = " << cfg.provider.endpoint << "\n";
    os << "fallback_only = " << (cfg.provider.fallback_only ? "true" : "false") << "\n";
    return os.str();
}

} // namespace fsmem
