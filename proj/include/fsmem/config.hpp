#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "fsmem/consolidator.hpp"
#include "fsmem/engram.hpp"
#include "fsmem/providers.hpp"
#include "fsmem/retriever.hpp"

namespace fsmem {

struct PipelineConfig {
    double tau = 1.5;
    double epsilon = 1e-9;
    std::size_t embedding_dim = 1024;
    std::size_t chunk_size = 800;
    std::size_t chunk_budget = 50;
    std::size_t display_limit = 800;
    std::size_t top_k = 5;
    double cluster_threshold = 0.6;
    std::size_t max_modes = 3;
    double min_gap_ratio = 2.0;
    TierThresholds tiers;
    std::set<Channel> disabled_channels;
    ProviderSettings provider;

    // Throws ConfigError naming the first offending key.
    void validate() const;

    EncoderOptions encoder_options() const;
    ConsolidationOptions consolidation_options() const;
    RetrievalOptions retrieval_options() const;
};

// Keys accepted in config files; environment names are FSMEM_ + upper-case
// key with '.' replaced by '_'.
const std::vector<std::string>& config_keys();
std::string env_name(std::string_view key);

// Throws ConfigError for an unknown key or unparsable value.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);

// "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(std::string_view text);

// Defaults, then the file (if given), then the environment.
PipelineConfig load_config(const std::filesystem::path& file = {});
void apply_environment(PipelineConfig& cfg);

std::string render_config(const PipelineConfig& cfg);

} // namespace fsmem
