#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fsmem/consolidator.hpp"
#include "fsmem/engram.hpp"
#include "fsmem/errors.hpp"
#include "fsmem/events.hpp"
#include "fsmem/synthgen.hpp"

namespace fsmem {

inline constexpr int kStoreFormatVersion = 1;

class StoreError : public Error {
public:
    enum class Kind { missing_file, version_mismatch, corrupt_table, malformed };
    StoreError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// Store directory: store.json, procedural.json, semantic.json, chunks.json +
// chunks.bin, episodic.json + episodes.bin. The .bin tables hold row-major
// little-endian float32 vectors, one row per sidecar entry.
void save_store(const MemoryStore& store, const std::filesystem::path& dir);
MemoryStore load_store(const std::filesystem::path& dir);
bool is_store_dir(const std::filesystem::path& dir);

Json to_json(const ProceduralChannel& c);
ProceduralChannel procedural_from_json(const Json& j);
Json to_json(const DeviationReport& r);
DeviationReport deviations_from_json(const Json& j);
Json to_json(const TierEvidence& t);
TierEvidence tier_evidence_from_json(const Json& j);
Json to_json(const AnomalyVerdict& v);
AnomalyVerdict verdict_from_json(const Json& j);

// One trajectory directory: events.json, deltas.json, captions.json and
// outputs/<relative path> for every final output file.
void write_bundle(const TrajectoryBundle& bundle, const std::filesystem::path& dir);
TrajectoryBundle read_bundle(const std::filesystem::path& dir, const std::string& profile_id,
                             const std::string& task_id);

Json deltas_to_json(const std::map<std::size_t, ContentDelta>& deltas);
std::map<std::size_t, ContentDelta> deltas_from_json(const Json& j);

// corpus/<profile>/<task>/... plus corpus/<profile>/manifest.json.
void write_corpus(const Profile& profile, const GeneratorConfig& cfg, const Corpus& corpus,
                  const std::filesystem::path& root);

struct CorpusEntry {
    std::string profile_id;
    std::string task_id;
    std::filesystem::path dir;
};

// Accepts either a corpus root or a single profile directory. Sorted by
// profile then task.
std::vector<CorpusEntry> list_corpus(const std::filesystem::path& path);

void write_engram(const Engram& engram, const std::filesystem::path& file);
Engram read_engram(const std::filesystem::path& file);

// engrams/<profile>/<task>.json; accepts the root or one profile directory.
std::map<std::string, std::vector<std::filesystem::path>> list_engrams(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& contents);

} // namespace fsmem
