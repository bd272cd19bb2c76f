#include "fsmem/storage.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fsmem/text.hpp"

namespace fsmem {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& file, const std::string& contents) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + file.string());
    out << contents;
    if (!out) throw InputError("write failed for " + file.string());
}

namespace {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json load_json(const fs::path& file, StoreError::Kind missing_kind) {
    if (!fs::exists(file)) throw StoreError(missing_kind, "missing store file " + file.filename().string());
    try {
        return Json::parse(read_text_file(file));
    } catch (const Json::parse_error& e) {
        throw StoreError(StoreError::Kind::malformed, file.filename().string() + " is not valid JSON: " + e.what());
    }
}

void write_vectors(const fs::path& file, const std::vector<const EmbeddingVector*>& rows) {
    std::string bytes;
    for (const auto* row : rows)
        for (float f : *row) {
            const auto bits = std::bit_cast<std::uint32_t>(f);
            for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
        }
    write_text_file(file, bytes);
}

std::vector<EmbeddingVector> read_vectors(const fs::path& file, std::size_t rows, std::size_t dim) {
    if (!fs::exists(file)) throw StoreError(StoreError::Kind::missing_file, "missing vector table " + file.filename().string());
    const auto bytes = read_text_file(file);
    if (bytes.size() != rows * dim * 4)
        throw StoreError(StoreError::Kind::corrupt_table,
                         "vector table " + file.filename().string() + " has " + std::to_string(bytes.size()) +
                             " bytes, expected " + std::to_string(rows * dim * 4));
    std::vector<EmbeddingVector> out(rows, EmbeddingVector(dim));
    std::size_t at = 0;
    for (auto& row : out)
        for (auto& f : row) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at++])) << (8 * b);
            f = std::bit_cast<float>(bits);
        }
    return out;
}

Json stats_to_json(const FeatureStats& s) {
    Json j = Json::object();
    for (auto k : kAllFeatures) {
        const auto& v = s[k];
        j[std::string(feature_name(k))] = {{"mean", v.mean}, {"median", v.median}, {"std", v.std}, {"min", v.min}, {"max", v.max}};
    }
    return j;
}

FeatureStats stats_from_json(const Json& j) {
    FeatureStats s;
    for (auto k : kAllFeatures) {
        const auto& v = j.at(std::string(feature_name(k)));
        s[k] = {v.at("mean").get<double>(), v.at("median").get<double>(), v.at("std").get<double>(),
                v.at("min").get<double>(), v.at("max").get<double>()};
    }
    return s;
}

Json vector_json(const FeatureVector& v) { return Json(std::vector<double>(v.begin(), v.end())); }

FeatureVector vector_from(const Json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != kFeatureCount) throw InputError("feature vector must have 17 entries");
    FeatureVector out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

template <class F>
auto guarded(const std::string& what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw StoreError(StoreError::Kind::malformed, "malformed " + what + ": " + e.what());
    } catch (const InputError& e) {
        throw StoreError(StoreError::Kind::malformed, "malformed " + what + ": " + e.what());
    }
}

} // namespace

Json to_json(const TierEvidence& t) {
    Json features = Json::object();
    for (const auto& [k, v] : t.features) features[std::string(feature_name(k))] = v;
    return {{"dimension", std::string(1, dimension_letter(t.dimension))},
            {"tier", std::string(1, tier_letter(t.tier))},
            {"features", features},
            {"rule", t.rule}};
}

TierEvidence tier_evidence_from_json(const Json& j) {
    TierEvidence t;
    const auto d = j.at("dimension").get<std::string>();
    const auto tier = j.at("tier").get<std::string>();
    auto dim = d.size() == 1 ? dimension_from_letter(d[0]) : std::nullopt;
    auto tr = tier.size() == 1 ? tier_from_letter(tier[0]) : std::nullopt;
    if (!dim || !tr) throw InputError("bad tier evidence");
    t.dimension = *dim;
    t.tier = *tr;
    for (const auto& [name, v] : j.at("features").items()) {
        auto k = feature_from_name(name);
        if (!k) throw InputError("unknown feature " + name);
        t.features.emplace_back(*k, v.get<double>());
    }
    t.rule = j.at("rule").get<std::string>();
    return t;
}

Json to_json(const ProceduralChannel& c) {
    Json fps = Json::array();
    for (const auto& f : c.fingerprints) fps.push_back(to_json(f));
    Json tiers = Json::array();
    for (const auto& t : c.tiers) tiers.push_back(to_json(t));
    return {{"trajectory_count", c.trajectory_count},
            {"task_ids", c.task_ids},
            {"fingerprints", fps},
            {"stats", stats_to_json(c.stats)},
            {"tiers", tiers}};
}

ProceduralChannel procedural_from_json(const Json& j) {
    ProceduralChannel c;
    c.trajectory_count = j.at("trajectory_count").get<std::size_t>();
    c.task_ids = j.at("task_ids").get<std::vector<std::string>>();
    for (const auto& f : j.at("fingerprints")) c.fingerprints.push_back(fingerprint_from_json(f));
    c.stats = stats_from_json(j.at("stats"));
    const auto& tiers = j.at("tiers");
    if (tiers.size() != kDimensionCount) throw InputError("expected six tier entries");
    for (std::size_t i = 0; i < kDimensionCount; ++i) c.tiers[i] = tier_evidence_from_json(tiers[i]);
    return c;
}

Json to_json(const DeviationReport& r) {
    Json z = Json::array();
    for (const auto& row : r.z) z.push_back(vector_json(row));
    return {{"tau", r.tau},
            {"epsilon", r.epsilon},
            {"z", z},
            {"z_mean", vector_json(r.z_mean)},
            {"delta", r.delta},
            {"delta_mean", r.delta_mean},
            {"delta_std", r.delta_std},
            {"flags", std::vector<bool>(r.flags.begin(), r.flags.end())}};
}

DeviationReport deviations_from_json(const Json& j) {
    DeviationReport r;
    r.tau = j.at("tau").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    for (const auto& row : j.at("z")) r.z.push_back(vector_from(row));
    r.z_mean = vector_from(j.at("z_mean"));
    r.delta = j.at("delta").get<std::vector<double>>();
    r.delta_mean = j.at("delta_mean").get<double>();
    r.delta_std = j.at("delta_std").get<double>();
    r.flags = j.at("flags").get<std::vector<bool>>();
    return r;
}

Json to_json(const AnomalyVerdict& v) {
    return {{"trajectory_index", v.trajectory_index}, {"label", label_name(v.label)}, {"rationale", v.rationale}};
}

AnomalyVerdict verdict_from_json(const Json& j) {
    AnomalyVerdict v;
    v.trajectory_index = j.at("trajectory_index").get<std::size_t>();
    auto label = label_from_name(j.at("label").get<std::string>());
    if (!label) throw InputError("unknown verdict label");
    v.label = *label;
    v.rationale = j.at("rationale").get<std::string>();
    return v;
}

bool is_store_dir(const fs::path& dir) { return fs::is_regular_file(dir / "store.json"); }

void save_store(const MemoryStore& store, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& c : store.semantic.chunks)
        if (c.vector.size() != store.embedding_dim) throw ConfigError("chunk vector dimension differs from store");
    for (const auto& e : store.episodic.episodes)
        if (e.vector.size() != store.embedding_dim) throw ConfigError("episode vector dimension differs from store");

    write_text_file(dir / "store.json", dump({{"format_version", kStoreFormatVersion},
                                              {"profile_id", store.profile_id},
                                              {"embedding_dim", store.embedding_dim},
                                              {"embedder_id", store.embedder_id}}));
    write_text_file(dir / "procedural.json", dump(to_json(store.procedural)));

    const auto& sem = store.semantic;
    write_text_file(dir / "semantic.json", dump({{"metadata", to_json(sem.metadata)},
                                                 {"descriptors", sem.descriptors},
                                                 {"summary", sem.summary}}));
    Json chunks = Json::array();
    std::vector<const EmbeddingVector*> chunk_rows;
    for (const auto& c : sem.chunks) {
        chunks.push_back({{"source_path", c.source_path},
                          {"trajectory_index", c.trajectory_index},
                          {"chunk_index", c.chunk_index},
                          {"text", c.text}});
        chunk_rows.push_back(&c.vector);
    }
    write_text_file(dir / "chunks.json", dump(chunks));
    write_vectors(dir / "chunks.bin", chunk_rows);

    const auto& epi = store.episodic;
    Json episodes = Json::array();
    std::vector<const EmbeddingVector*> episode_rows;
    for (const auto& e : epi.episodes) {
        episodes.push_back({{"trajectory_index", e.trajectory_index}, {"cluster", e.cluster}, {"episode", to_json(e.episode)}});
        episode_rows.push_back(&e.vector);
    }
    Json verdicts = Json::array();
    for (const auto& v : epi.verdicts) verdicts.push_back(to_json(v));
    write_text_file(dir / "episodic.json", dump({{"behavior_modes", epi.behavior_modes},
                                                 {"episode_cluster_count", epi.episode_cluster_count},
                                                 {"deviations", to_json(epi.deviations)},
                                                 {"verdicts", verdicts},
                                                 {"episodes", episodes}}));
    write_vectors(dir / "episodes.bin", episode_rows);
}

MemoryStore load_store(const fs::path& dir) {
    using K = StoreError::Kind;
    MemoryStore store;
    const Json head = load_json(dir / "store.json", K::missing_file);
    const int version = guarded("store.json", [&] { return head.at("format_version").get<int>(); });
    if (version != kStoreFormatVersion)
        throw StoreError(K::version_mismatch, "store format version " + std::to_string(version) + ", expected " +
                                                  std::to_string(kStoreFormatVersion));
    guarded("store.json", [&] {
        store.profile_id = head.at("profile_id").get<std::string>();
        store.embedding_dim = head.at("embedding_dim").get<std::size_t>();
        store.embedder_id = head.at("embedder_id").get<std::string>();
        return 0;
    });

    const Json proc = load_json(dir / "procedural.json", K::missing_file);
    store.procedural = guarded("procedural.json", [&] { return procedural_from_json(proc); });

    const Json sem = load_json(dir / "semantic.json", K::missing_file);
    const Json chunks = load_json(dir / "chunks.json", K::missing_file);
    guarded("semantic channel", [&] {
        store.semantic.metadata = metadata_from_json(sem.at("metadata"));
        store.semantic.descriptors = sem.at("descriptors").get<std::vector<std::string>>();
        store.semantic.summary = sem.at("summary").get<std::string>();
        for (const auto& c : chunks)
            store.semantic.chunks.push_back({{}, c.at("text").get<std::string>(), c.at("source_path").get<std::string>(),
                                             c.at("trajectory_index").get<std::size_t>(),
                                             c.at("chunk_index").get<std::size_t>()});
        return 0;
    });
    auto chunk_vecs = read_vectors(dir / "chunks.bin", store.semantic.chunks.size(), store.embedding_dim);
    for (std::size_t i = 0; i < chunk_vecs.size(); ++i) store.semantic.chunks[i].vector = std::move(chunk_vecs[i]);

    const Json epi = load_json(dir / "episodic.json", K::missing_file);
    guarded("episodic.json", [&] {
        auto& e = store.episodic;
        e.behavior_modes = epi.at("behavior_modes").get<ClusterLabels>();
        e.episode_cluster_count = epi.at("episode_cluster_count").get<std::size_t>();
        e.deviations = deviations_from_json(epi.at("deviations"));
        for (const auto& v : epi.at("verdicts")) e.verdicts.push_back(verdict_from_json(v));
        for (const auto& rec : epi.at("episodes"))
            e.episodes.push_back({rec.at("trajectory_index").get<std::size_t>(), episode_from_json(rec.at("episode")),
                                  rec.at("cluster").get<std::size_t>(), {}});
        return 0;
    });
    auto ep_vecs = read_vectors(dir / "episodes.bin", store.episodic.episodes.size(), store.embedding_dim);
    for (std::size_t i = 0; i < ep_vecs.size(); ++i) store.episodic.episodes[i].vector = std::move(ep_vecs[i]);
    return store;
}

Json deltas_to_json(const std::map<std::size_t, ContentDelta>& deltas) {
    Json arr = Json::array();
    for (const auto& [idx, d] : deltas)
        arr.push_back({{"event_index", idx}, {"path", d.path}, {"kind", delta_kind_name(d.kind)}, {"body", d.body}});
    return arr;
}

std::map<std::size_t, ContentDelta> deltas_from_json(const Json& j) {
    if (!j.is_array()) throw InputError("deltas.json must be an array");
    std::map<std::size_t, ContentDelta> out;
    try {
        for (const auto& d : j) {
            const auto kind = d.at("kind").get<std::string>();
            if (kind != "snapshot" && kind != "patch") throw InputError("unknown delta kind '" + kind + "'");
            const auto idx = d.at("event_index").get<std::size_t>();
            if (!out.emplace(idx, ContentDelta{d.at("path").get<std::string>(),
                                               kind == "snapshot" ? DeltaKind::snapshot : DeltaKind::patch,
                                               d.at("body").get<std::string>()})
                     .second)
                throw InputError("duplicate delta for event " + std::to_string(idx));
        }
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed deltas.json: ") + e.what());
    }
    return out;
}

void write_bundle(const TrajectoryBundle& bundle, const fs::path& dir) {
    fs::create_directories(dir);
    const auto raw = to_raw(bundle.trajectory.events);
    write_text_file(dir / "events.json", serialize_event_log(raw));
    write_text_file(dir / "deltas.json", dump(deltas_to_json(bundle.trajectory.deltas)));
    write_text_file(dir / "captions.json", dump(Json(bundle.captions)));
    for (const auto& [path, contents] : bundle.output_files) {
        const fs::path rel(path);
        if (rel.is_absolute() || path.find("..") != std::string::npos)
            throw InputError("output path escapes the trajectory directory: " + path);
        write_text_file(dir / "outputs" / rel, contents);
    }
}

TrajectoryBundle read_bundle(const fs::path& dir, const std::string& profile_id, const std::string& task_id) {
    if (!fs::is_directory(dir)) throw InputError("no such trajectory directory: " + dir.string());
    TrajectoryBundle b;
    b.trajectory.profile_id = profile_id;
    b.trajectory.task_id = task_id;
    const auto raw = parse_event_log(read_text_file(dir / "events.json"));
    b.trajectory.events = clean_events(raw);
    if (fs::exists(dir / "deltas.json")) {
        try {
            b.trajectory.deltas = deltas_from_json(Json::parse(read_text_file(dir / "deltas.json")));
        } catch (const Json::parse_error& e) {
            throw InputError(std::string("deltas.json is not valid JSON: ") + e.what());
        }
    }
    if (fs::exists(dir / "captions.json")) {
        try {
            b.captions = Json::parse(read_text_file(dir / "captions.json")).get<std::map<std::string, std::string>>();
        } catch (const Json::exception& e) {
            throw InputError(std::string("malformed captions.json: ") + e.what());
        }
    }
    const auto outputs = dir / "outputs";
    if (fs::is_directory(outputs)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(outputs))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) b.output_files[fs::relative(f, outputs).generic_string()] = read_text_file(f);
    }
    return b;
}

void write_corpus(const Profile& profile, const GeneratorConfig& cfg, const Corpus& corpus, const fs::path& root) {
    const auto base = root / profile.id;
    Json perturbations = Json::array();
    for (const auto& p : corpus.manifest) perturbations.push_back(to_json(p));
    Json tasks = Json::array();
    for (const auto& b : corpus.bundles) tasks.push_back(b.trajectory.task_id);
    for (const auto& b : corpus.bundles) write_bundle(b, base / b.trajectory.task_id);
    write_text_file(base / "manifest.json", dump({{"profile", to_json(profile)},
                                                  {"seed", cfg.seed},
                                                  {"n", cfg.n},
                                                  {"k", cfg.k},
                                                  {"tasks", tasks},
                                                  {"perturbations", perturbations}}));
}

namespace {

bool is_trajectory_dir(const fs::path& p) { return fs::is_regular_file(p / "events.json"); }

std::vector<fs::path> sorted_subdirs(const fs::path& p) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_directory()) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

std::vector<CorpusEntry> list_corpus(const fs::path& path) {
    if (!fs::is_directory(path)) throw InputError("no such corpus directory: " + path.string());
    std::vector<CorpusEntry> out;
    auto scan_profile = [&](const fs::path& profile_dir) {
        for (const auto& task : sorted_subdirs(profile_dir))
            if (is_trajectory_dir(task))
                out.push_back({profile_dir.filename().string(), task.filename().string(), task});
    };
    const auto subdirs = sorted_subdirs(path);
    const bool profile_level = std::any_of(subdirs.begin(), subdirs.end(), is_trajectory_dir);
    if (profile_level)
        scan_profile(path);
    else
        for (const auto& d : subdirs) scan_profile(d);
    return out;
}

void write_engram(const Engram& engram, const fs::path& file) { write_text_file(file, dump(to_json(engram))); }

Engram read_engram(const fs::path& file) {
    try {
        return engram_from_json(Json::parse(read_text_file(file)));
    } catch (const Json::parse_error& e) {
        throw InputError(file.string() + " is not valid JSON: " + e.what());
    }
}

std::map<std::string, std::vector<fs::path>> list_engrams(const fs::path& path) {
    if (!fs::is_directory(path)) throw InputError("no such engram directory: " + path.string());
    std::map<std::string, std::vector<fs::path>> out;
    auto scan = [&](const fs::path& dir) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (!files.empty()) out[dir.filename().string()] = std::move(files);
    };
    scan(path);
    if (out.empty())
        for (const auto& d : sorted_subdirs(path)) scan(d);
    return out;
}

} // namespace fsmem
