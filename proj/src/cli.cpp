#include "fsmem/cli.hpp"

#include <algorithm>
#include <future>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "fsmem/config.hpp"
#include "fsmem/consolidator.hpp"
#include "fsmem/engram.hpp"
#include "fsmem/errors.hpp"
#include "fsmem/retriever.hpp"
#include "fsmem/storage.hpp"
#include "fsmem/synthgen.hpp"
#include "fsmem/text.hpp"

namespace fsmem {
namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::string config_file;
    bool fallback_only = false;
};

struct GenerateOptions {
    std::vector<std::string> profiles;
    bool all_profiles = false;
    std::size_t n = 32;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::size_t min_events = 20;
    std::size_t max_events = 60;
    std::string out = "corpus";
};

struct IngestOptions {
    std::string corpus;
    std::string out = "engrams";
    std::size_t jobs = 0;
};

struct ConsolidateOptions {
    std::string engrams;
    std::string out = "store";
};

struct StoreOptions {
    std::string store;
    std::string profile;
};

struct QueryOptions {
    StoreOptions where;
    std::string question;
    bool answer = false;
    std::vector<std::string> disabled;
    std::vector<std::string> dimensions;
    std::optional<std::size_t> display;
    std::optional<std::size_t> top_k;
};

PipelineConfig resolve_config(const GlobalOptions& g) {
    PipelineConfig cfg = load_config(g.config_file.empty() ? fs::path{} : fs::path(g.config_file));
    if (g.fallback_only) cfg.provider.fallback_only = true;
    cfg.validate();
    return cfg;
}

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
    std::vector<const Profile*> profiles;
    if (o.all_profiles)
        for (const auto& p : builtin_profiles()) profiles.push_back(&p);
    for (const auto& id : o.profiles) profiles.push_back(&find_profile(id));
    if (profiles.empty()) throw InputError("generate needs --profile or --all-profiles");

    GeneratorConfig cfg;
    cfg.n = o.n;
    cfg.k = o.k;
    cfg.seed = o.seed;
    cfg.min_events = o.min_events;
    cfg.max_events = o.max_events;
    for (const auto* p : profiles) {
        const auto corpus = generate_corpus(*p, cfg);
        write_corpus(*p, cfg, corpus, o.out);
        out << "generated " << corpus.bundles.size() << " trajectories for " << p->id << " ("
            << corpus.manifest.size() << " perturbed) in " << (fs::path(o.out) / p->id).string() << "\n";
    }
    return 0;
}

int cmd_ingest(const IngestOptions& o, const PipelineConfig& cfg, std::ostream& out) {
    const auto entries = list_corpus(o.corpus);
    if (entries.empty()) throw InputError("no trajectories found under " + o.corpus);
    const Providers providers = make_providers(cfg.provider);
    const auto encoder = cfg.encoder_options();

    std::size_t jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < entries.size(); start += jobs) {
        const auto stop = std::min(entries.size(), start + jobs);
        std::vector<std::future<Engram>> batch;
        for (std::size_t i = start; i < stop; ++i)
            batch.push_back(std::async(std::launch::async, [&, i] {
                const auto& e = entries[i];
                return encode_engram(read_bundle(e.dir, e.profile_id, e.task_id), providers, encoder);
            }));
        for (std::size_t i = start; i < stop; ++i) {
            const auto engram = batch[i - start].get();
            write_engram(engram, fs::path(o.out) / engram.profile_id / (engram.task_id + ".json"));
        }
    }
    out << "encoded " << entries.size() << " trajectories into " << o.out << "\n";
    return 0;
}

int cmd_consolidate(const ConsolidateOptions& o, const PipelineConfig& cfg, std::ostream& out) {
    const auto groups = list_engrams(o.engrams);
    if (groups.empty()) throw InputError("no engrams found under " + o.engrams);
    const Providers providers = make_providers(cfg.provider);
    for (const auto& [group, files] : groups) {
        std::vector<Engram> engrams;
        for (const auto& f : files) engrams.push_back(read_engram(f));
        const auto store = consolidate(engrams, providers, cfg.consolidation_options());
        const auto dir = fs::path(o.out) / store.profile_id;
        save_store(store, dir);
        out << "consolidated " << engrams.size() << " engrams for " << store.profile_id << " into " << dir.string()
            << "\n";
    }
    return 0;
}

std::vector<fs::path> resolve_stores(const StoreOptions& o) {
    const fs::path base(o.store);
    if (!o.profile.empty()) {
        if (is_store_dir(base / o.profile)) return {base / o.profile};
        if (is_store_dir(base)) return {base};
        throw InputError("no store for profile '" + o.profile + "' under " + o.store);
    }
    if (is_store_dir(base)) return {base};
    if (!fs::is_directory(base)) throw InputError("no such store directory: " + o.store);
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(base))
        if (entry.is_directory() && is_store_dir(entry.path())) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) {
        // Let load_store report which channel file is missing.
        return {base};
    }
    return out;
}

fs::path single_store(const StoreOptions& o) {
    const auto stores = resolve_stores(o);
    if (stores.size() != 1) throw InputError("several stores under " + o.store + "; pick one with --profile");
    return stores.front();
}

int cmd_detect(const StoreOptions& o, std::ostream& out) {
    for (const auto& dir : resolve_stores(o)) {
        const auto store = load_store(dir);
        const auto& dev = store.episodic.deviations;
        const auto& tasks = store.procedural.task_ids;
        out << "profile " << store.profile_id << ": " << store.procedural.trajectory_count << " sessions, "
            << cluster_count(store.episodic.behavior_modes) << " behavior mode(s)\n";
        if (dev.empty()) {
            out << "deviation report unavailable (fewer than two sessions)\n";
            continue;
        }
        out << "tau " << text::fixed(dev.tau) << ", mean " << text::fixed(dev.delta_mean) << ", std "
            << text::fixed(dev.delta_std) << ", threshold " << text::fixed(dev.threshold()) << "\n";
        for (std::size_t j = 0; j < dev.delta.size(); ++j)
            out << "  " << (j < tasks.size() ? tasks[j] : std::to_string(j)) << "  delta " << text::fixed(dev.delta[j])
                << (dev.flags[j] ? "  FLAGGED" : "") << "\n";
        const auto flagged = dev.flagged();
        out << "flagged: " << flagged.size() << "\n";
        for (const auto& v : store.episodic.verdicts)
            out << "  " << (v.trajectory_index < tasks.size() ? tasks[v.trajectory_index] : std::to_string(v.trajectory_index))
                << ": " << label_name(v.label) << " (" << v.rationale << ")\n";
    }
    return 0;
}

std::shared_ptr<Embedder> query_embedder(const MemoryStore& store, const PipelineConfig& cfg) {
    if (store.embedder_id == HashingEmbedder::kId) return std::make_shared<HashingEmbedder>(store.embedding_dim);
    return make_providers(cfg.provider).embedder;
}

int cmd_query(const QueryOptions& o, PipelineConfig cfg, std::ostream& out) {
    for (const auto& name : o.disabled) {
        auto c = channel_from_name(name);
        if (!c) throw ConfigError("unknown channel '" + name + "' (use proc, sem or epi)");
        cfg.disabled_channels.insert(*c);
    }
    if (o.display) cfg.display_limit = *o.display;
    if (o.top_k) cfg.top_k = *o.top_k;
    cfg.validate();

    Query q;
    q.text = o.question;
    for (const auto& d : o.dimensions) {
        auto dim = d.size() == 1 ? dimension_from_letter(static_cast<char>(std::toupper(static_cast<unsigned char>(d[0]))))
                                 : std::nullopt;
        if (!dim) throw ConfigError("unknown dimension '" + d + "' (use A-F)");
        q.dimensions.push_back(*dim);
    }

    const auto store = load_store(single_store(o.where));
    auto embedder = query_embedder(store, cfg);
    const auto ctx = retrieve_context(store, q, *embedder, cfg.retrieval_options());
    const auto rendered = render_context(ctx, cfg.display_limit);
    if (!o.answer) {
        out << rendered;
        return 0;
    }
    const auto providers = make_providers(cfg.provider);
    if (auto reply = try_complete(*providers.completion, answer_prompt(rendered, q.text)))
        out << *reply << "\n";
    else
        out << "no completion provider available; retrieved memory follows\n\n" << rendered;
    return 0;
}

int cmd_inspect(const StoreOptions& o, std::ostream& out) {
    for (const auto& dir : resolve_stores(o)) {
        const auto s = load_store(dir);
        out << "store " << dir.string() << "\n";
        out << "  profile " << s.profile_id << ", embedder " << s.embedder_id << " (dim " << s.embedding_dim << ")\n";
        out << "  procedural: " << s.procedural.trajectory_count << " sessions; tiers";
        for (const auto& t : s.procedural.tiers) out << " " << dimension_letter(t.dimension) << "=" << tier_letter(t.tier);
        out << "\n  semantic: " << s.semantic.chunks.size() << " chunks, " << s.semantic.metadata.created_files
            << " files created\n";
        out << "  episodic: " << s.episodic.episodes.size() << " episodes in " << s.episodic.episode_cluster_count
            << " theme(s), " << cluster_count(s.episodic.behavior_modes) << " behavior mode(s), "
            << (s.episodic.deviations.empty() ? 0 : s.episodic.deviations.flagged().size()) << " flagged session(s)\n";
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Three-channel behavioral memory built from file-system activity logs", "fsmem"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config_file, "key = value configuration file");
    app.add_flag("--fallback-only", g.fallback_only, "use the offline providers only");

    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic trajectory corpus");
    generate->add_option("--profile", gen.profiles, "built-in profile id (repeatable)");
    generate->add_flag("--all-profiles", gen.all_profiles, "generate for every built-in profile");
    generate->add_option("--n", gen.n, "trajectories per profile")->check(CLI::PositiveNumber);
    generate->add_option("--k", gen.k, "perturbed trajectories per profile");
    generate->add_option("--seed", gen.seed, "generator seed");
    generate->add_option("--min-events", gen.min_events, "minimum events per trajectory");
    generate->add_option("--max-events", gen.max_events, "maximum events per trajectory");
    generate->add_option("-o,--out", gen.out, "corpus root");

    IngestOptions ing;
    auto* ingest = app.add_subcommand("ingest", "encode every trajectory into an engram");
    ingest->add_option("corpus", ing.corpus, "corpus root or profile directory")->required();
    ingest->add_option("-o,--out", ing.out, "engram root");
    ingest->add_option("--jobs", ing.jobs, "parallel encoders (0 = hardware threads)");

    ConsolidateOptions con;
    auto* consolidate_cmd = app.add_subcommand("consolidate", "build one memory store per profile");
    consolidate_cmd->add_option("engrams", con.engrams, "engram root or profile directory")->required();
    consolidate_cmd->add_option("-o,--out", con.out, "store root");

    StoreOptions det;
    auto* detect = app.add_subcommand("detect", "print deviation scores and anomaly verdicts");
    detect->add_option("store", det.store, "store root or profile store")->required();
    detect->add_option("--profile", det.profile, "profile id under the store root");

    QueryOptions qo;
    auto* query = app.add_subcommand("query", "render the memory context for a question");
    query->add_option("store", qo.where.store, "store root or profile store")->required();
    query->add_option("question", qo.question, "question text")->required();
    query->add_option("--profile", qo.where.profile, "profile id under the store root");
    query->add_flag("--answer", qo.answer, "forward the context and question to the completion provider");
    query->add_option("--disable-channel", qo.disabled, "proc, sem or epi (repeatable)");
    query->add_option("--dimension", qo.dimensions, "explicit target dimension A-F (repeatable)");
    query->add_option("--display", qo.display, "preview length in characters (300-1000)");
    query->add_option("--top-k", qo.top_k, "chunks and episodes per channel");

    StoreOptions ins;
    auto* inspect = app.add_subcommand("inspect", "summarize a memory store");
    inspect->add_option("store", ins.store, "store root or profile store")->required();
    inspect->add_option("--profile", ins.profile, "profile id under the store root");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        err << "run 'fsmem --help' for usage\n";
        return 2;
    }

    try {
        if (*generate) return cmd_generate(gen, out);
        const auto cfg = resolve_config(g);
        if (*ingest) return cmd_ingest(ing, cfg, out);
        if (*consolidate_cmd) return cmd_consolidate(con, cfg, out);
        if (*detect) return cmd_detect(det, out);
        if (*query) return cmd_query(qo, cfg, out);
        if (*inspect) return cmd_inspect(ins, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace fsmem
