#include "fsmem/retriever.hpp"

#include <algorithm>
#include <sstream>

#include "fsmem/errors.hpp"
#include "fsmem/text.hpp"

namespace fsmem {
namespace {

struct LexiconEntry {
    Dimension dim;
    std::vector<std::string_view> stems;
};

const std::vector<LexiconEntry>& lexicon() {
    static const std::vector<LexiconEntry> entries{
        {Dimension::A, {"read", "brows", "search", "skim"}},
        {Dimension::B, {"detail", "length", "tone", "verbos", "concise"}},
        {Dimension::C, {"folder", "director", "organiz", "organis", "nest", "hierarch"}},
        {Dimension::D, {"edit", "revis", "iterat", "rewrit"}},
        {Dimension::E, {"delet", "cleanup", "clean", "archiv", "keep"}},
        {Dimension::F, {"chart", "image", "visual", "table", "modalit"}},
    };
    return entries;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

template <class T, class Key>
void stable_rank(std::vector<T>& items, Key score) {
    std::stable_sort(items.begin(), items.end(), [&](const T& a, const T& b) { return score(a) > score(b); });
}

std::string tally_line(const std::map<std::string, std::size_t>& tally) {
    std::vector<std::pair<std::string, std::size_t>> items(tally.begin(), tally.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::string out;
    for (const auto& [k, v] : items) {
        if (!out.empty()) out += ", ";
        out += k + " " + std::to_string(v);
    }
    return out.empty() ? "none" : out;
}

} // namespace

std::optional<Channel> channel_from_name(std::string_view name) {
    const auto l = text::lower(name);
    if (l == "proc" || l == "procedural") return Channel::procedural;
    if (l == "sem" || l == "semantic") return Channel::semantic;
    if (l == "epi" || l == "episodic") return Channel::episodic;
    return std::nullopt;
}

std::vector<Dimension> extract_target_dimensions(const Query& q) {
    if (!q.dimensions.empty()) {
        std::vector<Dimension> dims = q.dimensions;
        std::sort(dims.begin(), dims.end());
        dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
        return dims;
    }
    const auto tokens = text::tokenize(q.text);
    const std::string lowered = text::lower(q.text);
    std::vector<Dimension> out;
    for (const auto& entry : lexicon()) {
        bool hit = std::any_of(tokens.begin(), tokens.end(), [&](const std::string& tok) {
            return std::any_of(entry.stems.begin(), entry.stems.end(),
                               [&](std::string_view stem) { return starts_with(tok, stem); });
        });
        if (entry.dim == Dimension::C && !hit)
            hit = lowered.find("file structure") != std::string::npos ||
                  lowered.find("structure of files") != std::string::npos;
        if (hit) out.push_back(entry.dim);
    }
    if (out.empty()) out.assign(kAllDimensions.begin(), kAllDimensions.end());
    return out;
}

RetrievalContext retrieve_context(const MemoryStore& store, const Query& q, Embedder& embedder,
                                  const RetrievalOptions& options) {
    if (embedder.dimension() != store.embedding_dim)
        throw ConfigError("query embedder dimension " + std::to_string(embedder.dimension()) +
                          " does not match store dimension " + std::to_string(store.embedding_dim));
    if (!store.embedder_id.empty() && embedder.id() != store.embedder_id)
        throw ConfigError("query embedder '" + embedder.id() + "' does not match store embedder '" +
                          store.embedder_id + "'");
    if (text::trim(q.text).empty()) throw InputError("query text is empty");

    const auto targets = extract_target_dimensions(q);
    RetrievalContext ctx;
    const bool need_embedding = !options.disabled.count(Channel::semantic) || !options.disabled.count(Channel::episodic);
    EmbeddingVector qv;
    if (need_embedding) {
        const std::vector<std::string> texts{q.text};
        qv = embedder.embed(texts).at(0);
        if (qv.size() != store.embedding_dim) throw ConfigError("query embedding has the wrong dimension");
    }

    if (!options.disabled.count(Channel::procedural)) {
        ProceduralBlock b;
        b.trajectory_count = store.procedural.trajectory_count;
        b.targets = targets;
        b.stats = store.procedural.stats;
        for (auto d : targets) b.tiers.push_back(store.procedural.tiers[static_cast<std::size_t>(d)]);
        for (auto d : kAllDimensions)
            if (std::find(targets.begin(), targets.end(), d) == targets.end())
                b.tiers.push_back(store.procedural.tiers[static_cast<std::size_t>(d)]);
        ctx.procedural = std::move(b);
    }

    if (!options.disabled.count(Channel::semantic)) {
        SemanticBlock b;
        b.metadata = store.semantic.metadata;
        b.summary = store.semantic.summary;
        for (const auto& c : store.semantic.chunks) {
            if (c.vector.size() != qv.size()) throw ConfigError("chunk index dimension mismatch");
            b.chunks.push_back({c.source_path, c.text, c.trajectory_index, c.chunk_index, cosine_similarity(qv, c.vector)});
        }
        stable_rank(b.chunks, [](const ScoredChunk& c) { return c.score; });
        if (b.chunks.size() > options.top_k) b.chunks.resize(options.top_k);
        ctx.semantic = std::move(b);
    }

    if (!options.disabled.count(Channel::episodic)) {
        const auto& epi = store.episodic;
        const auto& tasks = store.procedural.task_ids;
        auto task_of = [&](std::size_t j) { return j < tasks.size() ? tasks[j] : std::to_string(j); };
        EpisodicBlock b;
        b.modes.resize(cluster_count(epi.behavior_modes));
        for (std::size_t j = 0; j < epi.behavior_modes.size(); ++j) b.modes[epi.behavior_modes[j]].task_ids.push_back(task_of(j));
        b.episode_cluster_count = epi.episode_cluster_count;
        b.threshold = epi.deviations.empty() ? 0.0 : epi.deviations.threshold();
        for (auto j : epi.deviations.flagged()) {
            AnomalyEntry a;
            a.trajectory_index = j;
            a.task_id = task_of(j);
            a.delta = epi.deviations.delta[j];
            a.top_features = top_deviating_features(epi.deviations.z[j]);
            for (const auto& v : epi.verdicts)
                if (v.trajectory_index == j) a.verdict = v;
            b.anomalies.push_back(std::move(a));
        }
        for (const auto& rec : epi.episodes) {
            if (rec.vector.size() != qv.size()) throw ConfigError("episode index dimension mismatch");
            b.episodes.push_back({rec.trajectory_index, task_of(rec.trajectory_index), rec.episode.title,
                                  rec.episode.narrative, rec.cluster, cosine_similarity(qv, rec.vector)});
        }
        stable_rank(b.episodes, [](const ScoredEpisode& e) { return e.score; });
        if (b.episodes.size() > options.top_k) b.episodes.resize(options.top_k);
        ctx.episodic = std::move(b);
    }
    return ctx;
}

std::string render_preview(std::string_view body, std::size_t display_limit) {
    return text::truncate(body, display_limit, kTruncationMarker);
}

namespace {

void render_procedural(std::ostringstream& os, const ProceduralBlock& b) {
    os << kProceduralHeading << "\n\n";
    os << "Sessions analysed: " << b.trajectory_count << "\n";
    os << "Target dimensions:";
    for (auto d : b.targets) os << ' ' << dimension_letter(d);
    os << "\n\n";
    for (const auto& t : b.tiers) {
        os << "- " << dimension_letter(t.dimension) << " " << dimension_name(t.dimension) << ": "
           << tier_letter(t.tier) << " (" << tier_label(t.dimension, t.tier) << "); " << t.rule << ":";
        for (std::size_t i = 0; i < t.features.size(); ++i)
            os << (i ? ", " : " ") << feature_name(t.features[i].first) << "=" << text::fixed(t.features[i].second);
        os << "\n";
    }
    os << "\n| feature | mean | median | std | min | max |\n|---|---|---|---|---|---|\n";
    for (auto k : kAllFeatures) {
        const auto& s = b.stats[k];
        os << "| " << feature_name(k) << " | " << text::fixed(s.mean) << " | " << text::fixed(s.median) << " | "
           << text::fixed(s.std) << " | " << text::fixed(s.min) << " | " << text::fixed(s.max) << " |\n";
    }
    os << "\n";
}

void render_semantic(std::ostringstream& os, const SemanticBlock& b, std::size_t limit) {
    os << kSemanticHeading << "\n\n";
    os << "File types: " << tally_line(b.metadata.file_types) << "\n";
    os << "Languages: " << tally_line(b.metadata.languages) << "\n";
    os << "Naming: " << tally_line(b.metadata.naming) << "\n";
    os << "Files created: " << b.metadata.created_files << ", mean length "
       << text::fixed(b.metadata.mean_output_length(), 0) << " chars\n";
    os << "Representative files:";
    if (b.metadata.representative_files.empty()) os << " none";
    for (std::size_t i = 0; i < b.metadata.representative_files.size(); ++i)
        os << (i ? ", " : " ") << text::middle_truncate(b.metadata.representative_files[i], kFilenameLimit);
    os << "\n\nStyle summary:\n" << render_preview(b.summary, limit) << "\n\n";
    for (std::size_t i = 0; i < b.chunks.size(); ++i) {
        const auto& c = b.chunks[i];
        os << "### Chunk " << i + 1 << ": " << text::middle_truncate(c.source_path, kFilenameLimit) << " (score "
           << text::fixed(c.score) << ")\n"
           << render_preview(c.text, limit) << "\n\n";
    }
}

void render_episodic(std::ostringstream& os, const EpisodicBlock& b, std::size_t limit) {
    os << kEpisodicHeading << "\n\n";
    os << "Behavior modes: " << b.modes.size() << "\n";
    for (std::size_t m = 0; m < b.modes.size(); ++m) {
        os << "- Mode " << m + 1 << " (" << b.modes[m].task_ids.size() << " sessions):";
        for (std::size_t i = 0; i < b.modes[m].task_ids.size(); ++i) os << (i ? ", " : " ") << b.modes[m].task_ids[i];
        os << "\n";
    }
    os << "Recurring episode themes: " << b.episode_cluster_count << "\n\n";
    os << "Anomalous sessions (deviation threshold " << text::fixed(b.threshold) << "):";
    if (b.anomalies.empty()) os << " none";
    os << "\n";
    for (const auto& a : b.anomalies) {
        os << "- " << a.task_id << " (session " << a.trajectory_index << "): deviation " << text::fixed(a.delta);
        if (a.verdict) os << ", verdict " << label_name(a.verdict->label) << ": " << render_preview(a.verdict->rationale, limit);
        os << "; top features:";
        for (std::size_t i = 0; i < a.top_features.size(); ++i)
            os << (i ? ", " : " ") << feature_name(a.top_features[i].feature) << " z=" << text::fixed(a.top_features[i].z);
        os << "\n";
    }
    os << "\n";
    for (std::size_t i = 0; i < b.episodes.size(); ++i) {
        const auto& e = b.episodes[i];
        os << "### Episode " << i + 1 << ": " << e.title << " (" << e.task_id << ", score " << text::fixed(e.score)
           << ")\n"
           << render_preview(e.narrative, limit) << "\n\n";
    }
}

} // namespace

std::string render_context(const RetrievalContext& ctx, std::size_t display_limit) {
    std::ostringstream os;
    if (ctx.procedural) render_procedural(os, *ctx.procedural);
    if (ctx.semantic) render_semantic(os, *ctx.semantic, display_limit);
    if (ctx.episodic) render_episodic(os, *ctx.episodic, display_limit);
    return os.str();
}

CompletionRequest answer_prompt(std::string_view rendered_context, std::string_view question) {
    CompletionRequest req;
    req.system = "You answer questions about a user using only the memory provided. If the memory does not "
                 "support an answer, say so.";
    req.user = "Memory:\n";
    req.user += rendered_context;
    req.user += "\nQuestion: ";
    req.user += question;
    req.max_output_tokens = 512;
    return req;
}

} // namespace fsmem
