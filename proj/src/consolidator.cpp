#include "fsmem/consolidator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "fsmem/errors.hpp"
#include "fsmem/text.hpp"

namespace fsmem {

SummaryStats summarize(std::span<const double> values) {
    if (values.empty()) throw InputError("cannot summarize an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    SummaryStats s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(n));
    s.median = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    s.min = sorted.front();
    s.max = sorted.back();
    return s;
}

FeatureStats aggregate_procedural(std::span<const Fingerprint> fps) {
    if (fps.empty()) throw InputError("aggregate_procedural needs at least one fingerprint");
    FeatureStats stats;
    std::vector<double> column(fps.size());
    for (auto k : kAllFeatures) {
        for (std::size_t j = 0; j < fps.size(); ++j) column[j] = fps[j][k];
        stats[k] = summarize(column);
    }
    return stats;
}

std::vector<std::size_t> DeviationReport::flagged() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < flags.size(); ++j)
        if (flags[j]) out.push_back(j);
    return out;
}

DeviationReport detect_deviations(std::span<const Fingerprint> fps, double tau, double epsilon) {
    const std::size_t n = fps.size();
    if (n < 2) throw InputError("deviation detection needs at least two fingerprints");
    DeviationReport r;
    r.tau = tau;
    r.epsilon = epsilon;
    r.z = zscore_rows(fps, epsilon);
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        double sum = 0.0;
        for (const auto& row : r.z) sum += row[k];
        r.z_mean[k] = sum / static_cast<double>(n);
    }
    r.delta.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < kFeatureCount; ++k) s += (r.z[j][k] - r.z_mean[k]) * (r.z[j][k] - r.z_mean[k]);
        r.delta[j] = std::sqrt(s);
    }
    const auto ds = summarize(r.delta);
    r.delta_mean = ds.mean;
    r.delta_std = ds.std;
    const double threshold = r.threshold();
    r.flags.resize(n);
    for (std::size_t j = 0; j < n; ++j) r.flags[j] = r.delta[j] > threshold;
    return r;
}

std::string_view label_name(AnomalyLabel label) {
    switch (label) {
    case AnomalyLabel::variation: return "variation";
    case AnomalyLabel::outlier: return "outlier";
    case AnomalyLabel::uncertain: return "uncertain";
    }
    return "uncertain";
}

std::optional<AnomalyLabel> label_from_name(std::string_view name) {
    const auto l = text::lower(name);
    if (l == "variation") return AnomalyLabel::variation;
    if (l == "outlier") return AnomalyLabel::outlier;
    if (l == "uncertain") return AnomalyLabel::uncertain;
    return std::nullopt;
}

std::vector<FeatureDeviation> top_deviating_features(const FeatureVector& z, std::size_t limit) {
    std::vector<FeatureDeviation> all;
    for (auto k : kAllFeatures)
        if (z[index_of(k)] != 0.0) all.push_back({k, z[index_of(k)]});
    std::stable_sort(all.begin(), all.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.z) > std::abs(b.z); });
    if (all.size() > limit) all.resize(limit);
    return all;
}

CompletionRequest anomaly_prompt(const AnomalyContext& ctx) {
    CompletionRequest req;
    req.system = "You judge flagged sessions in a user's file-system activity history. A session is flagged when "
                 "its behavioral fingerprint sits far from the user's other sessions. Decide whether the "
                 "difference is a task-dependent variation, a genuine behavioral outlier, or uncertain.";
    std::ostringstream os;
    os << "Session " << ctx.trajectory_index << " (task " << ctx.task_id << ")\n";
    os << "Deviation " << text::fixed(ctx.delta) << " against threshold " << text::fixed(ctx.threshold) << "\n";
    os << "Most deviating features (z-scores):\n";
    for (const auto& f : ctx.top_features) os << "- " << feature_name(f.feature) << ": " << text::fixed(f.z) << "\n";
    os << "Behavior mode " << ctx.behavior_mode + 1 << " of " << ctx.mode_count << ", shared with "
       << ctx.mode_size << " session(s)\n";
    os << "Episode summaries:\n";
    for (const auto& s : ctx.episode_summaries) os << "- " << s << "\n";
    os << "\nReply with one word (variation, outlier or uncertain), a colon, and a one-sentence rationale.";
    req.user = os.str();
    req.max_output_tokens = 120;
    return req;
}

AnomalyVerdict parse_verdict(std::size_t trajectory_index, std::string_view reply) {
    AnomalyVerdict v;
    v.trajectory_index = trajectory_index;
    const auto body = text::trim(reply);

    if (!body.empty() && body.front() == '{') {
        try {
            const auto doc = Json::parse(body);
            if (auto label = label_from_name(doc.value("label", std::string()))) {
                v.label = *label;
                v.rationale = doc.value("rationale", std::string());
                return v;
            }
        } catch (const Json::exception&) {
        }
    } else {
        std::size_t i = 0;
        while (i < body.size() && !std::isalpha(static_cast<unsigned char>(body[i]))) ++i;
        std::size_t j = i;
        while (j < body.size() && std::isalpha(static_cast<unsigned char>(body[j]))) ++j;
        if (auto label = label_from_name(body.substr(i, j - i))) {
            v.label = *label;
            auto rest = body.substr(j);
            while (!rest.empty() && (rest.front() == ':' || rest.front() == '-' || rest.front() == '*' ||
                                     std::isspace(static_cast<unsigned char>(rest.front()))))
                rest.remove_prefix(1);
            v.rationale = std::string(text::trim(rest));
            return v;
        }
    }
    v.label = AnomalyLabel::uncertain;
    v.rationale = "unrecognised judge reply: " + text::truncate(body, 200);
    return v;
}

AnomalyVerdict fallback_judge(const AnomalyContext& ctx) {
    return {ctx.trajectory_index, AnomalyLabel::uncertain, "provider unavailable"};
}

AnomalyVerdict judge_anomaly(const AnomalyContext& ctx, CompletionProvider& llm) {
    auto reply = try_complete(llm, anomaly_prompt(ctx));
    if (!reply) return fallback_judge(ctx);
    return parse_verdict(ctx.trajectory_index, *reply);
}

TierEvidence classify_dimension(const FeatureStats& stats, Dimension dim, const TierThresholds& t) {
    TierEvidence ev;
    ev.dimension = dim;
    auto use = [&](FeatureKey k) {
        const double v = stats[k].mean;
        ev.features.emplace_back(k, v);
        return v;
    };
    switch (dim) {
    case Dimension::A: {
        const double search = use(FeatureKey::search_ratio);
        const double browse = use(FeatureKey::browse_ratio);
        if (std::max(search, browse) < t.a_activation) {
            ev.tier = Tier::L;
            ev.rule = "search and browse ratios below activation floor";
        } else if (search >= browse) {
            ev.tier = Tier::M;
            ev.rule = "search ratio dominates";
        } else {
            ev.tier = Tier::R;
            ev.rule = "browse ratio dominates";
        }
        break;
    }
    case Dimension::B: {
        const double len = use(FeatureKey::avg_output_length);
        use(FeatureKey::total_output_chars);
        ev.tier = len >= t.b_long ? Tier::L : len <= t.b_short ? Tier::R : Tier::M;
        ev.rule = "average output length";
        break;
    }
    case Dimension::C: {
        const double depth = use(FeatureKey::max_dir_depth);
        use(FeatureKey::dirs_created);
        ev.tier = depth >= t.c_deep ? Tier::L : depth > t.c_flat ? Tier::M : Tier::R;
        ev.rule = "mean maximum directory depth";
        break;
    }
    case Dimension::D: {
        const double small = use(FeatureKey::small_edit_ratio);
        use(FeatureKey::avg_lines_changed);
        ev.tier = small >= t.d_small ? Tier::L : small <= t.d_bulk ? Tier::R : Tier::M;
        ev.rule = "share of small edits";
        break;
    }
    case Dimension::E: {
        const double ratio = use(FeatureKey::delete_to_create);
        use(FeatureKey::total_deletes);
        ev.tier = ratio >= t.e_active ? Tier::L : ratio <= t.e_keep ? Tier::R : Tier::M;
        ev.rule = "deletions per created file";
        break;
    }
    case Dimension::F: {
        const double images = use(FeatureKey::image_files);
        const double structured = use(FeatureKey::structured_files);
        const double tables = use(FeatureKey::md_table_rows);
        if (images > 0.0 && images >= structured) {
            ev.tier = Tier::L;
            ev.rule = "image outputs dominate";
        } else if (structured > 0.0 || tables > 0.0) {
            ev.tier = Tier::M;
            ev.rule = "structured files or inline tables";
        } else {
            ev.tier = Tier::R;
            ev.rule = "text-only outputs";
        }
        break;
    }
    }
    return ev;
}

std::vector<std::pair<std::size_t, std::size_t>> select_chunks(std::span<const Engram> engrams,
                                                               std::span<const double> delta, std::size_t budget) {
    std::vector<std::size_t> order(engrams.size());
    std::iota(order.begin(), order.end(), 0);
    auto dev = [&](std::size_t j) { return j < delta.size() ? delta[j] : 0.0; };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dev(a) < dev(b); });

    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (auto j : order) {
        for (std::size_t c = 0; c < engrams[j].semantic.chunks.size(); ++c) {
            if (out.size() >= budget) return out;
            out.emplace_back(j, c);
        }
    }
    return out;
}

FileMetadata merge_metadata(std::span<const Engram> engrams) {
    FileMetadata m;
    std::set<std::string> seen;
    for (const auto& e : engrams) {
        const auto& src = e.semantic.metadata;
        for (const auto& [k, v] : src.languages) m.languages[k] += v;
        for (const auto& [k, v] : src.file_types) m.file_types[k] += v;
        for (const auto& [k, v] : src.naming) m.naming[k] += v;
        for (const auto& f : src.representative_files)
            if (m.representative_files.size() < 10 && seen.insert(f).second) m.representative_files.push_back(f);
        m.created_files += src.created_files;
        m.output_chars += src.output_chars;
    }
    return m;
}

namespace {

std::string fallback_summary(const std::vector<std::string>& descriptors) {
    std::vector<std::string> distinct;
    for (const auto& d : descriptors)
        if (std::find(distinct.begin(), distinct.end(), d) == distinct.end()) distinct.push_back(d);
    std::string out;
    for (const auto& d : distinct) {
        if (!out.empty()) out += ' ';
        out += d;
    }
    return out;
}

std::string cross_session_summary(const SemanticChannel& sem, CompletionProvider& llm) {
    CompletionRequest req;
    req.system = "You merge per-session style notes about one user into a single profile of how they produce content.";
    req.user = "Merged file metadata:\n" + to_json(sem.metadata).dump(2) + "\n\nPer-session descriptors:\n";
    for (std::size_t i = 0; i < sem.descriptors.size(); ++i)
        req.user += "- session " + std::to_string(i) + ": " + sem.descriptors[i] + "\n";
    req.user += "\nWrite two to four sentences summarizing the user's consistent style, formatting habits and level "
                "of detail, noting any distinct styles that recur.";
    req.max_output_tokens = 300;
    if (auto reply = try_complete(llm, req)) {
        auto trimmed = std::string(text::trim(*reply));
        if (!trimmed.empty()) return trimmed;
    }
    return fallback_summary(sem.descriptors);
}

} // namespace

MemoryStore consolidate(std::span<const Engram> engrams, const Providers& providers,
                        const ConsolidationOptions& options) {
    if (engrams.empty()) throw InputError("consolidate needs at least one engram");
    for (const auto& e : engrams)
        if (e.profile_id != engrams.front().profile_id)
            throw InputError("engrams belong to different profiles: '" + engrams.front().profile_id + "' and '" +
                             e.profile_id + "'");
    if (!providers.completion || !providers.embedder) throw ConfigError("providers are not configured");

    const std::size_t n = engrams.size();
    MemoryStore store;
    store.profile_id = engrams.front().profile_id;

    // Procedural channel.
    auto& proc = store.procedural;
    proc.trajectory_count = n;
    for (const auto& e : engrams) {
        proc.task_ids.push_back(e.task_id);
        proc.fingerprints.push_back(e.procedural);
    }
    proc.stats = aggregate_procedural(proc.fingerprints);
    for (auto d : kAllDimensions) proc.tiers[static_cast<std::size_t>(d)] = classify_dimension(proc.stats, d, options.tiers);

    // Episodic structure that chunk selection depends on.
    auto& epi = store.episodic;
    if (n >= 2) {
        epi.deviations = detect_deviations(proc.fingerprints, options.tau, options.epsilon);
    } else {
        epi.deviations.tau = options.tau;
        epi.deviations.epsilon = options.epsilon;
    }
    epi.behavior_modes = cluster_behavior_modes(proc.fingerprints, options.modes);

    // Semantic channel.
    auto& sem = store.semantic;
    sem.metadata = merge_metadata(engrams);
    for (const auto& e : engrams) sem.descriptors.push_back(e.semantic.descriptor);
    sem.summary = cross_session_summary(sem, *providers.completion);

    const auto selected = select_chunks(engrams, epi.deviations.delta, options.chunk_budget);
    std::vector<std::string> chunk_texts;
    for (auto [j, c] : selected) chunk_texts.push_back(engrams[j].semantic.chunks[c].text);

    std::vector<std::string> summaries, narratives;
    for (std::size_t j = 0; j < n; ++j)
        for (const auto& ep : engrams[j].episodic) {
            epi.episodes.push_back({j, ep, 0, {}});
            summaries.push_back(ep.title + ": " + ep.summary);
            narratives.push_back(ep.narrative);
        }

    std::shared_ptr<Embedder> embedder = providers.embedder;
    std::vector<EmbeddingVector> chunk_vecs, summary_vecs, narrative_vecs;
    auto embed_all = [&] {
        chunk_vecs = embedder->embed(chunk_texts);
        summary_vecs = embedder->embed(summaries);
        narrative_vecs = embedder->embed(narratives);
    };
    try {
        embed_all();
    } catch (const ProviderUnavailable&) {
        embedder = std::make_shared<HashingEmbedder>(providers.embedder->dimension());
        embed_all();
    }
    store.embedding_dim = embedder->dimension();
    store.embedder_id = embedder->id();

    for (std::size_t i = 0; i < selected.size(); ++i) {
        const auto [j, c] = selected[i];
        const auto& chunk = engrams[j].semantic.chunks[c];
        sem.chunks.push_back({std::move(chunk_vecs[i]), chunk.text, chunk.source_path, j, chunk.chunk_index});
    }

    if (!summary_vecs.empty()) {
        const auto labels = cluster_episode_summaries(summary_vecs, options.cluster_threshold);
        for (std::size_t i = 0; i < epi.episodes.size(); ++i) {
            epi.episodes[i].cluster = labels[i];
            epi.episodes[i].vector = std::move(narrative_vecs[i]);
        }
        epi.episode_cluster_count = cluster_count(labels);
    }

    // Anomaly judging for every flagged session.
    const std::size_t modes = cluster_count(epi.behavior_modes);
    for (auto j : epi.deviations.flagged()) {
        AnomalyContext ctx;
        ctx.trajectory_index = j;
        ctx.task_id = engrams[j].task_id;
        ctx.top_features = top_deviating_features(epi.deviations.z[j]);
        ctx.behavior_mode = epi.behavior_modes[j];
        ctx.mode_size = static_cast<std::size_t>(
            std::count(epi.behavior_modes.begin(), epi.behavior_modes.end(), epi.behavior_modes[j]));
        ctx.mode_count = modes;
        for (const auto& ep : engrams[j].episodic) ctx.episode_summaries.push_back(ep.summary);
        ctx.delta = epi.deviations.delta[j];
        ctx.threshold = epi.deviations.threshold();
        epi.verdicts.push_back(judge_anomaly(ctx, *providers.completion));
    }
    return store;
}

} // namespace fsmem
