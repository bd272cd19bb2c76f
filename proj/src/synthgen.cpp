#include "fsmem/synthgen.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "fsmem/errors.hpp"
#include "fsmem/text.hpp"

namespace fsmem {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

bool Rng::chance(double p) { return unit() < p; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

constexpr std::array<std::string_view, kAttributeCount> kAttributeNames{
    "reading_strategy", "thoroughness",   "tone",           "output_detail",
    "output_structure", "documentation",  "directory_style", "naming",
    "version_strategy", "edit_strategy",  "error_handling", "revision_depth",
    "working_style",    "cleanup_policy", "cross_modal",    "output_modality"};

constexpr std::array<Dimension, kAttributeCount> kAttributeDims{
    Dimension::A, Dimension::A, Dimension::B, Dimension::B, Dimension::B, Dimension::B,
    Dimension::C, Dimension::C, Dimension::C, Dimension::D, Dimension::D, Dimension::D,
    Dimension::E, Dimension::E, Dimension::F, Dimension::F};

} // namespace

std::string_view attribute_name(Attribute a) { return kAttributeNames[static_cast<std::size_t>(a)]; }

std::optional<Attribute> attribute_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kAttributeCount; ++i)
        if (kAttributeNames[i] == name) return static_cast<Attribute>(i);
    return std::nullopt;
}

Dimension attribute_dimension(Attribute a) { return kAttributeDims[static_cast<std::size_t>(a)]; }

Tier Profile::tier(Dimension d) const {
    for (std::size_t i = 0; i < kAttributeCount; ++i)
        if (kAttributeDims[i] == d) return attributes[i];
    return Tier::M;
}

bool Profile::consistent() const {
    for (std::size_t i = 0; i < kAttributeCount; ++i)
        if (attributes[i] != tier(kAttributeDims[i])) return false;
    return true;
}

Profile make_profile(std::string id, std::string name, std::string role, std::string language,
                     const std::array<Tier, kDimensionCount>& tiers) {
    Profile p{std::move(id), std::move(name), std::move(role), std::move(language), {}};
    for (std::size_t i = 0; i < kAttributeCount; ++i) p.attributes[i] = tiers[static_cast<std::size_t>(kAttributeDims[i])];
    return p;
}

const std::vector<Profile>& builtin_profiles() {
    static const std::vector<Profile> profiles = [] {
        struct Row {
            const char* id;
            const char* name;
            const char* role;
            const char* tiers;
        };
        static constexpr Row rows[] = {
            {"p1", "Chen Wei", "Research Analyst", "LLLLLM"},
            {"p2", "Liu Jing", "Policy Analyst", "LLRRLM"},
            {"p3", "Sam Taylor", "Ops Manager", "MRRRMR"},
            {"p4", "Nakamura Yuki", "Finance Consultant", "MLMLRL"},
            {"p5", "Maria Santos", "Marketing Coordinator", "RMMMRM"},
            {"p6", "Alex Kim", "Event Planner", "RMLRMR"},
            {"p7", "Zhang Meilin", "Curriculum Designer", "LMMMML"},
            {"p8", "Jordan Rivera", "Technical Writer", "RRMLRR"},
            {"p9", "Li Hao", "UX Researcher", "MMLMLL"},
            {"p10", "Emily Okafor", "Quality Auditor", "LRRRRM"},
            {"p11", "Priya Sharma", "Supply Chain Analyst", "MLLLLR"},
            {"p12", "Wang Fang", "Journalism Editor", "RLRLMM"},
            {"p13", "Zhao Ming", "Landscape Architect", "LMLMLL"},
            {"p14", "Daniel Osei", "Compliance Officer", "MRLLMR"},
            {"p15", "Sophie Laurent", "Project Manager", "RLMMRM"},
            {"p16", "Marcus Chen", "Data Analyst", "MMRMLR"},
            {"p17", "Chen Wenjing", "Museum Curator", "LLLLML"},
            {"p18", "Aisha Johnson", "Executive Assistant", "RRRRLM"},
            {"p19", "Lin Xiaoyu", "Social Media Manager", "MMRMMR"},
            {"p20", "Tom O'Brien", "Building Inspector", "LRMRRL"},
        };
        std::vector<Profile> out;
        for (const auto& r : rows) {
            std::array<Tier, kDimensionCount> tiers{};
            for (std::size_t d = 0; d < kDimensionCount; ++d) tiers[d] = *tier_from_letter(r.tiers[d]);
            out.push_back(make_profile(r.id, r.name, r.role, "English", tiers));
        }
        return out;
    }();
    return profiles;
}

const Profile& find_profile(std::string_view id) {
    for (const auto& p : builtin_profiles())
        if (p.id == id) return p;
    throw InputError("unknown profile '" + std::string(id) + "'");
}

std::string_view direction_name(Direction d) { return d == Direction::toward_L ? "toward_L" : "toward_R"; }

std::optional<Direction> direction_from_name(std::string_view name) {
    if (name == "toward_L") return Direction::toward_L;
    if (name == "toward_R") return Direction::toward_R;
    return std::nullopt;
}

Profile perturb_profile(const Profile& p, Dimension dim, Direction dir) {
    const auto current = static_cast<int>(p.tier(dim));
    const int shifted = current + (dir == Direction::toward_L ? -1 : 1);
    if (shifted < 0 || shifted > 2)
        throw RangeError(std::string("cannot shift dimension ") + dimension_letter(dim) + " " +
                         std::string(direction_name(dir)) + " from tier " + tier_letter(p.tier(dim)));
    Profile out = p;
    for (std::size_t i = 0; i < kAttributeCount; ++i)
        if (kAttributeDims[i] == dim) out.attributes[i] = static_cast<Tier>(shifted);
    return out;
}

std::string_view task_type_name(TaskType t) {
    switch (t) {
    case TaskType::understand: return "understand";
    case TaskType::create: return "create";
    case TaskType::organize: return "organize";
    case TaskType::synthesize: return "synthesize";
    case TaskType::iterate: return "iterate";
    case TaskType::maintain: return "maintain";
    }
    return "understand";
}

std::vector<std::string> default_task_pool() {
    std::vector<std::string> pool;
    for (int i = 1; i <= 32; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "T-%02d", i);
        pool.emplace_back(buf);
    }
    return pool;
}

namespace {

std::size_t task_number(std::string_view task_id) {
    std::size_t n = 0;
    bool digits = false;
    for (char c : task_id) {
        if (c >= '0' && c <= '9') {
            n = n * 10 + static_cast<std::size_t>(c - '0');
            digits = true;
        }
    }
    return digits && n > 0 ? n : static_cast<std::size_t>(text::fnv1a(task_id) % 1000) + 1;
}

} // namespace

TaskType task_type_of(std::string_view task_id) { return static_cast<TaskType>((task_number(task_id) - 1) % 6); }

namespace {

const std::vector<std::string> kWords{
    "analysis", "baseline", "budget",   "client",   "context",  "data",     "deadline", "draft",
    "estimate", "evidence", "feedback", "figure",   "finding",  "forecast", "goal",     "impact",
    "index",    "insight",  "item",     "method",   "metric",   "milestone", "note",    "outline",
    "overview", "plan",     "policy",   "priority", "process",  "proposal", "quality",  "question",
    "record",   "region",   "report",   "request",  "review",   "risk",     "sample",   "schedule",
    "scope",    "section",  "source",   "status",   "summary",  "survey",   "table",    "target",
    "team",     "timeline", "topic",    "trend",    "update",   "value",    "vendor",   "version",
    "the",      "a",        "of",       "and",      "for",      "with",     "on",       "in",
    "shows",    "covers",   "lists",    "notes",    "tracks",   "compares", "explains", "checks"};

const std::vector<std::string> kTopics{
    "market", "budget", "survey", "travel", "lesson", "audit", "inventory", "exhibit",
    "policy", "campaign", "hiring", "safety", "venue", "grant", "pricing", "outreach"};

const std::vector<std::string> kSubdirs{"drafts", "final", "assets", "notes", "archive", "sources"};

std::string hex_hash(std::string_view s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(text::fnv1a(s)));
    return buf;
}

std::string salad_line(Rng& rng, std::size_t target) {
    std::string line;
    while (line.size() < target) {
        if (!line.empty()) line += ' ';
        line += rng.pick(kWords);
    }
    return line;
}

std::string prose(Rng& rng, std::size_t length, const std::string& title, std::size_t table_rows) {
    std::string body = "# " + title + "\n\n";
    if (table_rows > 0) {
        body += "| item | value |\n|---|---|\n";
        for (std::size_t r = 0; r < table_rows; ++r)
            body += "| " + rng.pick(kWords) + " | " + std::to_string(rng.between(1, 999)) + " |\n";
        body += "\n";
    }
    while (body.size() < length) body += salad_line(rng, static_cast<std::size_t>(rng.between(40, 76))) + "\n";
    body.resize(length);
    return body;
}

std::string structured(Rng& rng, std::size_t length, const std::string& ext) {
    std::string body = ext == "csv" ? "id,label,value\n" : "items:\n";
    for (int row = 1; body.size() < length; ++row) {
        if (ext == "csv")
            body += std::to_string(row) + "," + rng.pick(kWords) + "," + std::to_string(rng.between(1, 9999)) + "\n";
        else
            body += "  - id: " + std::to_string(row) + "\n    label: " + rng.pick(kWords) + "\n";
    }
    body.resize(length);
    return body;
}

std::vector<std::string> split_keep(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto nl = s.find('\n', start);
        if (nl == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, nl - start));
        start = nl + 1;
    }
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

std::int64_t path_depth(std::string_view path) {
    return static_cast<std::int64_t>(std::count(path.begin(), path.end(), '/'));
}

std::string dir_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    return slash == std::string::npos ? "" : path.substr(0, slash);
}

std::string base_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string join_path(const std::string& dir, const std::string& name) { return dir.empty() ? name : dir + "/" + name; }

struct Step {
    ActionData data;
    std::optional<ContentDelta> delta;
};

struct OutFile {
    std::string path;
    std::string ext;
    std::string content;
    bool image = false;
    bool structured = false;
};

struct Ranges {
    std::int64_t lo, hi;
};

Ranges output_length_range(Tier b) {
    switch (b) {
    case Tier::L: return {3500, 6000};
    case Tier::M: return {1200, 2400};
    case Tier::R: return {300, 700};
    }
    return {1200, 2400};
}

class TrajectoryGenerator {
public:
    TrajectoryGenerator(const Profile& p, const std::string& task, std::uint64_t seed)
        : p_(p), task_(task), rng_(seed), type_(task_type_of(task)),
          topic_(kTopics[(task_number(task) - 1) % kTopics.size()]) {}

    TrajectoryBundle run(std::size_t min_events, std::size_t max_events) {
        make_inputs();
        consumption();
        directories();
        creates();
        edits();
        versioning();
        moves();
        renames();
        deletes();
        pad_flow(min_events, max_events);
        return assemble();
    }

private:
    const Profile& p_;
    std::string task_;
    Rng rng_;
    TaskType type_;
    std::string topic_;

    std::vector<std::string> inputs_;
    std::map<std::string, std::int64_t> input_lengths_;
    std::vector<std::string> dirs_;
    std::vector<OutFile> files_;
    std::map<std::string, std::string> captions_;
    std::vector<Step> steps_;
    int name_seq_ = 0;

    Tier tier(Dimension d) const { return p_.tier(d); }

    void push(ActionData d, std::optional<ContentDelta> delta = std::nullopt) {
        steps_.push_back({std::move(d), std::move(delta)});
    }

    void make_inputs() {
        static const std::vector<std::string> exts{"md", "txt", "pdf", "docx", "csv"};
        const auto n = rng_.between(6, 10);
        for (std::int64_t i = 0; i < n; ++i) {
            const std::string dir = i % 3 == 2 ? "inputs/refs" : "inputs";
            const std::string path = dir + "/" + topic_ + "_" + rng_.pick(kWords) + "_" + std::to_string(i + 1) + "." +
                                     rng_.pick(exts);
            inputs_.push_back(path);
            input_lengths_[path] = rng_.between(500, 20000);
        }
    }

    void consumption() {
        const auto total = rng_.between(10, 20);
        std::int64_t searches = 0, browses = 0;
        switch (tier(Dimension::A)) {
        case Tier::L:
            searches = rng_.between(0, total / 10);
            browses = rng_.between(0, total / 6);
            break;
        case Tier::M:
            searches = rng_.between((35 * total + 99) / 100, (total + 1) / 2);
            browses = rng_.between(0, total / 6);
            break;
        case Tier::R:
            browses = rng_.between((45 * total + 99) / 100, (55 * total + 99) / 100);
            searches = rng_.between(0, total / 10);
            break;
        }
        const auto reads = total - searches - browses;
        const double revisit = tier(Dimension::A) == Tier::L ? 0.4 : tier(Dimension::A) == Tier::M ? 0.25 : 0.1;

        std::vector<Step> batch;
        for (std::int64_t i = 0; i < reads; ++i) {
            FileRead r;
            r.path = rng_.pick(inputs_);
            r.file_type = r.path.substr(r.path.find_last_of('.') + 1);
            r.depth = path_depth(r.path);
            r.length = input_lengths_[r.path];
            if (rng_.chance(revisit)) {
                r.view_count = rng_.between(2, 3);
                r.revisit_ms = rng_.between(10000, 600000);
            }
            if (rng_.chance(0.3)) r.view_range = "1-" + std::to_string(rng_.between(20, 200));
            batch.push_back({r, std::nullopt});
        }
        for (std::int64_t i = 0; i < browses; ++i) {
            FileBrowse b;
            b.dir_path = rng_.chance(0.6) ? "inputs" : "inputs/refs";
            b.depth = path_depth(b.dir_path) + 1;
            b.files_listed = rng_.between(2, 12);
            batch.push_back({b, std::nullopt});
        }
        static const std::vector<std::string> search_types{"keyword", "filename", "content"};
        for (std::int64_t i = 0; i < searches; ++i) {
            FileSearch s;
            s.search_type = rng_.pick(search_types);
            s.query = topic_ + " " + rng_.pick(kWords);
            s.files_matched = rng_.between(0, 8);
            s.files_opened = rng_.between(0, s.files_matched);
            batch.push_back({s, std::nullopt});
        }
        rng_.shuffle(batch);
        for (auto& s : batch) steps_.push_back(std::move(s));
    }

    void add_dir(const std::string& path, std::int64_t siblings) {
        dirs_.push_back(path);
        push(DirCreate{path, path_depth(path) + 1, siblings});
    }

    void directories() {
        switch (tier(Dimension::C)) {
        case Tier::L: {
            const auto depth = rng_.between(3, 4);
            std::vector<std::string> chain{"projects", topic_, "2024", "drafts"};
            std::string path;
            for (std::int64_t d = 0; d < depth; ++d) {
                path = join_path(path, chain[static_cast<std::size_t>(d)]);
                add_dir(path, 0);
            }
            const auto extra = rng_.between(0, 2);
            for (std::int64_t i = 0; i < extra; ++i) {
                const std::string sib = "projects/" + topic_ + "/" + kSubdirs[static_cast<std::size_t>(i) + 1];
                add_dir(sib, i + 1);
            }
            break;
        }
        case Tier::M: {
            const auto depth = rng_.between(1, 2);
            add_dir("work", 0);
            if (depth == 2) add_dir("work/" + rng_.pick(kSubdirs), 0);
            if (rng_.chance(0.5)) add_dir("notes", 1);
            break;
        }
        case Tier::R: break;
        }
    }

    std::string file_name(const std::string& ext) {
        ++name_seq_;
        const auto& w = rng_.pick(kWords);
        char seq[16];
        std::snprintf(seq, sizeof seq, "%02d", name_seq_);
        switch (p_.attribute(Attribute::naming)) {
        case Tier::L: return std::string(seq) + "_" + topic_ + "_" + w + "_v1." + ext;
        case Tier::M: return topic_ + "-" + w + "-" + std::to_string(name_seq_) + "." + ext;
        case Tier::R: {
            std::string cap = w;
            cap[0] = static_cast<char>(cap[0] - 'a' + 'A');
            return cap + " " + topic_ + " " + std::to_string(name_seq_) + "." + ext;
        }
        }
        return w + "." + ext;
    }

    std::string placement() {
        if (dirs_.empty()) return "";
        if (tier(Dimension::C) == Tier::L) {
            // deepest directory most of the time
            auto deepest = *std::max_element(dirs_.begin(), dirs_.end(), [](const auto& a, const auto& b) {
                return path_depth(a) < path_depth(b);
            });
            return rng_.chance(0.7) ? deepest : rng_.pick(dirs_);
        }
        return rng_.chance(0.25) ? "" : rng_.pick(dirs_);
    }

    void creates() {
        auto count = rng_.between(4, 8);
        if (type_ == TaskType::create) count = std::min<std::int64_t>(count + 1, 8);
        std::int64_t images = 0, structured_count = 0;
        const Tier f = tier(Dimension::F);
        if (f == Tier::L) images = rng_.between(2, 3);
        if (f == Tier::M) structured_count = rng_.between(1, 2);
        const auto len = output_length_range(tier(Dimension::B));
        static const std::vector<std::string> image_exts{"png", "jpg", "svg"};
        static const std::vector<std::string> struct_exts{"csv", "yaml"};

        std::vector<int> kinds; // 0 text, 1 structured, 2 image
        for (std::int64_t i = 0; i < count - images - structured_count; ++i) kinds.push_back(0);
        for (std::int64_t i = 0; i < structured_count; ++i) kinds.push_back(1);
        for (std::int64_t i = 0; i < images; ++i) kinds.push_back(2);
        rng_.shuffle(kinds);
        if (kinds.front() != 0) std::swap(kinds.front(), *std::find(kinds.begin(), kinds.end(), 0));

        for (int kind : kinds) {
            OutFile f_out;
            const auto length = static_cast<std::size_t>(rng_.between(len.lo, len.hi));
            if (kind == 2) {
                f_out.ext = rng_.pick(image_exts);
                f_out.image = true;
            } else if (kind == 1) {
                f_out.ext = rng_.pick(struct_exts);
                f_out.structured = true;
            } else {
                f_out.ext = rng_.chance(0.8) ? "md" : "txt";
            }
            f_out.path = join_path(placement(), file_name(f_out.ext));

            FileWrite w;
            w.path = f_out.path;
            w.file_type = f_out.ext;
            w.operation = "create";
            w.length = static_cast<std::int64_t>(length);
            if (f_out.image) {
                w.media_ref = "media/" + hex_hash(f_out.path + task_) + "." + f_out.ext;
                w.after_hash = hex_hash(*w.media_ref);
                captions_[f_out.path] = "Chart of " + topic_ + " " + rng_.pick(kWords) + " by " + rng_.pick(kWords) +
                                        ", " + salad_line(rng_, 40);
                push(w);
            } else {
                if (f_out.structured)
                    f_out.content = structured(rng_, length, f_out.ext);
                else {
                    const std::size_t rows = (f == Tier::M && f_out.ext == "md") ? static_cast<std::size_t>(rng_.between(2, 5)) : 0;
                    f_out.content = prose(rng_, length, topic_ + " " + rng_.pick(kWords), rows);
                }
                w.after_hash = hex_hash(f_out.content);
                push(w, ContentDelta{f_out.path, DeltaKind::snapshot, f_out.content});
            }
            files_.push_back(std::move(f_out));
        }
    }

    std::vector<std::size_t> editable() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < files_.size(); ++i)
            if (!files_[i].image && !files_[i].structured) idx.push_back(i);
        return idx;
    }

    void edits() {
        std::int64_t count = 0;
        switch (tier(Dimension::D)) {
        case Tier::L: count = rng_.between(5, 8); break;
        case Tier::M: count = rng_.between(4, 6); break;
        case Tier::R: count = rng_.between(3, 4); break;
        }
        if (type_ == TaskType::iterate) count = std::min<std::int64_t>(count + 1, 8);

        std::vector<bool> small(static_cast<std::size_t>(count), false);
        switch (tier(Dimension::D)) {
        case Tier::L:
            std::fill(small.begin(), small.end(), true);
            for (std::int64_t i = 0; i < count / 5; ++i) small[static_cast<std::size_t>(i)] = false;
            break;
        case Tier::M:
            for (std::int64_t i = 0; i < count / 2; ++i) small[static_cast<std::size_t>(i)] = true;
            break;
        case Tier::R: break;
        }
        rng_.shuffle(small);

        const auto targets = editable();
        for (std::int64_t e = 0; e < count; ++e) {
            std::int64_t delta = 0;
            if (tier(Dimension::D) == Tier::R)
                delta = rng_.between(40, 150);
            else
                delta = small[static_cast<std::size_t>(e)] ? rng_.between(1, 8) : rng_.between(15, 40);
            apply_edit(files_[rng_.pick(targets)], delta);
        }
    }

    void apply_edit(OutFile& file, std::int64_t delta) {
        auto lines = split_keep(file.content);
        const auto before = file.content;
        const auto pos = static_cast<std::size_t>(rng_.between(0, static_cast<std::int64_t>(lines.size())));
        const auto available = static_cast<std::int64_t>(lines.size() - pos);
        const auto deleted = rng_.between(0, std::min(delta / 2, available));
        const auto added = delta - deleted;

        std::string patch = "@@ -" + std::to_string(pos + 1) + "," + std::to_string(deleted) + " +" +
                            std::to_string(pos + 1) + "," + std::to_string(added) + " @@\n";
        for (std::int64_t i = 0; i < deleted; ++i) patch += "-" + lines[pos + static_cast<std::size_t>(i)] + "\n";
        std::vector<std::string> fresh;
        for (std::int64_t i = 0; i < added; ++i) {
            fresh.push_back(salad_line(rng_, static_cast<std::size_t>(rng_.between(30, 70))));
            patch += "+" + fresh.back() + "\n";
        }
        lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(pos),
                    lines.begin() + static_cast<std::ptrdiff_t>(pos) + deleted);
        lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(pos), fresh.begin(), fresh.end());
        file.content = join_lines(lines);

        FileEdit e;
        e.path = file.path;
        e.tool = "editor";
        e.lines_added = added;
        e.lines_deleted = deleted;
        e.before_hash = hex_hash(before);
        e.after_hash = hex_hash(file.content);
        push(e, ContentDelta{file.path, DeltaKind::patch, patch});
    }

    void versioning() {
        const auto targets = editable();
        OutFile& src = files_[rng_.pick(targets)];
        switch (p_.attribute(Attribute::version_strategy)) {
        case Tier::L: {
            auto name = base_of(src.path);
            auto at = name.rfind("_v1.");
            if (at != std::string::npos) name.replace(at, 4, "_v2.");
            else name.insert(name.find_last_of('.'), "_v2");
            OutFile copy = src;
            copy.path = join_path(dir_of(src.path), name);
            push(FileCopy{src.path, copy.path, false});
            files_.push_back(std::move(copy));
            break;
        }
        case Tier::M: {
            OutFile copy = src;
            auto name = base_of(src.path);
            name.insert(name.find_last_of('.'), "_backup");
            copy.path = join_path(dir_of(src.path), name);
            push(FileCopy{src.path, copy.path, true});
            files_.push_back(std::move(copy));
            break;
        }
        case Tier::R: {
            FileWrite w;
            w.path = src.path;
            w.file_type = src.ext;
            w.operation = "overwrite";
            w.before_hash = hex_hash(src.content);
            w.after_hash = w.before_hash;
            push(w);
            break;
        }
        }
    }

    void moves() {
        if (dirs_.empty()) return;
        std::int64_t count = tier(Dimension::C) == Tier::L ? rng_.between(1, 2) : rng_.between(0, 1);
        if (type_ == TaskType::organize) ++count;
        for (std::int64_t m = 0; m < count; ++m) {
            const auto& dest = rng_.pick(dirs_);
            std::vector<std::size_t> candidates;
            for (std::size_t i = 0; i < files_.size(); ++i)
                if (dir_of(files_[i].path) != dest) candidates.push_back(i);
            if (candidates.empty()) return;
            OutFile& f = files_[rng_.pick(candidates)];
            const auto target = join_path(dest, base_of(f.path));
            if (std::any_of(files_.begin(), files_.end(), [&](const OutFile& o) { return o.path == target; })) continue;
            push(FileMove{f.path, target, path_depth(target)});
            rename_caption(f.path, target);
            f.path = target;
        }
    }

    void renames() {
        if (type_ != TaskType::maintain) return;
        const auto targets = editable();
        OutFile& f = files_[rng_.pick(targets)];
        const auto target = join_path(dir_of(f.path), "final_" + base_of(f.path));
        FileRename r;
        r.old_path = f.path;
        r.new_path = target;
        r.naming_pattern = "prefix";
        push(r);
        f.path = target;
    }

    void rename_caption(const std::string& from, const std::string& to) {
        auto it = captions_.find(from);
        if (it == captions_.end()) return;
        captions_[to] = it->second;
        captions_.erase(from);
    }

    void deletes() {
        std::int64_t created = 0;
        for (const auto& s : steps_)
            if (const auto* w = std::get_if<FileWrite>(&s.data); w && w->is_create()) ++created;
        std::int64_t count = 0;
        switch (tier(Dimension::E)) {
        case Tier::L: count = (4 * created + 9) / 10; break;
        case Tier::M: count = 1; break;
        case Tier::R: break;
        }
        std::vector<std::string> pool;
        for (const auto& in : inputs_)
            if (std::find(pool.begin(), pool.end(), in) == pool.end()) pool.push_back(in);
        rng_.shuffle(pool);
        for (std::int64_t i = 0; i < count && i < static_cast<std::int64_t>(pool.size()); ++i)
            push(FileDelete{pool[static_cast<std::size_t>(i)], rng_.between(60000, 3600000), false});
    }

    void pad_flow(std::size_t min_events, std::size_t max_events) {
        const auto current = steps_.size();
        const auto lo = std::max(min_events, current + 2);
        const auto hi = std::max(lo, max_events);
        const auto target = static_cast<std::size_t>(rng_.between(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
        const double ref_share = (type_ == TaskType::synthesize || type_ == TaskType::understand) ? 0.7 : 0.4;
        // Flow events go after the opening read so nothing references a file before any activity.
        for (std::size_t i = current; i < target; ++i) {
            Step s;
            const auto& a = rng_.pick(inputs_);
            const auto& b = rng_.pick(inputs_);
            if (rng_.chance(ref_share)) {
                static const std::vector<std::string> ref_types{"cite", "compare", "summarize"};
                s.data = CrossFileRef{a, b, rng_.pick(ref_types), rng_.between(1000, 120000)};
            } else {
                static const std::vector<std::string> triggers{"navigation", "search_result", "reference"};
                s.data = ContextSwitch{a, b, rng_.pick(triggers), rng_.between(1, 6)};
            }
            const auto at = rng_.between(1, static_cast<std::int64_t>(steps_.size()));
            steps_.insert(steps_.begin() + at, std::move(s));
        }
    }

    TrajectoryBundle assemble() {
        TrajectoryBundle b;
        b.trajectory.profile_id = p_.id;
        b.trajectory.task_id = task_;
        std::int64_t ts = 1700000000000LL + rng_.between(0, 1000000000);
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            ts += rng_.between(1000, 60000);
            b.trajectory.events.push_back(AtomicAction{ts, std::move(steps_[i].data), Json::object()});
            if (steps_[i].delta) b.trajectory.deltas.emplace(i, std::move(*steps_[i].delta));
        }
        for (const auto& f : files_)
            if (!f.image) b.output_files[f.path] = f.content;
        b.captions = captions_;
        return b;
    }
};

} // namespace

TrajectoryBundle generate_trajectory(const Profile& p, const std::string& task_id, std::uint64_t seed,
                                     std::size_t min_events, std::size_t max_events) {
    return TrajectoryGenerator(p, task_id, seed).run(min_events, max_events);
}

Corpus generate_corpus(const Profile& p, const GeneratorConfig& cfg) {
    if (cfg.k > cfg.n)
        throw ConfigError("perturbed count " + std::to_string(cfg.k) + " exceeds trajectory count " +
                          std::to_string(cfg.n));
    if (cfg.min_events > cfg.max_events) throw ConfigError("empty event range");
    if (cfg.task_pool.empty()) throw ConfigError("empty task pool");

    Rng plan(mix_seed(cfg.seed, 0xfffffffULL));
    std::vector<std::size_t> order(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) order[i] = i;
    plan.shuffle(order);
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.k));
    std::sort(chosen.begin(), chosen.end());

    Corpus corpus;
    std::map<std::size_t, Perturbation> by_index;
    for (auto idx : chosen) {
        Perturbation pert;
        pert.index = idx;
        pert.dimension = kAllDimensions[static_cast<std::size_t>(plan.between(0, kDimensionCount - 1))];
        switch (p.tier(pert.dimension)) {
        case Tier::L: pert.direction = Direction::toward_R; break;
        case Tier::R: pert.direction = Direction::toward_L; break;
        case Tier::M: pert.direction = plan.chance(0.5) ? Direction::toward_L : Direction::toward_R; break;
        }
        pert.task_id = cfg.task_pool[idx % cfg.task_pool.size()];
        by_index[idx] = pert;
        corpus.manifest.push_back(pert);
    }

    for (std::size_t i = 0; i < cfg.n; ++i) {
        const auto& task = cfg.task_pool[i % cfg.task_pool.size()];
        auto it = by_index.find(i);
        const Profile used = it == by_index.end() ? p : perturb_profile(p, it->second.dimension, it->second.direction);
        corpus.bundles.push_back(generate_trajectory(used, task, mix_seed(cfg.seed, i), cfg.min_events, cfg.max_events));
    }
    return corpus;
}

Json to_json(const Perturbation& p) {
    return Json{{"index", p.index},
                {"dimension", std::string(1, dimension_letter(p.dimension))},
                {"direction", direction_name(p.direction)},
                {"task_id", p.task_id}};
}

Perturbation perturbation_from_json(const Json& j) {
    try {
        Perturbation p;
        p.index = j.at("index").get<std::size_t>();
        const auto dim = j.at("dimension").get<std::string>();
        auto d = dim.size() == 1 ? dimension_from_letter(dim[0]) : std::nullopt;
        auto dir = direction_from_name(j.at("direction").get<std::string>());
        if (!d || !dir) throw InputError("bad perturbation entry");
        p.dimension = *d;
        p.direction = *dir;
        p.task_id = j.at("task_id").get<std::string>();
        return p;
    } catch (const Json::exception& e) {
        throw InputError(std::string("bad perturbation entry: ") + e.what());
    }
}

Json to_json(const Profile& p) {
    Json attrs = Json::object();
    for (std::size_t i = 0; i < kAttributeCount; ++i)
        attrs[std::string(kAttributeNames[i])] = std::string(1, tier_letter(p.attributes[i]));
    Json dims = Json::object();
    for (auto d : kAllDimensions) dims[std::string(1, dimension_letter(d))] = std::string(1, tier_letter(p.tier(d)));
    return Json{{"id", p.id}, {"name", p.name}, {"role", p.role}, {"language", p.language},
                {"dimensions", dims}, {"attributes", attrs}};
}

} // namespace fsmem
