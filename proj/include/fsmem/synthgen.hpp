#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fsmem/dimensions.hpp"
#include "fsmem/events.hpp"

namespace fsmem {

// mt19937_64 with hand-rolled draws: <random> distributions are not
// specified bit-for-bit, the engine is.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    // Uniform in [lo, hi]; requires lo <= hi.
    std::int64_t between(std::int64_t lo, std::int64_t hi);
    double unit(); // [0, 1)
    bool chance(double p);
    template <class T> const T& pick(const std::vector<T>& items) {
        return items[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(items.size()) - 1))];
    }
    template <class T> void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i)
            std::swap(items[i - 1], items[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(i) - 1))]);
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

enum class Attribute : std::size_t {
    reading_strategy,
    thoroughness,
    tone,
    output_detail,
    output_structure,
    documentation,
    directory_style,
    naming,
    version_strategy,
    edit_strategy,
    error_handling,
    revision_depth,
    working_style,
    cleanup_policy,
    cross_modal,
    output_modality,
};

inline constexpr std::size_t kAttributeCount = 16;
std::string_view attribute_name(Attribute a);
std::optional<Attribute> attribute_from_name(std::string_view name);
// The dimension whose tier the attribute follows. version_strategy is listed
// under both C and D in the schema; it follows C here.
Dimension attribute_dimension(Attribute a);

struct Profile {
    std::string id;
    std::string name;
    std::string role;
    std::string language;
    std::array<Tier, kAttributeCount> attributes{};

    Tier attribute(Attribute a) const { return attributes[static_cast<std::size_t>(a)]; }
    // Tier of the dimension's attributes; see consistent().
    Tier tier(Dimension d) const;
    // Every attribute carries its dimension's tier.
    bool consistent() const;
    bool operator==(const Profile&) const = default;
};

Profile make_profile(std::string id, std::string name, std::string role, std::string language,
                     const std::array<Tier, kDimensionCount>& tiers);

const std::vector<Profile>& builtin_profiles();
// Throws InputError for an unknown id.
const Profile& find_profile(std::string_view id);

enum class Direction { toward_L, toward_R };
std::string_view direction_name(Direction d);
std::optional<Direction> direction_from_name(std::string_view name);

// Shifts one dimension by one tier. Throws RangeError past L or R.
Profile perturb_profile(const Profile& p, Dimension dim, Direction dir);

enum class TaskType { understand, create, organize, synthesize, iterate, maintain };
std::string_view task_type_name(TaskType t);

std::vector<std::string> default_task_pool(); // T-01 .. T-32
TaskType task_type_of(std::string_view task_id);

struct GeneratorConfig {
    std::uint64_t seed = 0;
    std::size_t min_events = 20;
    std::size_t max_events = 60;
    std::vector<std::string> task_pool = default_task_pool();
    std::size_t n = 32;
    std::size_t k = 5;
};

struct Perturbation {
    std::size_t index = 0;
    Dimension dimension = Dimension::A;
    Direction direction = Direction::toward_L;
    std::string task_id;
    bool operator==(const Perturbation&) const = default;
};

struct Corpus {
    std::vector<TrajectoryBundle> bundles;
    std::vector<Perturbation> manifest; // sorted by index
};

// Deterministic in (profile, task, seed, event range). The range bounds the
// padding; when the tier signature alone needs more than max_events events
// the trajectory exceeds it rather than dropping signature events.
TrajectoryBundle generate_trajectory(const Profile& p, const std::string& task_id, std::uint64_t seed,
                                     std::size_t min_events = 20, std::size_t max_events = 60);

// Throws ConfigError when k > n or the event range is empty.
Corpus generate_corpus(const Profile& p, const GeneratorConfig& cfg);

Json to_json(const Perturbation& p);
Perturbation perturbation_from_json(const Json& j);
Json to_json(const Profile& p);

} // namespace fsmem
