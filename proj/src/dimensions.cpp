#include "fsmem/dimensions.hpp"

namespace fsmem {

char dimension_letter(Dimension d) { return static_cast<char>('A' + static_cast<int>(d)); }

std::optional<Dimension> dimension_from_letter(char c) {
    if (c >= 'a' && c <= 'f') c = static_cast<char>(c - 'a' + 'A');
    if (c < 'A' || c > 'F') return std::nullopt;
    return static_cast<Dimension>(c - 'A');
}

std::string_view dimension_name(Dimension d) {
    static constexpr std::array<std::string_view, kDimensionCount> names{
        "Consumption Pattern", "Production Style", "Organization Preference",
        "Iteration Strategy",  "Curation",         "Cross-Modal Behavior"};
    return names[static_cast<std::size_t>(d)];
}

char tier_letter(Tier t) { return "LMR"[static_cast<std::size_t>(t)]; }

std::optional<Tier> tier_from_letter(char c) {
    switch (c) {
    case 'L': case 'l': return Tier::L;
    case 'M': case 'm': return Tier::M;
    case 'R': case 'r': return Tier::R;
    default: return std::nullopt;
    }
}

std::string_view tier_label(Dimension d, Tier t) {
    static constexpr std::array<std::array<std::string_view, 3>, kDimensionCount> labels{{
        {"Sequential deep reading", "Targeted search-first", "Breadth-first browsing"},
        {"Comprehensive & detailed", "Balanced", "Minimal & concise"},
        {"Deeply nested (3+ levels)", "Adaptive (1-2 levels)", "Flat (root only)"},
        {"Incremental small edits", "Balanced refinement", "Bulk rewrite"},
        {"Selective (active cleanup)", "Pragmatic (moderate cleanup)", "Preservative (accumulative)"},
        {"Visual-heavy (charts, figures)", "Balanced (tables)", "Text-only"},
    }};
    return labels[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)];
}

} // namespace fsmem
