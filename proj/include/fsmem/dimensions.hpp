#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace fsmem {

// Six behavioral dimensions, each discretized into three tiers.
enum class Dimension : std::size_t { A, B, C, D, E, F };
enum class Tier : std::size_t { L, M, R };

inline constexpr std::size_t kDimensionCount = 6;
inline constexpr std::array<Dimension, kDimensionCount> kAllDimensions{
    Dimension::A, Dimension::B, Dimension::C, Dimension::D, Dimension::E, Dimension::F};

char dimension_letter(Dimension d);
std::optional<Dimension> dimension_from_letter(char c);
std::string_view dimension_name(Dimension d);

char tier_letter(Tier t);
std::optional<Tier> tier_from_letter(char c);

// Short human label of a tier on a dimension, e.g. (C, L) -> "Deeply nested (3+ levels)".
std::string_view tier_label(Dimension d, Tier t);

} // namespace fsmem
