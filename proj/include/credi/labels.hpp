#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace credi {

/// The three parallel annotation dimensions.
enum class Dimension : std::uint8_t { Polarity = 0, RelType = 1, Hierarchy = 2 };

inline constexpr std::array<Dimension, 3> kDimensions{Dimension::Polarity, Dimension::RelType,
                                                      Dimension::Hierarchy};

/// Nine label values. Each belongs to exactly one dimension; the enum is laid
/// out in dimension-major order so `index / 3` recovers the dimension.
enum class Label : std::uint8_t {
    Positive = 0,
    Neutral,
    Negative,
    Kinship,
    Affiliative,
    Other,
    Senior,
    Peer,
    Junior,
};

inline constexpr std::size_t kLabelsPerDimension = 3;

constexpr Dimension dimension_of(Label label) noexcept {
    return static_cast<Dimension>(static_cast<std::uint8_t>(label) / kLabelsPerDimension);
}

/// Position of a label within its dimension's candidate list (0..2).
constexpr std::size_t class_index(Label label) noexcept {
    return static_cast<std::uint8_t>(label) % kLabelsPerDimension;
}

constexpr std::size_t dimension_index(Dimension d) noexcept { return static_cast<std::size_t>(d); }

/// Canonical candidate list for a dimension, in canonical order.
std::span<const Label> labels_of(Dimension d) noexcept;

/// Canonical ASCII token: "positive", "kinship", "peer", ...
std::string_view token(Label label) noexcept;

/// Key used in corpus records and answer lines: "polarity", "rel_type", "hierarchy".
std::string_view key(Dimension d) noexcept;

/// Human-facing column title.
std::string_view title(Dimension d) noexcept;

/// Case-sensitive lookup of a canonical token within one dimension.
std::optional<Label> label_from_token(Dimension d, std::string_view tok) noexcept;

std::optional<Dimension> dimension_from_key(std::string_view k) noexcept;

/// Labels keyed by dimension. A complete map holds one entry per dimension.
using LabelMap = std::map<Dimension, Label>;

bool is_complete(const LabelMap& labels) noexcept;

} // namespace credi
