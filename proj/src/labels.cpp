#include "credi/labels.hpp"

namespace credi {

namespace {

constexpr std::array<Label, 9> kAllLabels{Label::Positive, Label::Neutral,     Label::Negative,
                                          Label::Kinship,  Label::Affiliative, Label::Other,
                                          Label::Senior,   Label::Peer,        Label::Junior};

constexpr std::array<std::string_view, 9> kTokens{"positive", "neutral",     "negative",
                                                  "kinship",  "affiliative", "other",
                                                  "senior",   "peer",        "junior"};

} // namespace

std::span<const Label> labels_of(Dimension d) noexcept {
    return std::span<const Label>(kAllLabels).subspan(dimension_index(d) * kLabelsPerDimension,
                                                      kLabelsPerDimension);
}

std::string_view token(Label label) noexcept { return kTokens[static_cast<std::size_t>(label)]; }

std::string_view key(Dimension d) noexcept {
    switch (d) {
    case Dimension::Polarity: return "polarity";
    case Dimension::RelType: return "rel_type";
    case Dimension::Hierarchy: return "hierarchy";
    }
    return "";
}

std::string_view title(Dimension d) noexcept {
    switch (d) {
    case Dimension::Polarity: return "Relationship Polarity";
    case Dimension::RelType: return "Relationship Type";
    case Dimension::Hierarchy: return "Generational Hierarchy";
    }
    return "";
}

std::optional<Label> label_from_token(Dimension d, std::string_view tok) noexcept {
    for (Label l : labels_of(d))
        if (token(l) == tok) return l;
    return std::nullopt;
}

std::optional<Dimension> dimension_from_key(std::string_view k) noexcept {
    for (Dimension d : kDimensions)
        if (key(d) == k) return d;
    return std::nullopt;
}

bool is_complete(const LabelMap& labels) noexcept {
    if (labels.size() != kDimensions.size()) return false;
    for (const auto& [d, l] : labels)
        if (dimension_of(l) != d) return false;
    return true;
}

} // namespace credi
