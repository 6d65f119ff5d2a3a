#pragma once

#include "credi/corpus.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace credi {

enum class LabelSource { Gold, Predicted };

std::string_view to_string(LabelSource s) noexcept;
LabelSource label_source_from_string(std::string_view s);

/// Counts indexed by class_index(): positive, neutral, negative.
using PolarityCounts = std::array<std::size_t, 3>;

struct PairStats {
    std::string first;  ///< lexicographically smaller name
    std::string second;
    std::size_t interactions = 0;
    PolarityCounts polarity_counts{};
    PolarityCounts first_to_second{};
    PolarityCounts second_to_first{};

    friend bool operator==(const PairStats&, const PairStats&) = default;
};

/// Folds directed instances into unordered pairs, sorted by (first, second).
/// Throws MissingPolarity when an instance lacks a polarity label in `source`.
std::vector<PairStats> aggregate_pairs(const std::vector<RelationInstance>& instances, LabelSource source);

/// (positive - negative) / interactions. Throws ZeroInteractions.
double polarity_score(const PairStats& stats);

/// 1 + ln(1 + quote_count).
double node_size(std::size_t quote_count) noexcept;

/// Hue 0 deg (red) at -1 to 120 deg (green) at +1, S = V = 1, as "#RRGGBB".
/// Scores outside [-1, 1] (and NaN, taken as 0) are clamped.
std::string edge_color(double score) noexcept;

enum class Role { Protagonist, Antagonist, Unassigned };

std::string_view to_string(Role r) noexcept;
Role role_from_string(std::string_view s);

struct Node {
    std::string name;
    std::size_t quote_count = 0;
    double size = 1.0;
    Role role = Role::Unassigned;

    friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
    std::string source;
    std::string target;
    std::size_t weight = 0;
    double polarity_score = 0.0;
    std::string color;
    PolarityCounts polarity_counts{};
    PolarityCounts source_to_target{};
    PolarityCounts target_to_source{};

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct CharacterNetwork {
    std::vector<Node> nodes; ///< sorted by name
    std::vector<Edge> edges; ///< sorted by (source, target)
    std::vector<std::string> warnings;

    const Node* node(const std::string& name) const;
    const Edge* edge(const std::string& a, const std::string& b) const;
    /// Throws ValidationError when an invariant fails.
    void validate() const;

    friend bool operator==(const CharacterNetwork& a, const CharacterNetwork& b) {
        return a.nodes == b.nodes && a.edges == b.edges;
    }
};

struct NetworkInputs {
    std::map<std::string, std::size_t> quote_counts; ///< missing names count 0
    std::map<std::string, Role> roles;
    std::vector<std::string> extra_nodes;             ///< roster names to include without edges
};

CharacterNetwork build_network(const std::vector<RelationInstance>& instances, LabelSource source,
                               const NetworkInputs& inputs = {});

/// Role file: JSON object {name: "protagonist" | "antagonist"}.
std::map<std::string, Role> load_roles(const std::string& path);
std::map<std::string, Role> parse_roles(std::string_view json);

enum class GraphFormat { GraphML, Dot, Json };

std::string_view to_string(GraphFormat f) noexcept;
std::string_view file_extension(GraphFormat f) noexcept;
GraphFormat graph_format_from_string(std::string_view s);

std::string to_graphml(const CharacterNetwork& net);
std::string to_dot(const CharacterNetwork& net);
std::string to_json(const CharacterNetwork& net);
CharacterNetwork network_from_json(std::string_view json);

std::string render_network(const CharacterNetwork& net, GraphFormat format);
void export_network(const CharacterNetwork& net, GraphFormat format, const std::string& path);

} // namespace credi
