#include "credi/network.hpp"

#include "credi/error.hpp"
#include "credi/text.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace credi {

namespace {

using json = nlohmann::ordered_json;

std::size_t polarity_index(const RelationInstance& inst, LabelSource source) {
    const auto& labels = source == LabelSource::Gold ? inst.gold : inst.predicted;
    if (!labels) throw MissingPolarity(inst.id);
    auto it = labels->find(Dimension::Polarity);
    if (it == labels->end()) throw MissingPolarity(inst.id);
    return class_index(it->second);
}

double clamp_score(double score, bool& clamped) noexcept {
    clamped = true;
    if (std::isnan(score)) return 0.0;
    if (score < -1.0) return -1.0;
    if (score > 1.0) return 1.0;
    clamped = false;
    return score;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

json counts_json(const PolarityCounts& c) {
    return json{{"positive", c[0]}, {"neutral", c[1]}, {"negative", c[2]}};
}

PolarityCounts counts_from_json(const json& j) {
    return {j.at("positive").get<std::size_t>(), j.at("neutral").get<std::size_t>(),
            j.at("negative").get<std::size_t>()};
}

std::size_t sum(const PolarityCounts& c) { return c[0] + c[1] + c[2]; }

} // namespace

std::string_view to_string(LabelSource s) noexcept {
    return s == LabelSource::Gold ? "gold" : "predicted";
}

LabelSource label_source_from_string(std::string_view s) {
    if (s == "gold") return LabelSource::Gold;
    if (s == "predicted") return LabelSource::Predicted;
    throw ConfigError(fmt::format("unknown label source '{}' (expected gold or predicted)", s));
}

std::vector<PairStats> aggregate_pairs(const std::vector<RelationInstance>& instances, LabelSource source) {
    std::map<std::pair<std::string, std::string>, PairStats> pairs;
    for (const auto& inst : instances) {
        const std::size_t p = polarity_index(inst, source);
        const bool forward = inst.subject <= inst.object;
        const auto& a = forward ? inst.subject : inst.object;
        const auto& b = forward ? inst.object : inst.subject;
        auto& st = pairs[{a, b}];
        st.first = a;
        st.second = b;
        ++st.interactions;
        ++st.polarity_counts[p];
        ++(forward ? st.first_to_second : st.second_to_first)[p];
    }
    std::vector<PairStats> out;
    out.reserve(pairs.size());
    for (auto& [key, st] : pairs) out.push_back(std::move(st));
    return out;
}

double polarity_score(const PairStats& stats) {
    if (stats.interactions == 0) throw ZeroInteractions();
    return (static_cast<double>(stats.polarity_counts[0]) - static_cast<double>(stats.polarity_counts[2])) /
           static_cast<double>(stats.interactions);
}

double node_size(std::size_t quote_count) noexcept {
    return 1.0 + std::log1p(static_cast<double>(quote_count));
}

std::string edge_color(double score) noexcept {
    bool clamped = false;
    const double s = clamp_score(score, clamped);
    const double hue = 60.0 * (s + 1.0);
    double r = 1.0, g = 1.0;
    if (hue <= 60.0)
        g = hue / 60.0;
    else
        r = (120.0 - hue) / 60.0;
    auto channel = [](double v) { return static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    return fmt::format("#{:02X}{:02X}00", channel(r), channel(g));
}

std::string_view to_string(Role r) noexcept {
    switch (r) {
    case Role::Protagonist: return "protagonist";
    case Role::Antagonist: return "antagonist";
    case Role::Unassigned: break;
    }
    return "unassigned";
}

Role role_from_string(std::string_view s) {
    if (s == "protagonist") return Role::Protagonist;
    if (s == "antagonist") return Role::Antagonist;
    if (s == "unassigned") return Role::Unassigned;
    throw ValidationError(fmt::format("unknown role '{}'", s));
}

const Node* CharacterNetwork::node(const std::string& name) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), name,
                               [](const Node& n, const std::string& v) { return n.name < v; });
    return it != nodes.end() && it->name == name ? &*it : nullptr;
}

const Edge* CharacterNetwork::edge(const std::string& a, const std::string& b) const {
    const auto& lo = std::min(a, b);
    const auto& hi = std::max(a, b);
    for (const auto& e : edges)
        if (e.source == lo && e.target == hi) return &e;
    return nullptr;
}

void CharacterNetwork::validate() const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i].size > 0.0)) throw ValidationError(fmt::format("node '{}' has non-positive size", nodes[i].name));
        if (i > 0 && !(nodes[i - 1].name < nodes[i].name))
            throw ValidationError("nodes are not sorted by unique name");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (!node(e.source) || !node(e.target))
            throw ValidationError(fmt::format("edge '{}' -- '{}' has a missing endpoint", e.source, e.target));
        if (!(e.source < e.target)) throw ValidationError("edge endpoints are not ordered");
        if (i > 0 && !(std::tie(edges[i - 1].source, edges[i - 1].target) < std::tie(e.source, e.target)))
            throw ValidationError("edges are not sorted or not unique");
        if (!(e.polarity_score >= -1.0 && e.polarity_score <= 1.0))
            throw ValidationError(fmt::format("edge '{}' -- '{}' polarity score out of range", e.source, e.target));
        if (sum(e.polarity_counts) != e.weight)
            throw ValidationError(fmt::format("edge '{}' -- '{}' counts do not sum to weight", e.source, e.target));
        for (std::size_t k = 0; k < 3; ++k)
            if (e.source_to_target[k] + e.target_to_source[k] != e.polarity_counts[k])
                throw ValidationError(fmt::format("edge '{}' -- '{}' directed counts disagree", e.source, e.target));
    }
}

CharacterNetwork build_network(const std::vector<RelationInstance>& instances, LabelSource source,
                               const NetworkInputs& inputs) {
    CharacterNetwork net;
    std::set<std::string> names(inputs.extra_nodes.begin(), inputs.extra_nodes.end());
    for (auto& st : aggregate_pairs(instances, source)) {
        names.insert(st.first);
        names.insert(st.second);
        Edge e;
        e.weight = st.interactions;
        double score = polarity_score(st);
        bool clamped = false;
        score = clamp_score(score, clamped);
        if (clamped) net.warnings.push_back(fmt::format("polarity score clamped for {} -- {}", st.first, st.second));
        e.polarity_score = score;
        e.color = edge_color(score);
        e.polarity_counts = st.polarity_counts;
        e.source_to_target = st.first_to_second;
        e.target_to_source = st.second_to_first;
        e.source = std::move(st.first);
        e.target = std::move(st.second);
        net.edges.push_back(std::move(e));
    }
    for (const auto& name : names) {
        Node n;
        n.name = name;
        if (auto it = inputs.quote_counts.find(name); it != inputs.quote_counts.end()) n.quote_count = it->second;
        n.size = node_size(n.quote_count);
        if (auto it = inputs.roles.find(name); it != inputs.roles.end()) n.role = it->second;
        net.nodes.push_back(std::move(n));
    }
    for (const auto& [name, role] : inputs.roles)
        if (!names.count(name)) net.warnings.push_back(fmt::format("role given for '{}', who is not in the network", name));
    return net;
}

std::map<std::string, Role> parse_roles(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(1, "roles", e.what());
    }
    if (!j.is_object()) throw SchemaError(1, "roles", "expected a JSON object of name -> role");
    std::map<std::string, Role> roles;
    for (const auto& [name, value] : j.items()) {
        if (!value.is_string()) throw SchemaError(1, name, "role must be a string");
        try {
            roles[name] = role_from_string(value.get<std::string>());
        } catch (const ValidationError& e) {
            throw SchemaError(1, name, e.what());
        }
    }
    return roles;
}

std::map<std::string, Role> load_roles(const std::string& path) {
    return parse_roles(text::read_file(path));
}

std::string_view to_string(GraphFormat f) noexcept {
    switch (f) {
    case GraphFormat::GraphML: return "graphml";
    case GraphFormat::Dot: return "dot";
    case GraphFormat::Json: break;
    }
    return "json";
}

std::string_view file_extension(GraphFormat f) noexcept {
    switch (f) {
    case GraphFormat::GraphML: return ".graphml";
    case GraphFormat::Dot: return ".dot";
    case GraphFormat::Json: break;
    }
    return ".json";
}

GraphFormat graph_format_from_string(std::string_view s) {
    if (s == "graphml") return GraphFormat::GraphML;
    if (s == "dot") return GraphFormat::Dot;
    if (s == "json") return GraphFormat::Json;
    throw ConfigError(fmt::format("unknown graph format '{}' (expected graphml, dot or json)", s));
}

std::string to_graphml(const CharacterNetwork& net) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\"\n"
           "         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\"\n"
           "         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
           "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n";
    out += "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"double\"/>\n";
    out += "  <key id=\"role\" for=\"node\" attr.name=\"role\" attr.type=\"string\"/>\n";
    out += "  <key id=\"quote_count\" for=\"node\" attr.name=\"quote_count\" attr.type=\"long\"/>\n";
    out += "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n";
    out += "  <key id=\"polarity_score\" for=\"edge\" attr.name=\"polarity_score\" attr.type=\"double\"/>\n";
    out += "  <key id=\"color\" for=\"edge\" attr.name=\"color\" attr.type=\"string\"/>\n";
    out += "  <graph id=\"characters\" edgedefault=\"undirected\">\n";
    for (const auto& n : net.nodes) {
        out += fmt::format("    <node id=\"{}\">\n", xml_escape(n.name));
        out += fmt::format("      <data key=\"size\">{}</data>\n", n.size);
        out += fmt::format("      <data key=\"role\">{}</data>\n", to_string(n.role));
        out += fmt::format("      <data key=\"quote_count\">{}</data>\n", n.quote_count);
        out += "    </node>\n";
    }
    for (std::size_t i = 0; i < net.edges.size(); ++i) {
        const auto& e = net.edges[i];
        out += fmt::format("    <edge id=\"e{}\" source=\"{}\" target=\"{}\">\n", i, xml_escape(e.source),
                           xml_escape(e.target));
        out += fmt::format("      <data key=\"weight\">{}</data>\n", e.weight);
        out += fmt::format("      <data key=\"polarity_score\">{}</data>\n", e.polarity_score);
        out += fmt::format("      <data key=\"color\">{}</data>\n", e.color);
        out += "    </edge>\n";
    }
    out += "  </graph>\n</graphml>\n";
    return out;
}

std::string to_dot(const CharacterNetwork& net) {
    std::size_t max_weight = 1;
    for (const auto& e : net.edges) max_weight = std::max(max_weight, e.weight);
    std::string out = "graph characters {\n";
    for (const auto& n : net.nodes)
        out += fmt::format("  {} [width={}, role={}, quote_count={}];\n", dot_quote(n.name), n.size,
                           dot_quote(to_string(n.role)), n.quote_count);
    for (const auto& e : net.edges) {
        const double penwidth = 1.0 + 4.0 * static_cast<double>(e.weight) / static_cast<double>(max_weight);
        out += fmt::format("  {} -- {} [weight={}, penwidth={}, color={}, polarity_score={}];\n", dot_quote(e.source),
                           dot_quote(e.target), e.weight, penwidth, dot_quote(e.color), e.polarity_score);
    }
    out += "}\n";
    return out;
}

std::string to_json(const CharacterNetwork& net) {
    json j;
    j["nodes"] = json::array();
    for (const auto& n : net.nodes)
        j["nodes"].push_back(
            {{"name", n.name}, {"quote_count", n.quote_count}, {"size", n.size}, {"role", to_string(n.role)}});
    j["edges"] = json::array();
    for (const auto& e : net.edges)
        j["edges"].push_back({{"source", e.source},
                              {"target", e.target},
                              {"weight", e.weight},
                              {"polarity_score", e.polarity_score},
                              {"color", e.color},
                              {"polarity_counts", counts_json(e.polarity_counts)},
                              {"source_to_target", counts_json(e.source_to_target)},
                              {"target_to_source", counts_json(e.target_to_source)}});
    return j.dump(2) + "\n";
}

CharacterNetwork network_from_json(std::string_view text) {
    CharacterNetwork net;
    try {
        const json j = json::parse(text);
        for (const auto& n : j.at("nodes"))
            net.nodes.push_back(Node{n.at("name").get<std::string>(), n.at("quote_count").get<std::size_t>(),
                                     n.at("size").get<double>(), role_from_string(n.at("role").get<std::string>())});
        for (const auto& e : j.at("edges"))
            net.edges.push_back(Edge{e.at("source").get<std::string>(), e.at("target").get<std::string>(),
                                     e.at("weight").get<std::size_t>(), e.at("polarity_score").get<double>(),
                                     e.at("color").get<std::string>(), counts_from_json(e.at("polarity_counts")),
                                     counts_from_json(e.at("source_to_target")),
                                     counts_from_json(e.at("target_to_source"))});
    } catch (const json::exception& e) {
        throw SchemaError(1, "network", e.what());
    }
    net.validate();
    return net;
}

std::string render_network(const CharacterNetwork& net, GraphFormat format) {
    switch (format) {
    case GraphFormat::GraphML: return to_graphml(net);
    case GraphFormat::Dot: return to_dot(net);
    case GraphFormat::Json: break;
    }
    return to_json(net);
}

void export_network(const CharacterNetwork& net, GraphFormat format, const std::string& path) {
    net.validate();
    text::write_file(path, render_network(net, format));
}

} // namespace credi
