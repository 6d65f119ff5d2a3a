#include "credi/error.hpp"
#include "credi/network.hpp"

#include "support.hpp"
#include "xml_check.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace credi;
using testing::labels;

namespace {

RelationInstance directed(const std::string& id, const std::string& s, const std::string& o, Label polarity) {
    return testing::instance(id, "u", s, o, labels(polarity, Label::Other, Label::Peer));
}

std::vector<RelationInstance> sample() {
    return {directed("1", "郭靖", "黄蓉", Label::Positive), directed("2", "黄蓉", "郭靖", Label::Positive),
            directed("3", "郭靖", "黄蓉", Label::Neutral),  directed("4", "朱聪", "郭靖", Label::Negative),
            directed("5", "郭靖", "朱聪", Label::Neutral),  directed("6", "欧阳锋", "郭靖", Label::Negative)};
}

/// Edge attributes that do not depend on instance direction.
auto undirected_view(const CharacterNetwork& net) {
    std::vector<std::tuple<std::string, std::string, std::size_t, double, std::string, PolarityCounts>> out;
    for (const auto& e : net.edges)
        out.emplace_back(e.source, e.target, e.weight, e.polarity_score, e.color, e.polarity_counts);
    return out;
}

} // namespace

TEST_CASE("pair aggregation folds both directions") {
    const auto pairs = aggregate_pairs(sample(), LabelSource::Gold);
    REQUIRE(pairs.size() == 3);
    for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(std::tie(pairs[i - 1].first, pairs[i - 1].second) <
                                                          std::tie(pairs[i].first, pairs[i].second));
    const auto it = std::find_if(pairs.begin(), pairs.end(), [](const PairStats& p) {
        return p.first == std::min<std::string>("郭靖", "黄蓉");
    });
    REQUIRE(it != pairs.end());
    CHECK(it->interactions == 3);
    CHECK(it->polarity_counts == PolarityCounts{2, 1, 0});
    CHECK(polarity_score(*it) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(polarity_score(PairStats{}), ZeroInteractions);
}

TEST_CASE("missing polarity is an error for the chosen source") {
    auto inst = sample();
    CHECK_THROWS_AS(aggregate_pairs(inst, LabelSource::Predicted), MissingPolarity);
    inst[0].gold.reset();
    CHECK_THROWS_AS(aggregate_pairs(inst, LabelSource::Gold), MissingPolarity);
}

TEST_CASE("node size and edge colour formulas") {
    CHECK(node_size(0) == doctest::Approx(1.0));
    CHECK(node_size(10) == doctest::Approx(1.0 + std::log(11.0)));
    CHECK(edge_color(-1.0) == "#FF0000");
    CHECK(edge_color(0.0) == "#FFFF00");
    CHECK(edge_color(1.0) == "#00FF00");
    CHECK(edge_color(5.0) == "#00FF00");
    CHECK(edge_color(std::nan("")) == "#FFFF00");
}

TEST_CASE("networks satisfy their invariants") {
    NetworkInputs in;
    in.quote_counts = {{"郭靖", 12}, {"黄蓉", 8}};
    in.roles = {{"郭靖", Role::Protagonist}, {"欧阳锋", Role::Antagonist}, {"路人", Role::Antagonist}};
    in.extra_nodes = {"洪七公"};
    const CharacterNetwork net = build_network(sample(), LabelSource::Gold, in);
    CHECK_NOTHROW(net.validate());
    CHECK(net.nodes.size() == 5);
    CHECK(net.edges.size() == 3);
    REQUIRE(net.node("郭靖"));
    CHECK(net.node("郭靖")->role == Role::Protagonist);
    CHECK(net.node("郭靖")->size == doctest::Approx(node_size(12)));
    CHECK(net.node("朱聪")->quote_count == 0);
    CHECK(net.node("洪七公"));
    REQUIRE(net.warnings.size() == 1);
    CHECK(net.warnings[0].find("路人") != std::string::npos);
    const Edge* e = net.edge("黄蓉", "郭靖");
    REQUIRE(e);
    CHECK(e == net.edge("郭靖", "黄蓉"));
    CHECK(e->weight == 3);
    CHECK(e->color == edge_color(e->polarity_score));
    std::size_t sum = 0;
    for (auto c : e->source_to_target) sum += c;
    for (auto c : e->target_to_source) sum += c;
    CHECK(sum == e->weight);
    CHECK_FALSE(net.edge("黄蓉", "洪七公"));
}

TEST_CASE("property: flipping instance direction keeps the undirected network") {
    std::mt19937_64 rng(17);
    const std::vector<std::string> names{"甲", "乙", "丙", "丁", "戊"};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<RelationInstance> inst;
        for (int i = 0; i < 40; ++i) {
            const auto a = rng() % names.size();
            auto b = rng() % names.size();
            if (a == b) b = (b + 1) % names.size();
            inst.push_back(directed(std::to_string(i), names[a], names[b], labels_of(Dimension::Polarity)[rng() % 3]));
        }
        auto flipped = inst;
        for (auto& x : flipped)
            if (rng() % 2) std::swap(x.subject, x.object);
        const auto a = build_network(inst, LabelSource::Gold);
        const auto b = build_network(flipped, LabelSource::Gold);
        CHECK(undirected_view(a) == undirected_view(b));
        CHECK(a.nodes == b.nodes);

        auto shuffled = inst;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(build_network(shuffled, LabelSource::Gold) == a);
    }
}

TEST_CASE("removing a pair's instances removes exactly that edge") {
    const auto full = build_network(sample(), LabelSource::Gold);
    std::vector<RelationInstance> rest;
    for (const auto& i : sample())
        if (!((i.subject == "朱聪" && i.object == "郭靖") || (i.subject == "郭靖" && i.object == "朱聪")))
            rest.push_back(i);
    const auto reduced = build_network(rest, LabelSource::Gold);
    CHECK(reduced.edges.size() == full.edges.size() - 1);
    CHECK_FALSE(reduced.edge("朱聪", "郭靖"));
    for (const auto& e : reduced.edges) CHECK(*full.edge(e.source, e.target) == e);
    CHECK_FALSE(reduced.node("朱聪"));
}

TEST_CASE("GraphML output is well formed and self-consistent") {
    auto inst = sample();
    inst.push_back(directed("7", "A&B", "<C>", Label::Positive));
    const CharacterNetwork net = build_network(inst, LabelSource::Gold);
    const std::string xml = to_graphml(net);
    const auto root = testing::XmlReader(xml).parse();
    CHECK(root.name == "graphml");
    CHECK(root.attributes.at("xmlns") == "http://graphml.graphdrawing.org/xmlns");
    std::set<std::string> keys;
    const testing::XmlElement* graph = nullptr;
    for (const auto& c : root.children) {
        if (c.name == "key") keys.insert(c.attributes.at("id"));
        if (c.name == "graph") graph = &c;
    }
    REQUIRE(graph);
    CHECK(graph->attributes.at("edgedefault") == "undirected");
    std::set<std::string> node_ids;
    std::size_t edges = 0;
    for (const auto& c : graph->children) {
        for (const auto& d : c.children) CHECK(keys.count(d.attributes.at("key")));
        if (c.name == "node") CHECK(node_ids.insert(c.attributes.at("id")).second);
        if (c.name == "edge") {
            ++edges;
            CHECK(node_ids.count(c.attributes.at("source")));
            CHECK(node_ids.count(c.attributes.at("target")));
        }
    }
    CHECK(node_ids == std::set<std::string>{"A&B", "<C>", "朱聪", "欧阳锋", "郭靖", "黄蓉"});
    CHECK(edges == net.edges.size());
}

TEST_CASE("DOT output for a single edge") {
    const auto net = build_network({directed("1", "乙", "甲", Label::Negative)}, LabelSource::Gold);
    const std::string dot = to_dot(net);
    CHECK(dot.starts_with("graph characters {\n"));
    CHECK(dot.ends_with("}\n"));
    CHECK(dot.find("\"乙\" -- \"甲\" [weight=1, penwidth=5, color=\"#FF0000\", polarity_score=-1];") != std::string::npos);
    CHECK(dot.find("->") == std::string::npos);
}

TEST_CASE("JSON export round trips and is validated on load") {
    NetworkInputs in;
    in.quote_counts = {{"郭靖", 3}};
    const auto net = build_network(sample(), LabelSource::Gold, in);
    const auto back = network_from_json(to_json(net));
    CHECK(back == net);
    CHECK_THROWS_AS(network_from_json("{"), SchemaError);
    std::string broken = to_json(net);
    broken.replace(broken.find("\"weight\": 3"), 11, "\"weight\": 4");
    CHECK_THROWS_AS(network_from_json(broken), ValidationError);
}

TEST_CASE("roles and formats parse strictly") {
    CHECK(parse_roles(R"({"郭靖": "protagonist", "欧阳锋": "antagonist"})").size() == 2);
    CHECK_THROWS_AS(parse_roles(R"({"郭靖": "hero"})"), SchemaError);
    CHECK_THROWS_AS(parse_roles("[]"), SchemaError);
    CHECK_THROWS_AS(load_roles("/no/such/roles.json"), FileNotFound);
    for (auto f : {GraphFormat::GraphML, GraphFormat::Dot, GraphFormat::Json})
        CHECK(graph_format_from_string(to_string(f)) == f);
    CHECK(file_extension(GraphFormat::GraphML) == ".graphml");
    CHECK_THROWS_AS(graph_format_from_string("gexf"), ConfigError);
    CHECK(label_source_from_string("predicted") == LabelSource::Predicted);
}
