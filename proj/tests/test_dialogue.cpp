#include "credi/dialogue.hpp"
#include "credi/error.hpp"
#include "credi/text.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace credi;

namespace {

const std::set<std::string> kRoster{"朱聪", "郭靖", "黄蓉", "柯镇恶", "韩小莹"};

std::vector<std::pair<std::string, std::optional<std::string>>> speakers(const DialogueUnit& u) {
    std::vector<std::pair<std::string, std::optional<std::string>>> out;
    for (const auto& q : u.quotes) out.emplace_back(q.speaker, q.addressee);
    return out;
}

} // namespace

TEST_CASE("the chapter fixture segments into attributed chains") {
    const std::string text = text::read_file(testing::fixture("novels/shediao_ch01.txt"));
    const auto result = segment_dialogue_chains(text, kRoster, SegmenterConfig{}, "ch01");
    CHECK(result.warnings.empty());
    REQUIRE(result.units.size() == 2);

    const auto& first = result.units[0];
    REQUIRE(first.quotes.size() == 7);
    CHECK(first.quotes[0].speaker == "朱聪");
    CHECK(first.quotes[0].utterance == "这还不是内功吗？");
    CHECK(first.quotes[1].speaker == "郭靖");
    CHECK(first.quotes[4].speaker == "黄蓉");
    CHECK(first.quotes[6].speaker == "黄蓉"); // attributed from the clause after the quote

    const auto& second = result.units[1];
    CHECK(speakers(second) == std::vector<std::pair<std::string, std::optional<std::string>>>{
                                  {"柯镇恶", "韩小莹"}, {"韩小莹", "柯镇恶"}});

    for (const auto& u : result.units) {
        REQUIRE(u.source_span.has_value());
        CHECK(text.substr(u.source_span->start, u.source_span->size()) == u.context);
        for (const auto& q : u.quotes) CHECK(u.context.substr(q.span.start, q.span.size()) == q.utterance);
    }
}

TEST_CASE("chapter headings break chains") {
    const std::string text = "郭靖道：“一。”\n第二回 新章\n黄蓉道：“二。”\n";
    const auto result = segment_dialogue_chains(text, kRoster, SegmenterConfig{}, "n");
    CHECK(result.units.size() == 2);
}

TEST_CASE("long narration gaps break chains") {
    SegmenterConfig cfg;
    cfg.max_gap_paragraphs = 1;
    const std::string close = "郭靖道：“一。”\n叙述。\n黄蓉道：“二。”\n";
    CHECK(segment_dialogue_chains(close, kRoster, cfg, "n").units.size() == 1);
    const std::string far = "郭靖道：“一。”\n叙述。\n又叙述。\n黄蓉道：“二。”\n";
    CHECK(segment_dialogue_chains(far, kRoster, cfg, "n").units.size() == 2);
}

TEST_CASE("two-party alternation fills unattributed turns") {
    const std::string text = "郭靖对黄蓉道：“蓉儿。”\n“靖哥哥。”\n“我们走罢。”\n";
    const auto result = segment_dialogue_chains(text, kRoster, SegmenterConfig{}, "n");
    REQUIRE(result.units.size() == 1);
    const auto& q = result.units[0].quotes;
    REQUIRE(q.size() == 3);
    CHECK(q[0].speaker == "郭靖");
    CHECK(q[1].speaker == "黄蓉");
    CHECK(q[2].speaker == "郭靖");
    CHECK(q[1].addressee == "郭靖");
}

TEST_CASE("warnings for unbalanced, empty and unattributed quotes") {
    const std::string text = "他说：“没有结尾\n“”\n有人说：“谁？”\n";
    const auto result = segment_dialogue_chains(text, kRoster, SegmenterConfig{}, "n");
    std::set<SegmentationWarning::Kind> kinds;
    for (const auto& w : result.warnings) kinds.insert(w.kind);
    CHECK(kinds.count(SegmentationWarning::Kind::UnbalancedQuotes));
    CHECK(kinds.count(SegmentationWarning::Kind::EmptyQuote));
    CHECK(kinds.count(SegmentationWarning::Kind::UnattributedQuote));
    CHECK(result.units.empty());
}

TEST_CASE("empty input and malformed UTF-8") {
    CHECK(segment_dialogue_chains("", kRoster, SegmenterConfig{}).units.empty());
    CHECK_THROWS_AS(segment_dialogue_chains("郭靖\xFF", kRoster, SegmenterConfig{}), EncodingError);
}

TEST_CASE("english configuration") {
    const std::set<std::string> roster{"Guo Jing", "Huang Rong"};
    const std::string text = "Guo Jing said: \"Let us go.\"\n\"Wait for me,\" said Huang Rong.\n";
    const auto result = segment_dialogue_chains(text, roster, SegmenterConfig::english(), "en");
    REQUIRE(result.units.size() == 1);
    REQUIRE(result.units[0].quotes.size() == 2);
    CHECK(result.units[0].quotes[0].speaker == "Guo Jing");
    CHECK(result.units[0].quotes[1].speaker == "Huang Rong");
}

TEST_CASE("segmenter config validation") {
    SegmenterConfig cfg;
    cfg.max_gap_paragraphs = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SegmenterConfig{};
    cfg.chapter_pattern = "(";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SegmenterConfig{};
    cfg.quote_delimiters.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("instances are proposed for every ordered pair of parties") {
    const DialogueUnit u = testing::unit("u", {{"甲", "一"}, {"乙", "二"}, {"丙", "三"}});
    const auto inst = propose_instances(u);
    CHECK(inst.size() == 6);
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& i : inst) {
        CHECK(i.unit_id == "u");
        CHECK_FALSE(i.gold.has_value());
        pairs.emplace(i.subject, i.object);
    }
    CHECK(pairs.size() == 6);
}

TEST_CASE("expanded dialogue spells out speaker and addressee") {
    DialogueUnit u = testing::unit("u", {{"朱聪", "这还不是内功吗？"}, {"郭靖", "弟子不知。"}});
    u.quotes[0].addressee = "郭靖";
    const auto expanded = build_expanded_dialogue(u);
    const std::string zh = render_expanded(expanded, Locale::Zh);
    CHECK(zh.find("朱聪对郭靖说：“这还不是内功吗？”") != std::string::npos);
    CHECK(zh.find("郭靖说：“弟子不知。”") != std::string::npos);
    CHECK(render_quote_line("Zhu Cong", std::string("Guo Jing"), "Hm?", Locale::En) ==
          "Zhu Cong said to Guo Jing: \"Hm?\"");
    CHECK(dialogue_text(u, DialogueVariant::Basic, Locale::Zh) == u.context);
    CHECK(dialogue_text(u, DialogueVariant::Expanded, Locale::Zh) == zh);
}

TEST_CASE("variant names round trip") {
    for (auto v : {DialogueVariant::Expanded, DialogueVariant::Basic})
        CHECK(dialogue_variant_from_string(to_string(v)) == v);
    for (auto l : {Locale::Zh, Locale::En}) CHECK(locale_from_string(to_string(l)) == l);
    CHECK_THROWS(dialogue_variant_from_string("fancy"));
}

TEST_CASE("quote counts are speaker frequencies") {
    Dataset ds;
    ds.units.emplace("u1", testing::unit("u1", {{"甲", "一"}, {"乙", "二"}, {"甲", "三"}}));
    const auto counts = count_quotes(ds);
    CHECK(counts.at("甲") == 2);
    CHECK(counts.at("乙") == 1);
}
