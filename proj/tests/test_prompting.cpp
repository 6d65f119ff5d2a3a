#include "credi/error.hpp"
#include "credi/finetune.hpp"
#include "credi/prompting.hpp"

#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace credi;
using testing::labels;

namespace {

DialogueUnit demo_unit() {
    DialogueUnit u = testing::unit("u1", {{"朱聪", "这还不是内功吗？"}, {"郭靖", "弟子不知。"}});
    u.quotes[0].addressee = "郭靖";
    u.quotes[1].addressee = "朱聪";
    return u;
}

std::vector<Exemplar> exemplars(std::size_t n) {
    std::vector<Exemplar> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(Exemplar{"ex" + std::to_string(i), "甲说：“例" + std::to_string(i) + "”", TargetPair{"甲", "乙"},
                               "polarity=positive; rel_type=kinship; hierarchy=senior"});
    return out;
}

} // namespace

TEST_CASE("joint prompt layout") {
    const auto inst = testing::instance("r1", "u1", "朱聪", "郭靖");
    PromptConfig cfg;
    const PromptSpec spec = build_prompt(inst, demo_unit(), cfg, exemplars(5));
    CHECK(spec.exemplars.size() == 3);
    CHECK(spec.candidate_labels.size() == 3);
    const std::string text = render_prompt(spec);
    CHECK(text.find("朱聪 -> 郭靖") != std::string::npos);
    CHECK(text.find("- polarity (Relationship Polarity): positive | neutral | negative") != std::string::npos);
    CHECK(text.find("朱聪对郭靖说：“这还不是内功吗？”") != std::string::npos);
    CHECK(text.find("{DIALOGUE}") == std::string::npos);
    const auto e1 = text.find("### Example 1");
    const auto e3 = text.find("### Example 3");
    const auto q = text.find("### Query");
    CHECK(e1 != std::string::npos);
    CHECK(e1 < e3);
    CHECK(e3 < q);
    CHECK(text.find("### Example 4") == std::string::npos);
    CHECK(text.ends_with("TARGET: 朱聪 -> 郭靖\nANSWER:"));
}

TEST_CASE("per-dimension prompt lists one candidate set") {
    const auto inst = testing::instance("r1", "u1", "朱聪", "郭靖");
    PromptConfig cfg;
    cfg.mode = PromptMode::per_dimension(Dimension::Hierarchy);
    cfg.exemplar_count = 0;
    const PromptSpec spec = build_prompt(inst, demo_unit(), cfg, exemplars(2));
    CHECK(spec.exemplars.empty());
    REQUIRE(spec.candidate_labels.size() == 1);
    CHECK(spec.candidate_labels[0].dimension == Dimension::Hierarchy);
    const std::string text = render_prompt(spec);
    CHECK(text.find("senior | peer | junior") != std::string::npos);
    CHECK(text.find("polarity (") == std::string::npos);
}

TEST_CASE("basic variant keeps the raw context") {
    const auto inst = testing::instance("r1", "u1", "朱聪", "郭靖");
    PromptConfig cfg;
    cfg.dialogue_variant = DialogueVariant::Basic;
    const PromptSpec spec = build_prompt(inst, demo_unit(), cfg, {});
    CHECK(spec.query_dialogue == demo_unit().context);
}

TEST_CASE("placeholder-like text inside the dialogue is not expanded") {
    DialogueUnit u = testing::unit("u1", {{"甲", "{TARGET_PAIR}"}, {"乙", "x"}});
    const auto inst = testing::instance("r1", "u1", "甲", "乙");
    const PromptSpec spec = build_prompt(inst, u, PromptConfig{}, {});
    CHECK(spec.instruction.find("{TARGET_PAIR}") != std::string::npos);
}

TEST_CASE("prompt errors") {
    const auto inst = testing::instance("r1", "other", "朱聪", "郭靖");
    CHECK_THROWS_AS(build_prompt(inst, demo_unit(), PromptConfig{}, {}), UnitMismatch);
    PromptConfig cfg;
    cfg.exemplar_count = 17;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = PromptConfig{};
    cfg.joint_template = "no placeholders";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(PromptMode::parse("per_dimension:mood"), ConfigError);
    CHECK(PromptMode::parse("per_dimension:rel_type") == PromptMode::per_dimension(Dimension::RelType));
}

TEST_CASE("english templates") {
    PromptConfig cfg;
    cfg.locale = Locale::En;
    const auto inst = testing::instance("r1", "u1", "朱聪", "郭靖");
    const std::string text = render_prompt(build_prompt(inst, demo_unit(), cfg, {}));
    CHECK(text.find("said to") != std::string::npos);
}

TEST_CASE("property: all 27 joint label combinations survive render then parse") {
    int count = 0;
    for (Label p : labels_of(Dimension::Polarity))
        for (Label r : labels_of(Dimension::RelType))
            for (Label h : labels_of(Dimension::Hierarchy)) {
                const LabelMap m = labels(p, r, h);
                const auto outcome = parse_response(render_answer(m, PromptMode::joint()), PromptMode::joint());
                REQUIRE(outcome.ok());
                CHECK(*outcome.labels == m);
                ++count;
            }
    CHECK(count == 27);
}

TEST_CASE("prose-wrapped answers parse") {
    const std::string response =
        "Based on the dialogue, Zhu Cong is questioning Guo Jing sharply.\n"
        "Answer: Polarity = Negative; rel_type=affiliative;\nHIERARCHY=senior. That is my judgement.";
    const auto outcome = parse_response(response, PromptMode::joint());
    REQUIRE(outcome.ok());
    CHECK(*outcome.labels == labels(Label::Negative, Label::Affiliative, Label::Senior));
}

TEST_CASE("parse failures are classified") {
    auto kind = [](std::string_view text, PromptMode mode = PromptMode::joint()) {
        const auto o = parse_response(text, mode);
        REQUIRE_FALSE(o.ok());
        return o.error->kind;
    };
    CHECK(kind("polarity=positive; rel_type=kinship") == ParseError::Kind::MissingDimension);
    CHECK(kind("polarity=positive; polarity=negative; rel_type=kinship; hierarchy=peer") ==
          ParseError::Kind::ConflictingValues);
    CHECK(kind("polarity=hostile; rel_type=kinship; hierarchy=peer") == ParseError::Kind::UnknownLabel);
    CHECK(kind("") == ParseError::Kind::MissingDimension);
    CHECK(kind("polarity=<label>; rel_type=<label>; hierarchy=<label>") == ParseError::Kind::MissingDimension);
    // a repeated identical value is fine
    CHECK(parse_response("polarity=positive polarity=positive rel_type=other hierarchy=peer", PromptMode::joint()).ok());
    // out-of-scope keys are ignored in single-dimension mode
    const auto single = parse_response("polarity=hostile; hierarchy=junior", PromptMode::per_dimension(Dimension::Hierarchy));
    REQUIRE(single.ok());
    CHECK(single.labels->at(Dimension::Hierarchy) == Label::Junior);
    CHECK(single.labels->size() == 1);
    // keys must start at a word boundary
    CHECK(kind("xpolarity=positive rel_type=other hierarchy=peer") == ParseError::Kind::MissingDimension);
}

TEST_CASE("render_answer validates scope") {
    LabelMap partial{{Dimension::Polarity, Label::Positive}};
    CHECK_THROWS_AS(render_answer(partial, PromptMode::joint()), ValidationError);
    CHECK(render_answer(partial, PromptMode::per_dimension(Dimension::Polarity)) == "polarity=positive");
}

TEST_CASE("fine-tuning export mirrors the zero-shot prompt") {
    Dataset ds;
    ds.units.emplace("u1", demo_unit());
    ds.instances = {testing::instance("r1", "u1", "朱聪", "郭靖", labels(Label::Negative, Label::Affiliative, Label::Senior))};
    ds.roster = derive_roster(ds);
    PromptConfig cfg;
    const std::string jsonl = finetune_jsonl(ds, cfg);
    const auto rec = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
    PromptConfig zero = cfg;
    zero.exemplar_count = 0;
    const std::string prompt = render_prompt(build_prompt(ds.instances[0], ds.unit("u1"), zero, {}));
    CHECK(rec.at("instruction").get<std::string>() + "\n\n" + rec.at("input").get<std::string>() == prompt);
    CHECK(rec.at("output") == "polarity=negative; rel_type=affiliative; hierarchy=senior");

    ds.instances[0].gold.reset();
    CHECK_THROWS_AS(finetune_jsonl(ds, cfg), MissingGold);
}
