#include "credi/prompting.hpp"

#include "credi/error.hpp"
#include "credi/text.hpp"
#include "credi/default_templates.hpp"

#include <fmt/format.h>

namespace credi {

std::vector<Dimension> PromptMode::dimensions() const {
    if (single) return {*single};
    return {kDimensions.begin(), kDimensions.end()};
}

std::string PromptMode::name() const {
    if (!single) return "joint";
    return "per_dimension:" + std::string(key(*single));
}

PromptMode PromptMode::parse(std::string_view s) {
    if (s == "joint") return joint();
    constexpr std::string_view prefix = "per_dimension:";
    if (s.starts_with(prefix)) {
        if (auto d = dimension_from_key(s.substr(prefix.size()))) return per_dimension(*d);
    }
    throw ConfigError("unknown prompt mode '" + std::string(s) +
                      "' (expected joint or per_dimension:<polarity|rel_type|hierarchy>)");
}

const std::string& default_template(Locale locale, bool joint) {
    static const std::string joint_zh{text::trim(generated::kJointZh)};
    static const std::string per_zh{text::trim(generated::kPerDimensionZh)};
    static const std::string joint_en{text::trim(generated::kJointEn)};
    static const std::string per_en{text::trim(generated::kPerDimensionEn)};
    if (locale == Locale::Zh) return joint ? joint_zh : per_zh;
    return joint ? joint_en : per_en;
}

const std::string& PromptConfig::active_template() const {
    const std::string& custom = mode.is_joint() ? joint_template : per_dimension_template;
    return custom.empty() ? default_template(locale, mode.is_joint()) : custom;
}

void PromptConfig::validate() const {
    if (exemplar_count < 0 || exemplar_count > kMaxExemplars)
        throw ConfigError(fmt::format("exemplar_count must be within [0, {}]", kMaxExemplars));
    for (const std::string* tpl : {&joint_template, &per_dimension_template}) {
        if (tpl->empty()) continue;
        for (auto ph : {kTargetPairPlaceholder, kCandidateLabelsPlaceholder, kDialoguePlaceholder})
            if (tpl->find(ph) == std::string::npos)
                throw ConfigError("prompt template is missing placeholder " + std::string(ph));
    }
}

PromptSpec build_prompt(const RelationInstance& instance, const DialogueUnit& unit, const PromptConfig& cfg,
                        const std::vector<Exemplar>& exemplars) {
    cfg.validate();
    if (unit.id != instance.unit_id)
        throw UnitMismatch("instance '" + instance.id + "' belongs to unit '" + instance.unit_id + "', got '" + unit.id + "'");

    PromptSpec spec;
    spec.instance_id = instance.id;
    spec.mode = cfg.mode;
    spec.query_dialogue = dialogue_text(unit, cfg.dialogue_variant, cfg.locale);
    spec.query_target = TargetPair{instance.subject, instance.object};
    for (Dimension d : cfg.mode.dimensions()) {
        auto labels = labels_of(d);
        spec.candidate_labels.push_back(CandidateList{d, {labels.begin(), labels.end()}});
    }
    const auto k = std::min(exemplars.size(), static_cast<std::size_t>(cfg.exemplar_count));
    spec.exemplars.assign(exemplars.begin(), exemplars.begin() + static_cast<std::ptrdiff_t>(k));

    std::string instruction = cfg.active_template();
    auto fill = [&](std::string_view placeholder, const std::string& value) {
        for (std::size_t pos = instruction.find(placeholder); pos != std::string::npos;
             pos = instruction.find(placeholder, pos + value.size()))
            instruction.replace(pos, placeholder.size(), value);
    };
    std::string candidates;
    for (const auto& list : spec.candidate_labels) {
        if (!candidates.empty()) candidates += '\n';
        candidates += fmt::format("- {} ({}):", key(list.dimension), title(list.dimension));
        for (std::size_t i = 0; i < list.labels.size(); ++i)
            candidates += fmt::format("{}{}", i == 0 ? " " : " | ", token(list.labels[i]));
    }
    // the dialogue goes last so placeholder-like text inside it is left alone
    fill(kTargetPairPlaceholder, spec.query_target.render());
    fill(kCandidateLabelsPlaceholder, candidates);
    fill(kDialoguePlaceholder, spec.query_dialogue);
    spec.instruction = std::move(instruction);
    return spec;
}

std::string render_instruction(const PromptSpec& spec) { return spec.instruction; }

std::string render_query(const PromptSpec& spec) {
    return fmt::format("### Query\nTARGET: {}\nANSWER:", spec.query_target.render());
}

std::string render_prompt(const PromptSpec& spec) {
    std::string out = render_instruction(spec);
    out += "\n\n";
    for (std::size_t i = 0; i < spec.exemplars.size(); ++i) {
        const Exemplar& ex = spec.exemplars[i];
        out += fmt::format("### Example {}\nDIALOGUE:\n{}\nTARGET: {}\nANSWER: {}\n\n", i + 1, ex.dialogue,
                           ex.target.render(), ex.answer);
    }
    out += render_query(spec);
    return out;
}

std::string render_answer(const LabelMap& labels, const PromptMode& mode) {
    std::string out;
    for (Dimension d : mode.dimensions()) {
        auto it = labels.find(d);
        if (it == labels.end()) throw ValidationError("answer is missing dimension " + std::string(key(d)));
        if (dimension_of(it->second) != d) throw ValidationError("label does not belong to dimension " + std::string(key(d)));
        if (!out.empty()) out += "; ";
        out += fmt::format("{}={}", key(d), token(it->second));
    }
    return out;
}

std::string_view to_string(ParseError::Kind k) noexcept {
    switch (k) {
    case ParseError::Kind::MissingDimension: return "missing_dimension";
    case ParseError::Kind::ConflictingValues: return "conflicting_values";
    case ParseError::Kind::UnknownLabel: return "unknown_label";
    }
    return "";
}

ParseError::Kind parse_error_kind_from_string(std::string_view s) {
    for (auto k : {ParseError::Kind::MissingDimension, ParseError::Kind::ConflictingValues, ParseError::Kind::UnknownLabel})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown parse error kind '" + std::string(s) + "'");
}

ParseOutcome parse_response(std::string_view raw, const PromptMode& mode) noexcept {
    ParseOutcome outcome;
    try {
        const std::string lower = text::to_lower_ascii(raw);
        auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
        auto is_alpha = [](char c) { return c >= 'a' && c <= 'z'; };

        LabelMap found;
        std::optional<ParseError> unknown;
        std::optional<ParseError> conflict;
        for (Dimension d : mode.dimensions()) {
            const std::string_view k = key(d);
            for (std::size_t pos = lower.find(k); pos != std::string::npos; pos = lower.find(k, pos + 1)) {
                if (pos > 0 && text::is_ascii_word_char(lower[pos - 1])) continue;
                std::size_t i = pos + k.size();
                while (i < lower.size() && is_space(lower[i])) ++i;
                if (i >= lower.size() || lower[i] != '=') continue;
                ++i;
                while (i < lower.size() && is_space(lower[i])) ++i;
                const std::size_t vstart = i;
                while (i < lower.size() && (is_alpha(lower[i]) || lower[i] == '_')) ++i;
                if (i == vstart) continue; // "polarity=<label>" style echoes are not answers
                const std::string value = lower.substr(vstart, i - vstart);
                auto label = label_from_token(d, value);
                if (!label) {
                    if (!unknown) unknown = ParseError{ParseError::Kind::UnknownLabel, fmt::format("{}={}", k, value)};
                    continue;
                }
                auto [it, inserted] = found.emplace(d, *label);
                if (!inserted && it->second != *label && !conflict)
                    conflict = ParseError{ParseError::Kind::ConflictingValues,
                                          fmt::format("{}={} vs {}={}", k, token(it->second), k, token(*label))};
            }
        }
        if (unknown) {
            outcome.error = unknown;
        } else if (conflict) {
            outcome.error = conflict;
        } else {
            for (Dimension d : mode.dimensions()) {
                if (!found.contains(d)) {
                    outcome.error = ParseError{ParseError::Kind::MissingDimension, std::string(key(d))};
                    break;
                }
            }
            if (!outcome.error) outcome.labels = std::move(found);
        }
    } catch (...) {
        outcome.labels.reset();
        outcome.error = ParseError{ParseError::Kind::MissingDimension, "internal parse failure"};
    }
    return outcome;
}

} // namespace credi
