#pragma once

#include "credi/corpus.hpp"
#include "credi/dialogue.hpp"
#include "credi/labels.hpp"

#include <optional>
#include <string>
#include <vector>

namespace credi {

/// Joint extraction of all three dimensions, or a single dimension.
struct PromptMode {
    std::optional<Dimension> single;

    static PromptMode joint() { return {}; }
    static PromptMode per_dimension(Dimension d) { return PromptMode{d}; }

    bool is_joint() const noexcept { return !single.has_value(); }
    std::vector<Dimension> dimensions() const;
    std::string name() const; ///< "joint" or "per_dimension:<key>"
    static PromptMode parse(std::string_view s);

    friend bool operator==(const PromptMode&, const PromptMode&) = default;
};

inline constexpr std::string_view kTargetPairPlaceholder = "{TARGET_PAIR}";
inline constexpr std::string_view kCandidateLabelsPlaceholder = "{CANDIDATE_LABELS}";
inline constexpr std::string_view kDialoguePlaceholder = "{DIALOGUE}";
inline constexpr int kMaxExemplars = 16;

struct PromptConfig {
    PromptMode mode = PromptMode::joint();
    DialogueVariant dialogue_variant = DialogueVariant::Expanded;
    int exemplar_count = 3;
    Locale locale = Locale::Zh;
    /// Instruction templates; empty means the shipped default for the locale.
    std::string joint_template;
    std::string per_dimension_template;

    /// Template in effect for `mode`, falling back to the shipped default.
    const std::string& active_template() const;
    void validate() const;
};

/// Shipped instruction templates.
const std::string& default_template(Locale locale, bool joint);

struct TargetPair {
    std::string subject;
    std::string object;

    std::string render() const { return subject + " -> " + object; }
    friend bool operator==(const TargetPair&, const TargetPair&) = default;
};

struct Exemplar {
    std::string instance_id;
    std::string dialogue;
    TargetPair target;
    std::string answer;

    friend bool operator==(const Exemplar&, const Exemplar&) = default;
};

struct CandidateList {
    Dimension dimension;
    std::vector<Label> labels;

    friend bool operator==(const CandidateList&, const CandidateList&) = default;
};

struct PromptSpec {
    std::string instance_id;
    PromptMode mode;
    std::string instruction;
    std::vector<Exemplar> exemplars;
    std::string query_dialogue;
    TargetPair query_target;
    std::vector<CandidateList> candidate_labels;
};

/// Assembles a prompt for `instance`. At most cfg.exemplar_count exemplars are
/// used (the first ones). Throws UnitMismatch when unit.id != instance.unit_id.
PromptSpec build_prompt(const RelationInstance& instance, const DialogueUnit& unit, const PromptConfig& cfg,
                        const std::vector<Exemplar>& exemplars);

/// Fixed section order: instruction, one DIALOGUE/TARGET/ANSWER block per
/// exemplar, then the query target ending with "ANSWER:".
std::string render_prompt(const PromptSpec& spec);

/// Instruction section alone (the template with placeholders filled).
std::string render_instruction(const PromptSpec& spec);

/// Query block alone: target line followed by the trailing "ANSWER:".
std::string render_query(const PromptSpec& spec);

/// "polarity=<v>; rel_type=<v>; hierarchy=<v>" or "<key>=<v>" for one dimension.
/// Throws ValidationError if a dimension in scope is missing.
std::string render_answer(const LabelMap& labels, const PromptMode& mode);

struct ParseError {
    enum class Kind { MissingDimension, ConflictingValues, UnknownLabel };
    Kind kind = Kind::MissingDimension;
    std::string detail;

    friend bool operator==(const ParseError&, const ParseError&) = default;
};

std::string_view to_string(ParseError::Kind k) noexcept;
ParseError::Kind parse_error_kind_from_string(std::string_view s);

/// Exactly one of `labels` / `error` is set.
struct ParseOutcome {
    std::optional<LabelMap> labels;
    std::optional<ParseError> error;

    bool ok() const noexcept { return labels.has_value(); }
};

/// Scans free text for "key=value" pairs (case-insensitive, prose tolerated).
/// Only keys in scope for `mode` are considered; never throws.
ParseOutcome parse_response(std::string_view text, const PromptMode& mode) noexcept;

} // namespace credi
