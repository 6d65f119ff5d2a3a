#pragma once

#include "credi/corpus.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace credi {

enum class Locale { Zh, En };

std::string_view to_string(Locale l) noexcept;
Locale locale_from_string(std::string_view s);

/// Rule-based segmentation settings.
struct SegmenterConfig {
    /// Open/close pairs. A pair whose open equals its close toggles.
    std::vector<std::pair<std::string, std::string>> quote_delimiters{{"\xE2\x80\x9C", "\xE2\x80\x9D"},  // “ ”
                                                                      {"\xE3\x80\x8C", "\xE3\x80\x8D"}}; // 「 」
    std::vector<std::string> attribution_verbs{"道", "说道", "说", "喝道", "叫道"};
    /// Quoted paragraphs separated by more than this many narration
    /// paragraphs start a new unit.
    int max_gap_paragraphs = 2;
    /// ECMAScript regex; a line matching it is a chapter heading and breaks chains.
    std::string chapter_pattern = "^\\s*第.{1,30}(章|回)";

    static SegmenterConfig chinese();
    static SegmenterConfig english();

    /// Throws ConfigError on empty/duplicate delimiters, max_gap < 1, bad regex.
    void validate() const;
};

struct SegmentationWarning {
    enum class Kind { UnbalancedQuotes, UnattributedQuote, EmptyQuote };
    Kind kind = Kind::UnbalancedQuotes;
    std::size_t position = 0; ///< byte offset into the source text
    std::string detail;
};

std::string_view to_string(SegmentationWarning::Kind k) noexcept;

struct SegmentationResult {
    std::vector<DialogueUnit> units;
    std::vector<SegmentationWarning> warnings;
};

/// Splits novel text into dialogue chains. Unit contexts are the source
/// paragraphs from the first to the last quoted paragraph of a chain; quote
/// spans index into the context and `source_span` locates it in `text`.
SegmentationResult segment_dialogue_chains(std::string_view text, const std::set<std::string>& roster,
                                           const SegmenterConfig& cfg, const std::string& novel_id = "novel");

/// One relation instance (without labels) per ordered pair of distinct
/// speakers/addressees appearing in the unit, ids "<unit>-r<n>".
std::vector<RelationInstance> propose_instances(const DialogueUnit& unit);

// ---------------------------------------------------------------------------
// Dialogue variants

struct DialogueLine {
    enum class Kind { Narration, AttributedQuote };
    Kind kind = Kind::Narration;
    std::optional<std::string> speaker;
    std::optional<std::string> addressee;
    std::string text;

    friend bool operator==(const DialogueLine&, const DialogueLine&) = default;
};

struct ExpandedDialogue {
    std::vector<DialogueLine> lines;
};

/// Quotes become attributed lines; the narration between them is kept in order.
ExpandedDialogue build_expanded_dialogue(const DialogueUnit& unit);

/// Renders one attributed line with the locale template, e.g.
/// `朱聪对郭靖说：“…”` or `Zhu Cong said to Guo Jing: "…"`.
std::string render_quote_line(const std::string& speaker, const std::optional<std::string>& addressee,
                              std::string_view utterance, Locale locale);

std::string render_expanded(const ExpandedDialogue& dialogue, Locale locale);

/// Context with raw quotes, no speaker/addressee reconstruction.
std::string build_basic_dialogue(const DialogueUnit& unit);

enum class DialogueVariant { Expanded, Basic };

std::string_view to_string(DialogueVariant v) noexcept;
DialogueVariant dialogue_variant_from_string(std::string_view s);

std::string dialogue_text(const DialogueUnit& unit, DialogueVariant variant, Locale locale);

/// Speaker frequencies across every quote in the dataset.
std::map<std::string, std::size_t> count_quotes(const Dataset& ds);

} // namespace credi
