#include "credi/dialogue.hpp"

#include "credi/error.hpp"
#include "credi/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <regex>

namespace credi {

std::string_view to_string(Locale l) noexcept { return l == Locale::Zh ? "zh" : "en"; }

Locale locale_from_string(std::string_view s) {
    if (s == "zh") return Locale::Zh;
    if (s == "en") return Locale::En;
    throw ConfigError("unknown locale '" + std::string(s) + "' (expected zh or en)");
}

std::string_view to_string(DialogueVariant v) noexcept { return v == DialogueVariant::Expanded ? "expanded" : "basic"; }

DialogueVariant dialogue_variant_from_string(std::string_view s) {
    if (s == "expanded") return DialogueVariant::Expanded;
    if (s == "basic") return DialogueVariant::Basic;
    throw ConfigError("unknown dialogue variant '" + std::string(s) + "' (expected expanded or basic)");
}

std::string_view to_string(SegmentationWarning::Kind k) noexcept {
    switch (k) {
    case SegmentationWarning::Kind::UnbalancedQuotes: return "unbalanced_quotes";
    case SegmentationWarning::Kind::UnattributedQuote: return "unattributed_quote";
    case SegmentationWarning::Kind::EmptyQuote: return "empty_quote";
    }
    return "";
}

SegmenterConfig SegmenterConfig::chinese() { return SegmenterConfig{}; }

SegmenterConfig SegmenterConfig::english() {
    SegmenterConfig cfg;
    cfg.quote_delimiters = {{"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\"", "\""}};
    cfg.attribution_verbs = {"said", "says", "asked", "replied", "shouted", "cried", "whispered", "answered"};
    cfg.chapter_pattern = "^\\s*(CHAPTER|Chapter)\\s+\\S+";
    return cfg;
}

void SegmenterConfig::validate() const {
    if (quote_delimiters.empty()) throw ConfigError("at least one quote delimiter pair is required");
    for (std::size_t i = 0; i < quote_delimiters.size(); ++i) {
        if (quote_delimiters[i].first.empty() || quote_delimiters[i].second.empty())
            throw ConfigError("quote delimiters must be non-empty");
        for (std::size_t j = 0; j < i; ++j)
            if (quote_delimiters[i] == quote_delimiters[j]) throw ConfigError("duplicate quote delimiter pair");
    }
    for (const auto& v : attribution_verbs)
        if (v.empty()) throw ConfigError("attribution verbs must be non-empty");
    if (max_gap_paragraphs < 1) throw ConfigError("max_gap_paragraphs must be >= 1");
    try {
        std::regex re(chapter_pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw ConfigError("invalid chapter_pattern: " + std::string(e.what()));
    }
}

namespace {

struct Paragraph {
    std::size_t start = 0;
    std::size_t end = 0;
};

struct RawQuote {
    std::size_t para = 0;
    std::size_t open = 0;      ///< offset of the opening delimiter
    std::size_t content = 0;   ///< first utterance byte
    std::size_t close = 0;     ///< offset of the closing delimiter
    std::size_t close_end = 0; ///< first byte after the closing delimiter
    std::optional<std::string> speaker;
    std::optional<std::string> addressee;
};

struct Occurrence {
    std::size_t start = 0;
    std::size_t end = 0;
    const std::string* what = nullptr;
};

bool starts_at(std::string_view text, std::size_t pos, std::string_view s) {
    return pos + s.size() <= text.size() && text.compare(pos, s.size(), s) == 0;
}

bool token_boundary_ok(std::string_view text, std::size_t start, std::size_t end, std::string_view word) {
    if (text::is_ascii_word_char(word.front()) && start > 0 && text::is_ascii_word_char(text[start - 1])) return false;
    if (text::is_ascii_word_char(word.back()) && end < text.size() && text::is_ascii_word_char(text[end])) return false;
    return true;
}

// Every occurrence of any of `words` in text[from, to), respecting ASCII word boundaries.
std::vector<Occurrence> find_all(std::string_view text, std::size_t from, std::size_t to,
                                 const std::vector<std::string>& words) {
    std::vector<Occurrence> out;
    for (const auto& w : words) {
        if (w.empty()) continue;
        std::size_t pos = text.find(w, from);
        while (pos != std::string_view::npos && pos + w.size() <= to) {
            if (token_boundary_ok(text, pos, pos + w.size(), w)) out.push_back({pos, pos + w.size(), &w});
            pos = text.find(w, pos + 1);
        }
    }
    return out;
}

bool is_clause_terminator(std::string_view cp) {
    static const std::vector<std::string_view> kTerminators{"。", "！", "？", ".", "!", "?", "；", ";", "\n"};
    return std::find(kTerminators.begin(), kTerminators.end(), cp) != kTerminators.end();
}

bool is_addressee_marker(std::string_view text) {
    static const std::vector<std::string_view> kMarkers{"对", "向", "朝", "to "};
    for (auto m : kMarkers)
        if (text.size() >= m.size() && text.substr(text.size() - m.size()) == m) return true;
    return false;
}

bool is_soft_punct(std::string_view cp) {
    static const std::vector<std::string_view> kSoft{"：", ":", "，", ",", " ", "\t", "\xE3\x80\x80"};
    return std::find(kSoft.begin(), kSoft.end(), cp) != kSoft.end();
}

class Segmenter {
public:
    Segmenter(std::string_view text, const std::set<std::string>& roster, const SegmenterConfig& cfg)
        : text_(text), cfg_(cfg), roster_(roster.begin(), roster.end()),
          chapter_re_(cfg.chapter_pattern, std::regex::ECMAScript) {
        // longest verbs first so "说道" wins over "道" at the same end
        verbs_ = cfg.attribution_verbs;
        std::stable_sort(verbs_.begin(), verbs_.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    }

    SegmentationResult run(const std::string& novel_id) {
        split_paragraphs();
        for (std::size_t p = 0; p < paragraphs_.size(); ++p) find_quotes(p);
        for (auto& q : quotes_) attribute_by_cue(q);
        build_units(novel_id);
        return std::move(result_);
    }

private:
    void warn(SegmentationWarning::Kind kind, std::size_t pos, std::string detail) {
        result_.warnings.push_back({kind, pos, std::move(detail)});
    }

    void split_paragraphs() {
        std::size_t pos = 0;
        while (pos <= text_.size()) {
            std::size_t eol = text_.find('\n', pos);
            if (eol == std::string_view::npos) eol = text_.size();
            std::size_t end = eol;
            if (end > pos && text_[end - 1] == '\r') --end;
            const std::string_view line = text_.substr(pos, end - pos);
            if (!text::trim(line).empty()) {
                const std::string line_str(line);
                if (std::regex_search(line_str, chapter_re_, std::regex_constants::match_continuous)) {
                    chapter_breaks_.push_back(paragraphs_.size());
                } else {
                    paragraphs_.push_back({pos, end});
                }
            }
            if (eol == text_.size()) break;
            pos = eol + 1;
        }
    }

    // Returns the index of the delimiter pair whose open starts at pos.
    std::optional<std::size_t> open_at(std::size_t pos) const {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < cfg_.quote_delimiters.size(); ++i) {
            const auto& open = cfg_.quote_delimiters[i].first;
            if (starts_at(text_, pos, open) && (!best || open.size() > cfg_.quote_delimiters[*best].first.size()))
                best = i;
        }
        return best;
    }

    bool close_at(std::size_t pos) const {
        for (const auto& [open, close] : cfg_.quote_delimiters)
            if (open != close && starts_at(text_, pos, close)) return true;
        return false;
    }

    void find_quotes(std::size_t p) {
        const Paragraph& para = paragraphs_[p];
        std::size_t pos = para.start;
        while (pos < para.end) {
            if (auto pair = open_at(pos)) {
                const auto& [open, close] = cfg_.quote_delimiters[*pair];
                const std::size_t content = pos + open.size();
                std::size_t depth = 1;
                std::size_t scan = content;
                std::optional<std::size_t> close_pos;
                while (scan < para.end) {
                    if (open != close && starts_at(text_, scan, open)) {
                        ++depth;
                        scan += open.size();
                        continue;
                    }
                    if (starts_at(text_, scan, close)) {
                        if (--depth == 0) {
                            close_pos = scan;
                            break;
                        }
                        scan += close.size();
                        continue;
                    }
                    scan += text::code_point_length(static_cast<unsigned char>(text_[scan]));
                }
                if (!close_pos) {
                    warn(SegmentationWarning::Kind::UnbalancedQuotes, pos, "opening delimiter without a close in its paragraph");
                    pos = content;
                    continue;
                }
                if (text::trim(text_.substr(content, *close_pos - content)).empty()) {
                    warn(SegmentationWarning::Kind::EmptyQuote, pos, "empty quotation");
                } else {
                    quotes_.push_back(RawQuote{p, pos, content, *close_pos, *close_pos + close.size(), std::nullopt, std::nullopt});
                }
                pos = *close_pos + close.size();
                continue;
            }
            if (close_at(pos)) warn(SegmentationWarning::Kind::UnbalancedQuotes, pos, "closing delimiter without an open");
            pos += text::code_point_length(static_cast<unsigned char>(text_[pos]));
        }
    }

    std::size_t quote_index(const RawQuote& q) const { return static_cast<std::size_t>(&q - quotes_.data()); }

    // Narration byte ranges of q's paragraph that lie before `limit`, nearest last.
    std::vector<Paragraph> narration_before(const RawQuote& q, std::size_t limit) const {
        std::vector<Paragraph> ranges;
        std::size_t cursor = paragraphs_[q.para].start;
        for (std::size_t i = 0; i < quotes_.size(); ++i) {
            const RawQuote& other = quotes_[i];
            if (other.para != q.para) continue;
            if (other.open >= limit) break;
            if (other.open > cursor) ranges.push_back({cursor, other.open});
            cursor = other.close_end;
        }
        if (limit > cursor) ranges.push_back({cursor, limit});
        return ranges;
    }

    std::optional<std::string> nearest_name_before(const RawQuote& q, std::size_t limit) const {
        auto ranges = narration_before(q, limit);
        for (auto it = ranges.rbegin(); it != ranges.rend(); ++it) {
            auto occ = find_all(text_, it->start, it->end, roster_);
            if (occ.empty()) continue;
            const auto best = std::max_element(occ.begin(), occ.end(), [](const Occurrence& a, const Occurrence& b) {
                if (a.end != b.end) return a.end < b.end;
                return a.end - a.start < b.end - b.start;
            });
            return *best->what;
        }
        return std::nullopt;
    }

    std::size_t pre_start(const RawQuote& q) const {
        const std::size_t i = quote_index(q);
        if (i > 0 && quotes_[i - 1].para == q.para) return quotes_[i - 1].close_end;
        return paragraphs_[q.para].start;
    }

    std::optional<std::size_t> next_open_in_para(const RawQuote& q) const {
        const std::size_t i = quote_index(q);
        if (i + 1 < quotes_.size() && quotes_[i + 1].para == q.para) return quotes_[i + 1].open;
        return std::nullopt;
    }

    // The first roster name of the sentence holding the verb is its subject;
    // a later name right after 对/向/朝 is the addressee.
    bool attribute_sentence_subject(RawQuote& q, std::size_t from, std::size_t verb_start) {
        std::size_t sentence = from;
        for (std::size_t pos = from; pos < verb_start;) {
            const std::size_t len = text::code_point_length(static_cast<unsigned char>(text_[pos]));
            if (is_clause_terminator(text_.substr(pos, len))) sentence = pos + len;
            pos += len;
        }
        auto names = find_all(text_, sentence, verb_start, roster_);
        if (names.empty()) return false;
        std::sort(names.begin(), names.end(), [](const Occurrence& a, const Occurrence& b) {
            if (a.start != b.start) return a.start < b.start;
            return a.end > b.end;
        });
        q.speaker = *names.front().what;
        for (std::size_t i = 1; i < names.size(); ++i) {
            const auto& n = names[i];
            if (n.start < names.front().end || *n.what == *q.speaker) continue;
            if (is_addressee_marker(text_.substr(sentence, n.start - sentence))) {
                q.addressee = *n.what;
                break;
            }
        }
        return true;
    }

    // Cue rules: a verb at the tail of the text introducing the quote, or a
    // verb in the clause that follows it.
    void attribute_by_cue(RawQuote& q) {
        const std::size_t from = pre_start(q);
        auto verbs = find_all(text_, from, q.open, verbs_);
        const Occurrence* tail = nullptr;
        for (const auto& v : verbs) {
            bool only_soft = true;
            for (auto cp : text::code_points(text_.substr(v.end, q.open - v.end)))
                if (!is_soft_punct(cp)) only_soft = false;
            if (only_soft && (!tail || v.end > tail->end || (v.end == tail->end && v.start < tail->start))) tail = &v;
        }
        if (tail) {
            if (attribute_sentence_subject(q, from, tail->start)) return;
            if (auto name = nearest_name_before(q, tail->start)) {
                q.speaker = name;
                return;
            }
        }

        // post-quote clause, up to the first terminator
        const std::size_t para_end = paragraphs_[q.para].end;
        const auto next_open = next_open_in_para(q);
        const std::size_t limit = next_open.value_or(para_end);
        std::size_t clause_end = limit;
        bool terminated = false;
        for (std::size_t pos = q.close_end; pos < limit;) {
            const std::size_t len = text::code_point_length(static_cast<unsigned char>(text_[pos]));
            if (is_clause_terminator(text_.substr(pos, len))) {
                clause_end = pos;
                terminated = true;
                break;
            }
            pos += len;
        }
        if (!terminated && next_open) return; // the clause introduces the next quote
        auto post_verbs = find_all(text_, q.close_end, clause_end, verbs_);
        if (post_verbs.empty()) return;
        const auto first_verb = *std::min_element(post_verbs.begin(), post_verbs.end(),
                                                  [](const Occurrence& a, const Occurrence& b) { return a.start < b.start; });
        auto names = find_all(text_, q.close_end, clause_end, roster_);
        if (names.empty()) return;
        // prefer the nearest name before the verb, else the nearest after it
        const Occurrence* best = nullptr;
        for (const auto& n : names)
            if (n.end <= first_verb.start && (!best || n.end > best->end)) best = &n;
        if (!best)
            for (const auto& n : names)
                if (n.start >= first_verb.end && (!best || n.start < best->start)) best = &n;
        if (best) q.speaker = *best->what;
    }

    void build_units(const std::string& novel_id) {
        std::size_t begin = 0;
        while (begin < quotes_.size()) {
            std::size_t end = begin + 1;
            while (end < quotes_.size() && same_chain(quotes_[end - 1].para, quotes_[end].para)) ++end;
            emit_unit(novel_id, begin, end);
            begin = end;
        }
    }

    bool same_chain(std::size_t prev_para, std::size_t next_para) const {
        if (next_para == prev_para) return true;
        for (std::size_t b : chapter_breaks_)
            if (b > prev_para && b <= next_para) return false;
        return next_para - prev_para - 1 <= static_cast<std::size_t>(cfg_.max_gap_paragraphs);
    }

    void emit_unit(const std::string& novel_id, std::size_t begin, std::size_t end) {
        std::vector<RawQuote*> chain;
        for (std::size_t i = begin; i < end; ++i) chain.push_back(&quotes_[i]);

        auto parties = [&] {
            std::vector<std::string> names;
            for (const RawQuote* q : chain)
                if (q->speaker && std::find(names.begin(), names.end(), *q->speaker) == names.end())
                    names.push_back(*q->speaker);
            return names;
        };

        // alternation inside a two-party chain; named addressees count as parties
        auto known = parties();
        for (const RawQuote* q : chain)
            if (q->addressee && std::find(known.begin(), known.end(), *q->addressee) == known.end())
                known.push_back(*q->addressee);
        if (known.size() == 2) {
            auto other = [&](const std::string& s) { return s == known[0] ? known[1] : known[0]; };
            for (bool changed = true; changed;) {
                changed = false;
                for (std::size_t i = 0; i < chain.size(); ++i) {
                    if (chain[i]->speaker) continue;
                    if (i > 0 && chain[i - 1]->speaker) {
                        chain[i]->speaker = other(*chain[i - 1]->speaker);
                        changed = true;
                    } else if (i + 1 < chain.size() && chain[i + 1]->speaker) {
                        chain[i]->speaker = other(*chain[i + 1]->speaker);
                        changed = true;
                    }
                }
            }
        }
        // last resort: nearest name in the narration before the quote
        for (RawQuote* q : chain)
            if (!q->speaker) q->speaker = nearest_name_before(*q, q->open);

        std::vector<RawQuote*> kept;
        for (RawQuote* q : chain) {
            if (q->speaker) {
                kept.push_back(q);
            } else {
                warn(SegmentationWarning::Kind::UnattributedQuote, q->open, "no speaker could be attributed");
            }
        }
        if (kept.empty()) return;
        chain = kept;
        const auto final_parties = parties();

        DialogueUnit unit;
        unit.id = fmt::format("{}-u{:05}", novel_id, ++unit_counter_);
        unit.novel_id = novel_id;
        const std::size_t ctx_start = paragraphs_[chain.front()->para].start;
        const std::size_t ctx_end = paragraphs_[chain.back()->para].end;
        unit.context = std::string(text_.substr(ctx_start, ctx_end - ctx_start));
        unit.source_span = Span{ctx_start, ctx_end};
        for (const RawQuote* q : chain) {
            Quote out;
            out.speaker = *q->speaker;
            if (q->addressee && *q->addressee != out.speaker)
                out.addressee = q->addressee;
            else if (final_parties.size() == 2)
                out.addressee = out.speaker == final_parties[0] ? final_parties[1] : final_parties[0];
            out.span = Span{q->content - ctx_start, q->close - ctx_start};
            out.utterance = unit.context.substr(out.span.start, out.span.size());
            unit.quotes.push_back(std::move(out));
        }
        result_.units.push_back(std::move(unit));
    }

    std::string_view text_;
    const SegmenterConfig& cfg_;
    std::vector<std::string> roster_;
    std::vector<std::string> verbs_;
    std::regex chapter_re_;
    std::vector<Paragraph> paragraphs_;
    std::vector<std::size_t> chapter_breaks_; ///< index of the paragraph following each heading
    std::vector<RawQuote> quotes_;
    std::size_t unit_counter_ = 0;
    SegmentationResult result_;
};

} // namespace

SegmentationResult segment_dialogue_chains(std::string_view text, const std::set<std::string>& roster,
                                           const SegmenterConfig& cfg, const std::string& novel_id) {
    cfg.validate();
    if (auto bad = text::find_invalid_utf8(text)) throw EncodingError(novel_id, *bad);
    if (text.empty()) return {};
    return Segmenter(text, roster, cfg).run(novel_id);
}

std::vector<RelationInstance> propose_instances(const DialogueUnit& unit) {
    std::vector<std::string> parties;
    auto add = [&](const std::string& n) {
        if (std::find(parties.begin(), parties.end(), n) == parties.end()) parties.push_back(n);
    };
    for (const auto& q : unit.quotes) {
        add(q.speaker);
        if (q.addressee) add(*q.addressee);
    }
    std::vector<RelationInstance> out;
    for (const auto& a : parties) {
        for (const auto& b : parties) {
            if (a == b) continue;
            RelationInstance inst;
            inst.id = fmt::format("{}-r{}", unit.id, out.size() + 1);
            inst.unit_id = unit.id;
            inst.subject = a;
            inst.object = b;
            out.push_back(std::move(inst));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string_view strip_delimiters(std::string_view s) {
    static const std::vector<std::string_view> kClosers{"”", "」", "』", "’", "\"", "'"};
    static const std::vector<std::string_view> kOpeners{"“", "「", "『", "‘", "\"", "'"};
    for (bool changed = true; changed;) {
        changed = false;
        s = text::trim(s);
        for (auto c : kClosers)
            if (s.starts_with(c)) {
                s.remove_prefix(c.size());
                changed = true;
            }
        for (auto o : kOpeners)
            if (s.ends_with(o)) {
                s.remove_suffix(o.size());
                changed = true;
            }
    }
    return s;
}

} // namespace

ExpandedDialogue build_expanded_dialogue(const DialogueUnit& unit) {
    ExpandedDialogue out;
    std::string_view ctx = unit.context;
    std::size_t cursor = 0;
    auto narration = [&](std::size_t from, std::size_t to) {
        if (to <= from) return;
        const std::string_view piece = strip_delimiters(ctx.substr(from, to - from));
        if (!piece.empty()) out.lines.push_back({DialogueLine::Kind::Narration, std::nullopt, std::nullopt, std::string(piece)});
    };
    for (const auto& q : unit.quotes) {
        narration(cursor, q.span.start);
        out.lines.push_back({DialogueLine::Kind::AttributedQuote, q.speaker, q.addressee, q.utterance});
        cursor = std::max(cursor, q.span.end);
    }
    narration(cursor, ctx.size());
    return out;
}

std::string render_quote_line(const std::string& speaker, const std::optional<std::string>& addressee,
                              std::string_view utterance, Locale locale) {
    if (locale == Locale::Zh) {
        if (addressee) return fmt::format("{}对{}说：“{}”", speaker, *addressee, utterance);
        return fmt::format("{}说：“{}”", speaker, utterance);
    }
    if (addressee) return fmt::format("{} said to {}: \"{}\"", speaker, *addressee, utterance);
    return fmt::format("{} said: \"{}\"", speaker, utterance);
}

std::string render_expanded(const ExpandedDialogue& dialogue, Locale locale) {
    std::string out;
    for (const auto& line : dialogue.lines) {
        if (!out.empty()) out += '\n';
        if (line.kind == DialogueLine::Kind::Narration) {
            out += line.text;
        } else {
            out += render_quote_line(line.speaker.value_or(""), line.addressee, line.text, locale);
        }
    }
    return out;
}

std::string build_basic_dialogue(const DialogueUnit& unit) { return unit.context; }

std::string dialogue_text(const DialogueUnit& unit, DialogueVariant variant, Locale locale) {
    if (variant == DialogueVariant::Basic) return build_basic_dialogue(unit);
    return render_expanded(build_expanded_dialogue(unit), locale);
}

std::map<std::string, std::size_t> count_quotes(const Dataset& ds) {
    std::map<std::string, std::size_t> counts;
    for (const auto& [id, u] : ds.units)
        for (const auto& q : u.quotes) ++counts[q.speaker];
    return counts;
}

} // namespace credi
