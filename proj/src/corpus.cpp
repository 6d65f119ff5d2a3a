#include "credi/corpus.hpp"

#include "credi/error.hpp"
#include "credi/rng.hpp"
#include "credi/text.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <functional>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace credi {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const DialogueUnit& Dataset::unit(const std::string& id) const {
    auto it = units.find(id);
    if (it == units.end()) throw DanglingReference("unknown dialogue unit '" + id + "'");
    return it->second;
}

std::size_t Dataset::gold_label_count() const noexcept {
    std::size_t n = 0;
    for (const auto& inst : instances)
        if (inst.gold) n += inst.gold->size();
    return n;
}

std::set<std::string> derive_roster(const Dataset& ds) {
    std::set<std::string> names;
    for (const auto& [id, u] : ds.units) {
        for (const auto& q : u.quotes) {
            names.insert(q.speaker);
            if (q.addressee) names.insert(*q.addressee);
        }
    }
    for (const auto& inst : ds.instances) {
        names.insert(inst.subject);
        names.insert(inst.object);
    }
    return names;
}

namespace {

void check_quotes(const DialogueUnit& u, const std::function<void(const std::string&, const std::string&)>& fail) {
    if (u.quotes.empty()) fail("quotes", "a dialogue unit needs at least one quote");
    std::size_t prev_start = 0;
    for (std::size_t i = 0; i < u.quotes.size(); ++i) {
        const Quote& q = u.quotes[i];
        const std::string field = fmt::format("quotes[{}]", i);
        if (q.speaker.empty()) fail(field + ".speaker", "speaker must be non-empty");
        if (q.addressee && q.addressee->empty()) fail(field + ".addressee", "addressee must be non-empty when present");
        if (q.utterance.empty()) fail(field + ".utterance", "utterance must be non-empty");
        if (q.span.start > q.span.end || q.span.end > u.context.size())
            fail(field + ".span", "span out of range of context");
        if (std::string_view(u.context).substr(q.span.start, q.span.size()) != q.utterance)
            fail(field + ".span", "span does not slice the utterance out of context");
        if (i > 0 && q.span.start < prev_start) fail(field + ".span", "quotes must be ordered by span start");
        prev_start = q.span.start;
    }
}

void check_labels(const LabelMap& labels, const std::function<void(const std::string&)>& fail) {
    for (Dimension d : kDimensions)
        if (!labels.contains(d)) fail(std::string(key(d)));
    for (const auto& [d, l] : labels)
        if (dimension_of(l) != d) fail(std::string(key(d)));
}

} // namespace

void validate(const Dataset& ds) {
    for (const auto& [id, u] : ds.units) {
        if (id != u.id) throw ValidationError("unit key '" + id + "' does not match unit id '" + u.id + "'");
        check_quotes(u, [&](const std::string& field, const std::string& what) {
            throw ValidationError("unit '" + id + "', " + field + ": " + what);
        });
    }
    std::unordered_set<std::string> seen;
    for (const auto& inst : ds.instances) {
        if (!seen.insert(inst.id).second) throw ValidationError("duplicate instance id '" + inst.id + "'");
        if (!ds.units.contains(inst.unit_id))
            throw DanglingReference("instance '" + inst.id + "' references unknown unit '" + inst.unit_id + "'");
        if (inst.subject.empty() || inst.object.empty())
            throw ValidationError("instance '" + inst.id + "' has an empty character name");
        if (inst.subject == inst.object)
            throw ValidationError("instance '" + inst.id + "' relates a character to itself");
        if (!ds.roster.contains(inst.subject) || !ds.roster.contains(inst.object))
            throw ValidationError("instance '" + inst.id + "' names a character missing from the roster");
        auto fail = [&](const std::string& which) {
            return [&, which](const std::string& k) {
                throw ValidationError("instance '" + inst.id + "' " + which + " labels invalid at '" + k + "'");
            };
        };
        if (inst.gold) check_labels(*inst.gold, fail("gold"));
        if (inst.predicted) check_labels(*inst.predicted, fail("predicted"));
    }
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

class RecordReader {
public:
    explicit RecordReader(std::size_t line) : line_(line) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw SchemaError(line_, field, what);
    }

    const json& require(const json& obj, const std::string& k, const std::string& path) const {
        auto it = obj.find(k);
        if (it == obj.end() || it->is_null()) fail(path + k, "missing");
        return *it;
    }

    std::string string_field(const json& obj, const std::string& k, const std::string& path) const {
        const json& v = require(obj, k, path);
        if (!v.is_string()) fail(path + k, "expected a string");
        return v.get<std::string>();
    }

    Span span_field(const json& v, const std::string& field) const {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() || !v[1].is_number_unsigned())
            fail(field, "expected [start, end] byte offsets");
        return Span{v[0].get<std::size_t>(), v[1].get<std::size_t>()};
    }

    LabelMap labels_field(const json& v, const std::string& field) const {
        if (!v.is_object()) fail(field, "expected an object of dimension labels");
        LabelMap labels;
        for (Dimension d : kDimensions) {
            const std::string k(key(d));
            auto it = v.find(k);
            if (it == v.end() || it->is_null()) fail(field + "." + k, "missing label");
            if (!it->is_string()) fail(field + "." + k, "expected a label token");
            auto label = label_from_token(d, it->get<std::string>());
            if (!label) fail(field + "." + k, "unknown label '" + it->get<std::string>() + "'");
            labels.emplace(d, *label);
        }
        for (const auto& [k, _] : v.items())
            if (!dimension_from_key(k)) fail(field + "." + k, "unknown dimension");
        return labels;
    }

private:
    std::size_t line_;
};

ordered_json labels_to_json(const LabelMap& labels) {
    ordered_json out = ordered_json::object();
    for (Dimension d : kDimensions) {
        auto it = labels.find(d);
        if (it != labels.end()) out[std::string(key(d))] = std::string(token(it->second));
    }
    return out;
}

} // namespace

Dataset parse_dataset(std::string_view jsonl, const std::string& source_name) {
    if (auto bad = text::find_invalid_utf8(jsonl)) throw EncodingError(source_name, *bad);

    Dataset ds;
    std::unordered_set<std::string> instance_ids;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t eol = jsonl.find('\n', pos);
        if (eol == std::string_view::npos) eol = jsonl.size();
        const std::string_view line = text::trim(jsonl.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;

        const RecordReader r(line_no);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            r.fail("<record>", std::string("invalid JSON: ") + e.what());
        }
        if (!rec.is_object()) r.fail("<record>", "expected a JSON object");

        DialogueUnit u;
        u.id = r.string_field(rec, "id", "");
        if (u.id.empty()) r.fail("id", "must be non-empty");
        if (ds.units.contains(u.id)) r.fail("id", "duplicate dialogue unit id '" + u.id + "'");
        u.novel_id = rec.contains("novel_id") && !rec["novel_id"].is_null() ? r.string_field(rec, "novel_id", "") : "";
        u.context = r.string_field(rec, "context", "");
        if (auto it = rec.find("source_span"); it != rec.end() && !it->is_null())
            u.source_span = r.span_field(*it, "source_span");

        const json& quotes = r.require(rec, "quotes", "");
        if (!quotes.is_array()) r.fail("quotes", "expected an array");
        for (std::size_t i = 0; i < quotes.size(); ++i) {
            const std::string path = fmt::format("quotes[{}].", i);
            const json& qj = quotes[i];
            if (!qj.is_object()) r.fail(path.substr(0, path.size() - 1), "expected an object");
            Quote q;
            q.speaker = r.string_field(qj, "speaker", path);
            if (auto it = qj.find("addressee"); it != qj.end() && !it->is_null()) {
                if (!it->is_string()) r.fail(path + "addressee", "expected a string or null");
                q.addressee = it->get<std::string>();
            }
            q.utterance = r.string_field(qj, "utterance", path);
            q.span = r.span_field(r.require(qj, "span", path), path + "span");
            u.quotes.push_back(std::move(q));
        }
        check_quotes(u, [&](const std::string& field, const std::string& what) { r.fail(field, what); });

        if (auto it = rec.find("instances"); it != rec.end() && !it->is_null()) {
            if (!it->is_array()) r.fail("instances", "expected an array");
            for (std::size_t i = 0; i < it->size(); ++i) {
                const std::string path = fmt::format("instances[{}].", i);
                const json& ij = (*it)[i];
                if (!ij.is_object()) r.fail(path.substr(0, path.size() - 1), "expected an object");
                RelationInstance inst;
                inst.id = r.string_field(ij, "id", path);
                if (inst.id.empty()) r.fail(path + "id", "must be non-empty");
                if (!instance_ids.insert(inst.id).second) r.fail(path + "id", "duplicate instance id '" + inst.id + "'");
                inst.unit_id = u.id;
                if (auto uid = ij.find("unit_id"); uid != ij.end() && !uid->is_null()) {
                    if (!uid->is_string() || uid->get<std::string>() != u.id)
                        throw DanglingReference(fmt::format("{}: line {}, instance '{}' references unit '{}' outside its record",
                                                            source_name, line_no, inst.id,
                                                            uid->is_string() ? uid->get<std::string>() : uid->dump()));
                }
                inst.subject = r.string_field(ij, "subject", path);
                inst.object = r.string_field(ij, "object", path);
                if (inst.subject.empty() || inst.object.empty()) r.fail(path + "subject", "character names must be non-empty");
                if (inst.subject == inst.object) r.fail(path + "object", "subject and object must differ");
                if (auto g = ij.find("gold"); g != ij.end() && !g->is_null())
                    inst.gold = r.labels_field(*g, path + "gold");
                if (auto p = ij.find("predicted"); p != ij.end() && !p->is_null())
                    inst.predicted = r.labels_field(*p, path + "predicted");
                ds.instances.push_back(std::move(inst));
            }
        }
        ds.units.emplace(u.id, std::move(u));
    }
    ds.roster = derive_roster(ds);
    return ds;
}

Dataset load_dataset(const std::string& path) { return parse_dataset(text::read_file(path), path); }

std::string dump_dataset(const Dataset& ds, bool include_predicted) {
    std::map<std::string, std::vector<const RelationInstance*>> by_unit;
    for (const auto& inst : ds.instances) by_unit[inst.unit_id].push_back(&inst);

    std::string out;
    for (const auto& [id, u] : ds.units) {
        ordered_json rec;
        rec["id"] = u.id;
        rec["novel_id"] = u.novel_id;
        rec["context"] = u.context;
        if (u.source_span) rec["source_span"] = {u.source_span->start, u.source_span->end};
        rec["quotes"] = ordered_json::array();
        for (const auto& q : u.quotes) {
            ordered_json qj;
            qj["speaker"] = q.speaker;
            qj["addressee"] = q.addressee ? ordered_json(*q.addressee) : ordered_json(nullptr);
            qj["utterance"] = q.utterance;
            qj["span"] = {q.span.start, q.span.end};
            rec["quotes"].push_back(std::move(qj));
        }
        rec["instances"] = ordered_json::array();
        if (auto it = by_unit.find(id); it != by_unit.end()) {
            for (const RelationInstance* inst : it->second) {
                ordered_json ij;
                ij["id"] = inst->id;
                ij["subject"] = inst->subject;
                ij["object"] = inst->object;
                ij["gold"] = inst->gold ? labels_to_json(*inst->gold) : ordered_json(nullptr);
                if (include_predicted && inst->predicted) ij["predicted"] = labels_to_json(*inst->predicted);
                rec["instances"].push_back(std::move(ij));
            }
        }
        out += rec.dump(-1, ' ', false, json::error_handler_t::strict);
        out += '\n';
    }
    return out;
}

void save_dataset(const Dataset& ds, const std::string& path, bool include_predicted) {
    text::write_file(path, dump_dataset(ds, include_predicted));
}

// ---------------------------------------------------------------------------
// Statistics

StatsReport dataset_stats(const Dataset& ds) {
    StatsReport r;
    r.unit_count = ds.units.size();
    r.instance_count = ds.instances.size();
    r.character_count = ds.roster.size();
    for (const auto& [id, u] : ds.units) r.quote_count += u.quotes.size();
    for (std::size_t d = 0; d < kDimensions.size(); ++d) r.dimensions[d].dimension = kDimensions[d];

    for (const auto& inst : ds.instances) {
        if (!inst.gold) continue;
        ++r.gold_instance_count;
        r.gold_label_count += inst.gold->size();
        for (const auto& [d, l] : *inst.gold) ++r.dimensions[dimension_index(d)].counts[class_index(l)];
    }
    if (r.gold_instance_count > 0) {
        for (auto& dim : r.dimensions) {
            std::array<double, kLabelsPerDimension> pct{};
            for (std::size_t c = 0; c < kLabelsPerDimension; ++c)
                pct[c] = 100.0 * static_cast<double>(dim.counts[c]) / static_cast<double>(r.gold_instance_count);
            dim.percentages = pct;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Splitting

Fraction Fraction::parse(const std::string& s) {
    const std::string t(text::trim(s));
    auto parse_int = [&](const std::string& part) -> std::int64_t {
        if (part.empty() || !std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; }))
            throw ConfigError("invalid fraction '" + s + "'");
        return std::stoll(part);
    };
    Fraction f;
    if (auto slash = t.find('/'); slash != std::string::npos) {
        f.num = parse_int(t.substr(0, slash));
        f.den = parse_int(t.substr(slash + 1));
    } else if (auto dot = t.find('.'); dot != std::string::npos) {
        const std::string whole = dot == 0 ? "0" : t.substr(0, dot);
        const std::string frac = t.substr(dot + 1);
        if (frac.size() > 15) throw ConfigError("too many decimals in fraction '" + s + "'");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        f.num = parse_int(whole) * den + (frac.empty() ? 0 : parse_int(frac));
        f.den = den;
    } else {
        f.num = parse_int(t);
        f.den = 1;
    }
    if (f.den == 0) throw ConfigError("zero denominator in fraction '" + s + "'");
    const std::int64_t g = std::gcd(f.num, f.den);
    if (g > 1) {
        f.num /= g;
        f.den /= g;
    }
    return f;
}

std::string Fraction::to_string() const {
    const auto g = std::max<std::int64_t>(std::gcd(num, den), 1);
    return fmt::format("{}/{}", num / g, den / g);
}

void SplitSpec::validate() const {
    for (const Fraction* f : {&train, &val, &test})
        if (f->num <= 0 || f->den <= 0) throw ConfigError("split fractions must be positive");
    // a/b + c/d + e/f == 1  <=>  a*d*f + c*b*f + e*b*d == b*d*f
    __extension__ using wide = __int128;
    const wide lhs = wide(train.num) * val.den * test.den + wide(val.num) * train.den * test.den +
                     wide(test.num) * train.den * val.den;
    const wide rhs = wide(train.den) * val.den * test.den;
    if (lhs != rhs) throw ConfigError("split fractions must sum to exactly 1");
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
    spec.validate();
    __extension__ using wide = unsigned __int128;
    SplitSizes s;
    s.train = static_cast<std::size_t>(wide(n) * static_cast<std::uint64_t>(spec.train.num) /
                                       static_cast<std::uint64_t>(spec.train.den));
    s.val = static_cast<std::size_t>(wide(n) * static_cast<std::uint64_t>(spec.val.num) /
                                     static_cast<std::uint64_t>(spec.val.den));
    s.test = n - s.train - s.val;
    return s;
}

Dataset subset(const Dataset& ds, std::vector<std::size_t> kept) {
    std::sort(kept.begin(), kept.end());
    Dataset out;
    out.instances.reserve(kept.size());
    for (std::size_t idx : kept) {
        const RelationInstance& inst = ds.instances.at(idx);
        out.instances.push_back(inst);
        if (!out.units.contains(inst.unit_id)) out.units.emplace(inst.unit_id, ds.unit(inst.unit_id));
    }
    out.roster = derive_roster(out);
    return out;
}

DatasetSplit split_dataset(const Dataset& ds, const SplitSpec& spec) {
    spec.validate();
    const std::size_t n = ds.instances.size();
    if (n == 0) throw EmptyDataset();
    const SplitSizes sizes = split_sizes(n, spec);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(std::span<std::size_t>(order));

    auto part = [&](std::size_t from, std::size_t count) {
        return subset(ds, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(from),
                                                   order.begin() + static_cast<std::ptrdiff_t>(from + count)));
    };
    return DatasetSplit{part(0, sizes.train), part(sizes.train, sizes.val), part(sizes.train + sizes.val, sizes.test)};
}

// ---------------------------------------------------------------------------
// Anonymization

namespace {

struct Matcher {
    // keys grouped by first byte, longest first
    std::array<std::vector<std::pair<std::string, std::string>>, 256> buckets;

    explicit Matcher(const NameMap& mapping) {
        for (const auto& [from, to] : mapping) {
            if (from.empty()) continue;
            buckets[static_cast<unsigned char>(from[0])].emplace_back(from, to);
        }
        for (auto& b : buckets)
            std::stable_sort(b.begin(), b.end(),
                             [](const auto& x, const auto& y) { return x.first.size() > y.first.size(); });
    }
};

struct Rewritten {
    std::string text;
    std::vector<std::size_t> boundaries; ///< input boundaries mapped to output offsets
};

// Replaces names in `text`; matches never straddle any of `boundaries`
// (sorted byte offsets), which are translated into output offsets.
Rewritten rewrite(std::string_view text, const Matcher& m, bool whole_token, const std::vector<std::size_t>& boundaries) {
    Rewritten out;
    out.text.reserve(text.size());
    out.boundaries.resize(boundaries.size());
    std::size_t next_boundary = 0;
    auto flush_boundaries = [&](std::size_t in_pos) {
        while (next_boundary < boundaries.size() && boundaries[next_boundary] <= in_pos) {
            out.boundaries[next_boundary] = out.text.size() - (in_pos - boundaries[next_boundary]);
            ++next_boundary;
        }
    };
    auto crosses_boundary = [&](std::size_t start, std::size_t end) {
        auto it = std::upper_bound(boundaries.begin(), boundaries.end(), start);
        return it != boundaries.end() && *it < end;
    };

    std::size_t i = 0;
    while (i < text.size()) {
        flush_boundaries(i);
        const auto& bucket = m.buckets[static_cast<unsigned char>(text[i])];
        bool matched = false;
        for (const auto& [from, to] : bucket) {
            if (text.compare(i, from.size(), from) != 0) continue;
            const std::size_t end = i + from.size();
            if (whole_token) {
                if (text::is_ascii_word_char(from.front()) && i > 0 && text::is_ascii_word_char(text[i - 1])) continue;
                if (text::is_ascii_word_char(from.back()) && end < text.size() && text::is_ascii_word_char(text[end]))
                    continue;
            }
            if (crosses_boundary(i, end)) continue;
            out.text += to;
            i = end;
            matched = true;
            break;
        }
        if (matched) continue;
        std::size_t len = text::code_point_length(static_cast<unsigned char>(text[i]));
        len = std::min(len, text.size() - i);
        // never step over a boundary
        auto it = std::upper_bound(boundaries.begin(), boundaries.end(), i);
        if (it != boundaries.end() && *it < i + len) len = *it - i;
        out.text.append(text.substr(i, len));
        i += len;
    }
    flush_boundaries(text.size());
    return out;
}

std::string map_name(const std::string& name, const NameMap& mapping) {
    auto it = mapping.find(name);
    return it == mapping.end() ? name : it->second;
}

Dataset remap(const Dataset& ds, const NameMap& mapping, bool whole_token) {
    const Matcher m(mapping);
    Dataset out;
    for (const auto& [id, u] : ds.units) {
        DialogueUnit nu = u;
        std::vector<std::size_t> bounds;
        bounds.reserve(u.quotes.size() * 2);
        for (const auto& q : u.quotes) {
            bounds.push_back(q.span.start);
            bounds.push_back(q.span.end);
        }
        std::vector<std::size_t> sorted = bounds;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        Rewritten rw = rewrite(u.context, m, whole_token, sorted);
        auto translate = [&](std::size_t off) {
            return rw.boundaries[static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), off) - sorted.begin())];
        };
        nu.context = std::move(rw.text);
        for (auto& q : nu.quotes) {
            q.speaker = map_name(q.speaker, mapping);
            if (q.addressee) q.addressee = map_name(*q.addressee, mapping);
            q.span = Span{translate(q.span.start), translate(q.span.end)};
            q.utterance = nu.context.substr(q.span.start, q.span.size());
        }
        out.units.emplace(id, std::move(nu));
    }
    out.instances = ds.instances;
    for (auto& inst : out.instances) {
        inst.subject = map_name(inst.subject, mapping);
        inst.object = map_name(inst.object, mapping);
    }
    for (const auto& name : ds.roster) out.roster.insert(map_name(name, mapping));
    return out;
}

} // namespace

std::string replace_names(std::string_view text, const NameMap& mapping, bool whole_token) {
    return rewrite(text, Matcher(mapping), whole_token, {}).text;
}

NameMap invert(const NameMap& mapping) {
    NameMap inv;
    for (const auto& [k, v] : mapping) {
        if (!inv.emplace(v, k).second) throw CodeCollision("mapping is not injective at '" + v + "'");
    }
    return inv;
}

AnonymizedDataset anonymize_names(const Dataset& ds, std::uint64_t seed) {
    std::vector<std::string> names(ds.roster.begin(), ds.roster.end());
    Rng rng(seed);
    rng.shuffle(std::span<std::string>(names));

    const std::size_t width = std::max<std::size_t>(3, std::to_string(names.size()).size());
    NameMap mapping;
    std::set<std::string> codes;
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::string code = fmt::format("C{:0{}}", i + 1, width);
        if (!codes.insert(code).second) throw CodeCollision("code assigned twice: " + code);
        mapping.emplace(names[i], std::move(code));
    }

    // Restoration is only exact when no code already occurs in the source.
    if (!codes.empty()) {
        auto scan = [&](std::string_view where, std::string_view s) {
            for (std::size_t p = s.find('C'); p != std::string_view::npos; p = s.find('C', p + 1)) {
                if (codes.contains(std::string(s.substr(p, width + 1))))
                    throw CodeCollision(fmt::format("{} already contains code '{}'", where, s.substr(p, width + 1)));
            }
        };
        for (const auto& name : ds.roster) scan("roster", name);
        for (const auto& [id, u] : ds.units) scan("unit " + id, u.context);
    }

    AnonymizedDataset out;
    out.dataset = remap(ds, mapping, true);
    out.name_map = std::move(mapping);
    return out;
}

Dataset restore_names(const Dataset& ds, const NameMap& name_map) { return remap(ds, invert(name_map), false); }

// ---------------------------------------------------------------------------
// Balancing

Dataset balance_labels(const Dataset& ds, const BalanceSpec& spec) {
    if (spec.max_count && *spec.max_count < spec.min_count)
        throw ConfigError("balance max_count must be >= min_count");

    std::array<std::vector<std::size_t>, kLabelsPerDimension> classes;
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        const auto& inst = ds.instances[i];
        if (!inst.gold) throw MissingGold(inst.id);
        auto it = inst.gold->find(spec.dimension);
        if (it == inst.gold->end()) throw MissingGold(inst.id);
        classes[class_index(it->second)].push_back(i);
    }

    Rng rng(spec.seed);
    std::vector<std::size_t> kept;
    for (auto& members : classes) {
        if (members.empty() || members.size() < spec.min_count) continue;
        if (spec.max_count && members.size() > *spec.max_count) {
            // partial Fisher-Yates: first max_count slots become a uniform sample
            for (std::size_t i = 0; i < *spec.max_count; ++i) {
                const auto j = i + static_cast<std::size_t>(rng.below(members.size() - i));
                std::swap(members[i], members[j]);
            }
            members.resize(*spec.max_count);
        }
        kept.insert(kept.end(), members.begin(), members.end());
    }
    if (kept.empty()) throw AllClassesFiltered();
    return subset(ds, std::move(kept));
}

} // namespace credi
