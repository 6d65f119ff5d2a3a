#pragma once

#include "credi/labels.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace credi {

/// Half-open byte range [start, end).
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - start; }
    friend bool operator==(const Span&, const Span&) = default;
};

struct Quote {
    std::string speaker;
    std::optional<std::string> addressee;
    std::string utterance;
    /// Byte range of the utterance inside the owning unit's context.
    Span span;

    friend bool operator==(const Quote&, const Quote&) = default;
};

struct DialogueUnit {
    std::string id;
    std::string novel_id;
    std::string context;
    std::vector<Quote> quotes;
    /// Where `context` sits in the source novel text, when known.
    std::optional<Span> source_span;

    friend bool operator==(const DialogueUnit&, const DialogueUnit&) = default;
};

/// Directed (subject -> object) relation between two characters in one unit.
struct RelationInstance {
    std::string id;
    std::string unit_id;
    std::string subject;
    std::string object;
    std::optional<LabelMap> gold;
    std::optional<LabelMap> predicted;

    friend bool operator==(const RelationInstance&, const RelationInstance&) = default;
};

struct Dataset {
    std::map<std::string, DialogueUnit> units;
    std::vector<RelationInstance> instances;
    std::set<std::string> roster;

    const DialogueUnit& unit(const std::string& id) const;
    std::size_t gold_label_count() const noexcept;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Names referenced by units (speakers, addressees) and instances.
std::set<std::string> derive_roster(const Dataset& ds);

/// Throws ValidationError subclasses on the first violated invariant.
void validate(const Dataset& ds);

// ---------------------------------------------------------------------------
// JSONL corpus format

/// Loads a corpus file: one DialogueUnit per line, instances embedded.
/// Malformed records raise SchemaError with the 1-based line number.
Dataset load_dataset(const std::string& path);
Dataset parse_dataset(std::string_view jsonl, const std::string& source_name = "<memory>");

/// Serializes units in id order, instances grouped under their unit in
/// dataset order. `include_predicted` adds a "predicted" object when present.
std::string dump_dataset(const Dataset& ds, bool include_predicted = false);
void save_dataset(const Dataset& ds, const std::string& path, bool include_predicted = false);

// ---------------------------------------------------------------------------
// Statistics

struct DimensionStats {
    Dimension dimension = Dimension::Polarity;
    std::array<std::size_t, kLabelsPerDimension> counts{};
    /// Percentages over instances with gold labels; empty when there are none.
    std::optional<std::array<double, kLabelsPerDimension>> percentages;
};

struct StatsReport {
    std::size_t unit_count = 0;
    std::size_t instance_count = 0;
    std::size_t gold_instance_count = 0;
    std::size_t gold_label_count = 0;
    std::size_t character_count = 0;
    std::size_t quote_count = 0;
    std::array<DimensionStats, 3> dimensions{};
};

StatsReport dataset_stats(const Dataset& ds);

// ---------------------------------------------------------------------------
// Splitting

struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    /// Parses "4/5" or "0.8" style strings (decimal forms become exact rationals).
    static Fraction parse(const std::string& s);
    std::string to_string() const;
    friend bool operator==(const Fraction& a, const Fraction& b) {
        return a.num * b.den == b.num * a.den;
    }
};

struct SplitSpec {
    Fraction train{8, 10};
    Fraction val{1, 10};
    Fraction test{1, 10};
    std::uint64_t seed = 42;

    /// Throws ConfigError unless all fractions are positive and sum to exactly 1.
    void validate() const;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
    friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

/// floor(N * train), floor(N * val), remainder.
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

struct DatasetSplit {
    Dataset train;
    Dataset val;
    Dataset test;
};

DatasetSplit split_dataset(const Dataset& ds, const SplitSpec& spec);

/// Keeps only `kept` instances (given as indices into ds.instances, any
/// order), retains their units, rebuilds the roster.
Dataset subset(const Dataset& ds, std::vector<std::size_t> kept);

// ---------------------------------------------------------------------------
// Anonymization

using NameMap = std::map<std::string, std::string>;

struct AnonymizedDataset {
    Dataset dataset;
    NameMap name_map; ///< original name -> code
};

/// Replaces every roster name by "C" + zero-padded index (three digits or
/// more), assignment order shuffled by `seed`. Text fields get whole-token,
/// longest-match-first replacement.
AnonymizedDataset anonymize_names(const Dataset& ds, std::uint64_t seed);

/// Longest-match-first replacement of `mapping` keys inside `text`. When
/// `whole_token` is set, a key that begins (ends) with an ASCII word character
/// only matches when the preceding (following) byte is not a word character.
std::string replace_names(std::string_view text, const NameMap& mapping, bool whole_token);

/// Swaps keys and values.
NameMap invert(const NameMap& mapping);

/// Applies an inverse map (code -> name) to every name and text field.
Dataset restore_names(const Dataset& ds, const NameMap& name_map);

// ---------------------------------------------------------------------------
// Balancing

struct BalanceSpec {
    Dimension dimension = Dimension::Polarity;
    std::size_t min_count = 10;
    std::optional<std::size_t> max_count; ///< nullopt = unlimited
    std::uint64_t seed = 42;
};

/// Drops classes with fewer than min_count gold instances, down-samples
/// classes above max_count, keeps the surviving instances in original order.
Dataset balance_labels(const Dataset& ds, const BalanceSpec& spec);

} // namespace credi
