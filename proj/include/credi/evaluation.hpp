#pragma once

#include "credi/corpus.hpp"
#include "credi/inference.hpp"
#include "credi/labels.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace credi {

/// Support-weighted mean of per-class F1, with F1 = 0 when P + R = 0.
/// Throws LengthMismatch (including empty input) and UnknownLabel.
double weighted_f1(std::span<const std::string> gold, std::span<const std::string> pred,
                   std::span<const std::string> classes);

/// Label form; `classes` defaults to the dimension of gold[0].
double weighted_f1(std::span<const Label> gold, std::span<const Label> pred);

struct ClassMetrics {
    Label label = Label::Positive;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;

    friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// Confusion columns: the three classes in canonical order, then the
/// reserved "unparsed" column for failed predictions.
inline constexpr std::size_t kConfusionColumns = kLabelsPerDimension + 1;
using ConfusionMatrix = std::array<std::array<std::size_t, kConfusionColumns>, kLabelsPerDimension>;

struct DimensionReport {
    Dimension dimension = Dimension::Polarity;
    double weighted_f1 = 0.0;
    std::vector<ClassMetrics> per_class;
    ConfusionMatrix confusion{};
    std::size_t parse_failure_count = 0;
    std::size_t evaluated = 0;

    friend bool operator==(const DimensionReport&, const DimensionReport&) = default;
};

struct EvalReport {
    std::vector<DimensionReport> dimensions;
    std::size_t instance_count = 0;

    const DimensionReport* find(Dimension d) const;
    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Scores every instance of `ds` against its prediction record. A record
/// lacking a dimension (parse or backend failure) counts as a wrong
/// prediction in that dimension. Throws MissingGold, MissingPrediction.
EvalReport evaluate(const Dataset& ds, const std::vector<PredictionRecord>& records,
                    const std::vector<Dimension>& dimensions = {kDimensions.begin(), kDimensions.end()});

inline constexpr std::string_view kEvalReportSchema = "credi.eval_report/1";
inline constexpr std::string_view kAblationSchema = "credi.ablation/1";

std::string eval_report_json(const EvalReport& report);
EvalReport eval_report_from_json(std::string_view json);

/// Fixed-width table: one row, one column per dimension, then per-class detail.
std::string format_eval_table(const EvalReport& report, const std::string& row_name);

// ---------------------------------------------------------------------------
// Ablation grid

enum class AblationMode { Joint, PerDimensionAll };

std::string_view to_string(AblationMode m) noexcept;
AblationMode ablation_mode_from_string(std::string_view s);

struct AblationCell {
    AblationMode mode = AblationMode::Joint;
    DialogueVariant variant = DialogueVariant::Expanded;
    int shots = 0;

    std::string name() const;
    friend bool operator==(const AblationCell&, const AblationCell&) = default;
};

struct AblationConfig {
    std::vector<AblationMode> modes{AblationMode::Joint, AblationMode::PerDimensionAll};
    std::vector<DialogueVariant> variants{DialogueVariant::Expanded, DialogueVariant::Basic};
    std::vector<int> shots{3};

    /// Throws ConfigError for an empty axis or shots outside [0, 16].
    void validate() const;
    std::vector<AblationCell> cells() const;
};

struct AblationRow {
    AblationCell cell;
    std::optional<EvalReport> report;
    std::optional<std::string> error;

    friend bool operator==(const AblationRow&, const AblationRow&) = default;
};

struct AblationTable {
    std::vector<AblationRow> rows;
    friend bool operator==(const AblationTable&, const AblationTable&) = default;
};

std::string ablation_json(const AblationTable& table);
AblationTable ablation_from_json(std::string_view json);
/// Rows = configurations, columns = dimensions (weighted F1).
std::string format_ablation_table(const AblationTable& table);

} // namespace credi
