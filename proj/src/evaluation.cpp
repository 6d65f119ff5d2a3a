#include "credi/evaluation.hpp"

#include "credi/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <unordered_map>

namespace credi {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

/// Per-class counts. Predictions equal to -1 are failures: they add to no
/// class's predicted count and so only hurt recall.
struct Tally {
    std::vector<std::size_t> support;
    std::vector<std::size_t> predicted;
    std::vector<std::size_t> correct;
};

Tally tally(std::span<const int> gold, std::span<const int> pred, std::size_t n_classes) {
    Tally t{std::vector<std::size_t>(n_classes), std::vector<std::size_t>(n_classes), std::vector<std::size_t>(n_classes)};
    for (std::size_t i = 0; i < gold.size(); ++i) {
        ++t.support[static_cast<std::size_t>(gold[i])];
        if (pred[i] >= 0) {
            ++t.predicted[static_cast<std::size_t>(pred[i])];
            if (pred[i] == gold[i]) ++t.correct[static_cast<std::size_t>(gold[i])];
        }
    }
    return t;
}

struct PRF {
    double precision;
    double recall;
    double f1;
};

PRF prf(const Tally& t, std::size_t c) {
    const double p = t.predicted[c] == 0 ? 0.0 : static_cast<double>(t.correct[c]) / static_cast<double>(t.predicted[c]);
    const double r = t.support[c] == 0 ? 0.0 : static_cast<double>(t.correct[c]) / static_cast<double>(t.support[c]);
    const double f = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    return {p, r, f};
}

double weighted(const Tally& t, std::size_t n) {
    double sum = 0.0;
    for (std::size_t c = 0; c < t.support.size(); ++c) sum += static_cast<double>(t.support[c]) * prf(t, c).f1;
    return sum / static_cast<double>(n);
}

} // namespace

double weighted_f1(std::span<const std::string> gold, std::span<const std::string> pred,
                   std::span<const std::string> classes) {
    if (gold.size() != pred.size())
        throw LengthMismatch(fmt::format("gold has {} labels, pred has {}", gold.size(), pred.size()));
    if (gold.empty()) throw LengthMismatch("weighted F1 needs at least one label");
    std::unordered_map<std::string, int> index;
    for (std::size_t c = 0; c < classes.size(); ++c) index.emplace(classes[c], static_cast<int>(c));
    auto lookup = [&](const std::string& l) {
        auto it = index.find(l);
        if (it == index.end()) throw UnknownLabel("label '" + l + "' is not among the classes");
        return it->second;
    };
    std::vector<int> g, p;
    g.reserve(gold.size());
    p.reserve(pred.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        g.push_back(lookup(gold[i]));
        p.push_back(lookup(pred[i]));
    }
    return weighted(tally(g, p, classes.size()), gold.size());
}

double weighted_f1(std::span<const Label> gold, std::span<const Label> pred) {
    if (gold.size() != pred.size())
        throw LengthMismatch(fmt::format("gold has {} labels, pred has {}", gold.size(), pred.size()));
    if (gold.empty()) throw LengthMismatch("weighted F1 needs at least one label");
    const Dimension d = dimension_of(gold.front());
    std::vector<int> g, p;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (dimension_of(gold[i]) != d || dimension_of(pred[i]) != d)
            throw UnknownLabel("labels from different dimensions cannot be scored together");
        g.push_back(static_cast<int>(class_index(gold[i])));
        p.push_back(static_cast<int>(class_index(pred[i])));
    }
    return weighted(tally(g, p, kLabelsPerDimension), gold.size());
}

// ---------------------------------------------------------------------------

const DimensionReport* EvalReport::find(Dimension d) const {
    for (const auto& r : dimensions)
        if (r.dimension == d) return &r;
    return nullptr;
}

EvalReport evaluate(const Dataset& ds, const std::vector<PredictionRecord>& records,
                    const std::vector<Dimension>& dimensions) {
    std::unordered_map<std::string, const PredictionRecord*> by_id;
    for (const auto& rec : records) by_id.emplace(rec.instance_id, &rec);

    EvalReport report;
    report.instance_count = ds.instances.size();
    for (Dimension d : dimensions) {
        DimensionReport dr;
        dr.dimension = d;
        std::vector<int> gold, pred;
        for (const auto& inst : ds.instances) {
            if (!inst.gold) throw MissingGold(inst.id);
            auto rit = by_id.find(inst.id);
            if (rit == by_id.end()) throw MissingPrediction(inst.id);
            const int g = static_cast<int>(class_index(inst.gold->at(d)));
            int p = -1;
            if (const auto& parsed = rit->second->parsed) {
                if (auto it = parsed->find(d); it != parsed->end() && dimension_of(it->second) == d)
                    p = static_cast<int>(class_index(it->second));
            }
            if (p < 0) ++dr.parse_failure_count;
            ++dr.confusion[static_cast<std::size_t>(g)][p < 0 ? kLabelsPerDimension : static_cast<std::size_t>(p)];
            gold.push_back(g);
            pred.push_back(p);
        }
        dr.evaluated = gold.size();
        if (!gold.empty()) {
            const Tally t = tally(gold, pred, kLabelsPerDimension);
            dr.weighted_f1 = weighted(t, gold.size());
            for (std::size_t c = 0; c < kLabelsPerDimension; ++c) {
                const PRF m = prf(t, c);
                dr.per_class.push_back(ClassMetrics{labels_of(d)[c], m.precision, m.recall, m.f1, t.support[c]});
            }
        } else {
            for (Label l : labels_of(d)) dr.per_class.push_back(ClassMetrics{l, 0.0, 0.0, 0.0, 0});
        }
        report.dimensions.push_back(std::move(dr));
    }
    return report;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ordered_json report_to_json(const EvalReport& report) {
    ordered_json j;
    j["instance_count"] = report.instance_count;
    j["dimensions"] = ordered_json::array();
    for (const auto& dr : report.dimensions) {
        ordered_json d;
        d["dimension"] = std::string(key(dr.dimension));
        d["weighted_f1"] = dr.weighted_f1;
        d["evaluated"] = dr.evaluated;
        d["parse_failure_count"] = dr.parse_failure_count;
        d["per_class"] = ordered_json::array();
        for (const auto& c : dr.per_class) {
            d["per_class"].push_back(ordered_json{{"label", std::string(token(c.label))},
                                                  {"precision", c.precision},
                                                  {"recall", c.recall},
                                                  {"f1", c.f1},
                                                  {"support", c.support}});
        }
        ordered_json columns = ordered_json::array();
        for (Label l : labels_of(dr.dimension)) columns.push_back(std::string(token(l)));
        columns.push_back("unparsed");
        d["confusion"] = ordered_json{{"columns", columns}, {"rows", ordered_json::array()}};
        for (const auto& row : dr.confusion) d["confusion"]["rows"].push_back(row);
        j["dimensions"].push_back(std::move(d));
    }
    return j;
}

EvalReport report_from_json(const json& j) {
    EvalReport r;
    r.instance_count = j.at("instance_count").get<std::size_t>();
    for (const auto& d : j.at("dimensions")) {
        DimensionReport dr;
        auto dim = dimension_from_key(d.at("dimension").get<std::string>());
        if (!dim) throw ValidationError("unknown dimension in report");
        dr.dimension = *dim;
        dr.weighted_f1 = d.at("weighted_f1").get<double>();
        dr.evaluated = d.at("evaluated").get<std::size_t>();
        dr.parse_failure_count = d.at("parse_failure_count").get<std::size_t>();
        for (const auto& c : d.at("per_class")) {
            auto label = label_from_token(*dim, c.at("label").get<std::string>());
            if (!label) throw ValidationError("unknown label in report");
            dr.per_class.push_back(ClassMetrics{*label, c.at("precision").get<double>(), c.at("recall").get<double>(),
                                                c.at("f1").get<double>(), c.at("support").get<std::size_t>()});
        }
        const auto& rows = d.at("confusion").at("rows");
        if (rows.size() != kLabelsPerDimension) throw ValidationError("confusion matrix has the wrong shape");
        for (std::size_t i = 0; i < kLabelsPerDimension; ++i) {
            if (rows[i].size() != kConfusionColumns) throw ValidationError("confusion matrix has the wrong shape");
            for (std::size_t k = 0; k < kConfusionColumns; ++k) dr.confusion[i][k] = rows[i][k].get<std::size_t>();
        }
        r.dimensions.push_back(std::move(dr));
    }
    return r;
}

json parse_json(std::string_view text, std::string_view schema) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("invalid report JSON: ") + e.what());
    }
    if (j.value("schema", "") != schema)
        throw ValidationError("report schema mismatch: expected " + std::string(schema));
    return j;
}

} // namespace

std::string eval_report_json(const EvalReport& report) {
    ordered_json j;
    j["schema"] = std::string(kEvalReportSchema);
    const ordered_json body = report_to_json(report);
    for (const auto& [k, v] : body.items()) j[k] = v;
    return j.dump(2) + "\n";
}

EvalReport eval_report_from_json(std::string_view text) {
    try {
        return report_from_json(parse_json(text, kEvalReportSchema));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed evaluation report: ") + e.what());
    }
}

std::string format_eval_table(const EvalReport& report, const std::string& row_name) {
    std::string out = fmt::format("{:<32}", "Model");
    for (const auto& dr : report.dimensions) out += fmt::format("{:>24}", title(dr.dimension));
    out += '\n';
    out += fmt::format("{:<32}", row_name);
    for (const auto& dr : report.dimensions) out += fmt::format("{:>24.4f}", dr.weighted_f1);
    out += "\n\n";
    for (const auto& dr : report.dimensions) {
        out += fmt::format("{} (n={}, unparsed={})\n", title(dr.dimension), dr.evaluated, dr.parse_failure_count);
        out += fmt::format("  {:<12}{:>10}{:>10}{:>10}{:>10}\n", "label", "precision", "recall", "f1", "support");
        for (const auto& c : dr.per_class)
            out += fmt::format("  {:<12}{:>10.4f}{:>10.4f}{:>10.4f}{:>10}\n", token(c.label), c.precision, c.recall, c.f1,
                               c.support);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ablation

std::string_view to_string(AblationMode m) noexcept {
    return m == AblationMode::Joint ? "joint" : "per_dimension";
}

AblationMode ablation_mode_from_string(std::string_view s) {
    if (s == "joint") return AblationMode::Joint;
    if (s == "per_dimension") return AblationMode::PerDimensionAll;
    throw ConfigError("unknown ablation mode '" + std::string(s) + "' (expected joint or per_dimension)");
}

std::string AblationCell::name() const {
    return fmt::format("{} / {} / k={}", to_string(mode), to_string(variant), shots);
}

void AblationConfig::validate() const {
    if (modes.empty() || variants.empty() || shots.empty()) throw ConfigError("ablation grid axes must be non-empty");
    for (int k : shots)
        if (k < 0 || k > kMaxExemplars) throw ConfigError(fmt::format("ablation shots must be within [0, {}]", kMaxExemplars));
}

std::vector<AblationCell> AblationConfig::cells() const {
    validate();
    std::vector<AblationCell> out;
    for (auto m : modes)
        for (auto v : variants)
            for (int k : shots) out.push_back(AblationCell{m, v, k});
    return out;
}

std::string ablation_json(const AblationTable& table) {
    ordered_json j;
    j["schema"] = std::string(kAblationSchema);
    j["columns"] = ordered_json::array();
    for (Dimension d : kDimensions) j["columns"].push_back(std::string(key(d)));
    j["rows"] = ordered_json::array();
    for (const auto& row : table.rows) {
        ordered_json r;
        r["name"] = row.cell.name();
        r["config"] = ordered_json{{"mode", std::string(to_string(row.cell.mode))},
                                   {"dialogue_variant", std::string(to_string(row.cell.variant))},
                                   {"shots", row.cell.shots}};
        r["status"] = row.report ? "ok" : "failed";
        ordered_json f1 = ordered_json::object();
        if (row.report)
            for (const auto& dr : row.report->dimensions) f1[std::string(key(dr.dimension))] = dr.weighted_f1;
        r["weighted_f1"] = std::move(f1);
        r["report"] = row.report ? report_to_json(*row.report) : ordered_json(nullptr);
        r["error"] = row.error ? ordered_json(*row.error) : ordered_json(nullptr);
        j["rows"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

AblationTable ablation_from_json(std::string_view text) {
    try {
        const json j = parse_json(text, kAblationSchema);
        AblationTable t;
        for (const auto& r : j.at("rows")) {
            AblationRow row;
            const auto& c = r.at("config");
            row.cell = AblationCell{ablation_mode_from_string(c.at("mode").get<std::string>()),
                                    dialogue_variant_from_string(c.at("dialogue_variant").get<std::string>()),
                                    c.at("shots").get<int>()};
            if (!r.at("report").is_null()) row.report = report_from_json(r.at("report"));
            if (!r.at("error").is_null()) row.error = r.at("error").get<std::string>();
            t.rows.push_back(std::move(row));
        }
        return t;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed ablation report: ") + e.what());
    }
}

std::string format_ablation_table(const AblationTable& table) {
    std::string out = fmt::format("{:<36}", "Configuration");
    for (Dimension d : kDimensions) out += fmt::format("{:>24}", title(d));
    out += '\n';
    for (const auto& row : table.rows) {
        out += fmt::format("{:<36}", row.cell.name());
        for (Dimension d : kDimensions) {
            const DimensionReport* dr = row.report ? row.report->find(d) : nullptr;
            out += dr ? fmt::format("{:>24.4f}", dr->weighted_f1) : fmt::format("{:>24}", row.report ? "-" : "failed");
        }
        out += '\n';
    }
    return out;
}

} // namespace credi
