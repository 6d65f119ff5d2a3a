#pragma once

#include "credi/corpus.hpp"
#include "credi/retrieval.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace credi::testing {

inline std::string fixture(const std::string& name) {
    return (std::filesystem::path(CREDI_FIXTURES_DIR) / name).string();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("credi-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline LabelMap labels(Label p, Label r, Label h) {
    return LabelMap{{Dimension::Polarity, p}, {Dimension::RelType, r}, {Dimension::Hierarchy, h}};
}

inline RelationInstance instance(std::string id, std::string unit, std::string s, std::string o,
                                 std::optional<LabelMap> gold = std::nullopt) {
    RelationInstance inst;
    inst.id = std::move(id);
    inst.unit_id = std::move(unit);
    inst.subject = std::move(s);
    inst.object = std::move(o);
    inst.gold = std::move(gold);
    return inst;
}

/// Minimal valid unit: one quote per speaker in order.
inline DialogueUnit unit(const std::string& id, const std::vector<std::pair<std::string, std::string>>& lines) {
    DialogueUnit u;
    u.id = id;
    u.novel_id = "test";
    for (const auto& [speaker, utterance] : lines) {
        u.context += speaker + "道：“";
        Quote q;
        q.speaker = speaker;
        q.utterance = utterance;
        q.span = Span{u.context.size(), u.context.size() + utterance.size()};
        u.context += utterance + "”";
        u.quotes.push_back(std::move(q));
    }
    return u;
}

// ---------------------------------------------------------------------------
// Oracles, written independently of the library code they check.

struct OracleHit {
    std::string id;
    double score;
};

/// Scores every entry, sorts the full list (score descending, id ascending), cuts at k.
inline std::vector<OracleHit> brute_force_topk(const std::vector<std::pair<std::string, std::vector<float>>>& entries,
                                               const std::vector<float>& query, std::size_t k) {
    std::vector<OracleHit> all;
    for (const auto& [id, v] : entries) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<double>(v[i]) * static_cast<double>(query[i]);
        all.push_back({id, s});
    }
    std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

/// Weighted F1 from per-class confusion counts.
inline double oracle_weighted_f1(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                                 const std::vector<std::string>& classes) {
    double total = 0.0;
    for (const auto& c : classes) {
        double tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            const bool g = gold[i] == c, p = pred[i] == c;
            if (g) ++support;
            if (g && p) ++tp;
            if (!g && p) ++fp;
            if (g && !p) ++fn;
        }
        const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        total += support * f1;
    }
    return total / static_cast<double>(gold.size());
}

inline std::vector<float> random_unit_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<float> normal(0.0f, 1.0f);
    std::vector<float> v(dim);
    for (auto& x : v) x = normal(rng);
    normalize(v);
    return v;
}

} // namespace credi::testing
