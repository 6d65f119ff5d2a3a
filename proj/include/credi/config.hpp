#pragma once

#include "credi/corpus.hpp"
#include "credi/dialogue.hpp"
#include "credi/evaluation.hpp"
#include "credi/inference.hpp"
#include "credi/network.hpp"
#include "credi/prompting.hpp"
#include "credi/retrieval.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace credi {

struct PathsConfig {
    std::string novels = "novels";        ///< directory of *.txt chapters (ingest input)
    std::string roster = "roster.txt";    ///< one character name per line
    std::string corpus = "corpus.jsonl";
    std::string splits = "out/splits";    ///< directory for train/val/test JSONL
    std::string index = "out/index.bin";
    std::string predictions = "out/predictions.jsonl";
    std::string reports = "out/reports";  ///< directory for evaluation and ablation reports
    std::string network = "out/network";  ///< path stem; the format extension is appended
    std::string roles;                    ///< optional role annotation file
    std::string finetune = "out/finetune.jsonl";
};

struct EmbedderConfig {
    std::string kind = "hash"; ///< "hash" or "http"
    std::size_t dim = 256;
    std::string endpoint;
    std::string model;
    std::size_t batch_size = 32;
    std::size_t parallelism = 1;
};

struct AnonymizeConfig {
    bool enabled = false;
    std::uint64_t seed = 0;
};

struct BalanceConfig {
    bool enabled = false;
    BalanceSpec spec;
};

struct RunConfig {
    std::string eval_split = "test"; ///< "train", "val", "test" or "all"
    bool exclude_self = true;
};

struct NetworkConfig {
    LabelSource source = LabelSource::Gold;
    std::vector<GraphFormat> formats{GraphFormat::GraphML, GraphFormat::Dot, GraphFormat::Json};
    bool include_roster = false;
};

/// Everything the command-line driver needs, loaded from one JSON file.
struct PipelineConfig {
    PathsConfig paths;
    SegmenterConfig segmenter;
    PromptConfig prompt;
    BackendConfig backend;
    EmbedderConfig embedder;
    SplitSpec split;
    AnonymizeConfig anonymize;
    BalanceConfig balance;
    RunConfig run;
    AblationConfig ablation;
    NetworkConfig network;

    /// Relative paths resolve against this directory (the config file's).
    std::string base_dir = ".";

    std::string resolve(const std::string& path) const;
    void validate() const;
};

/// Keys that must be present: every random choice is seeded explicitly.
inline const std::vector<std::string> kRequiredConfigKeys{"split.seed", "anonymize.seed", "balance.seed"};

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);
/// Unknown keys, wrong types and missing seeds raise ConfigError.
PipelineConfig config_from_json(const nlohmann::ordered_json& j);

/// Leaf key ("section.key") -> value; arrays are leaves.
std::map<std::string, nlohmann::ordered_json> flatten_config(const nlohmann::ordered_json& j);
/// Every settable key, in file order. Command-line flags are "--" + key.
std::vector<std::string> config_keys();
/// Overrides one leaf from its textual form: strings verbatim, string
/// arrays comma-separated, everything else as JSON. Throws ConfigError.
void apply_override(nlohmann::ordered_json& j, const std::string& key, const std::string& value);

PipelineConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});
void save_config(const PipelineConfig& cfg, const std::string& path);

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& cfg);

} // namespace credi
