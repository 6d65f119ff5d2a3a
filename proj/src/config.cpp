#include "credi/config.hpp"

#include "credi/error.hpp"
#include "credi/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <set>

namespace credi {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class Reader {
public:
    Reader(const json& root, std::string section) : section_(std::move(section)) {
        if (!root.contains(section_)) return;
        const json& s = root.at(section_);
        if (!s.is_object()) throw ConfigError(fmt::format("config section '{}' must be an object", section_));
        obj_ = &s;
    }

    template <class T>
    void read(const std::string& key, T& out) const {
        if (!obj_ || !obj_->contains(key)) return;
        try {
            out = obj_->at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("config key '{}.{}' has the wrong type: {}", section_, key, e.what()));
        }
    }

    template <class T, class Convert>
    void read_as(const std::string& key, T& out, Convert convert) const {
        if (!obj_ || !obj_->contains(key)) return;
        std::string s;
        read(key, s);
        out = convert(s);
    }

    bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

private:
    std::string section_;
    const json* obj_ = nullptr;
};

json balance_max(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string item{text::trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start))};
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void flatten_into(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
    if (j.is_object() && !prefix.empty() && prefix.find('.') != std::string::npos) {
        out[prefix] = j;
        return;
    }
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten_into(v, prefix.empty() ? k : prefix + "." + k, out);
        return;
    }
    out[prefix] = j;
}

} // namespace

std::string PipelineConfig::resolve(const std::string& path) const {
    if (path.empty()) return path;
    const fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

void PipelineConfig::validate() const {
    segmenter.validate();
    prompt.validate();
    backend.validate();
    split.validate();
    ablation.validate();
    if (embedder.kind != "hash" && embedder.kind != "http")
        throw ConfigError(fmt::format("embedder.kind must be hash or http, got '{}'", embedder.kind));
    if (embedder.dim == 0) throw ConfigError("embedder.dim must be positive");
    if (embedder.parallelism == 0 || embedder.batch_size == 0)
        throw ConfigError("embedder.parallelism and embedder.batch_size must be positive");
    static const std::set<std::string> splits{"train", "val", "test", "all"};
    if (!splits.count(run.eval_split))
        throw ConfigError(fmt::format("run.eval_split must be train, val, test or all, got '{}'", run.eval_split));
    if (balance.spec.max_count && *balance.spec.max_count < balance.spec.min_count)
        throw ConfigError("balance.max_count must not be below balance.min_count");
    if (network.formats.empty()) throw ConfigError("network.formats must name at least one format");
}

json config_to_json(const PipelineConfig& c) {
    json j;
    j["paths"] = {{"novels", c.paths.novels},           {"roster", c.paths.roster},   {"corpus", c.paths.corpus},
                  {"splits", c.paths.splits},           {"index", c.paths.index},     {"predictions", c.paths.predictions},
                  {"reports", c.paths.reports},         {"network", c.paths.network}, {"roles", c.paths.roles},
                  {"finetune", c.paths.finetune}};
    json delims = json::array();
    for (const auto& [open, close] : c.segmenter.quote_delimiters) delims.push_back(open + close);
    j["segmenter"] = {{"quote_delimiters", delims},
                      {"attribution_verbs", c.segmenter.attribution_verbs},
                      {"max_gap_paragraphs", c.segmenter.max_gap_paragraphs},
                      {"chapter_pattern", c.segmenter.chapter_pattern}};
    j["prompt"] = {{"mode", c.prompt.mode.name()},
                   {"dialogue_variant", to_string(c.prompt.dialogue_variant)},
                   {"locale", to_string(c.prompt.locale)},
                   {"joint_template", c.prompt.joint_template},
                   {"per_dimension_template", c.prompt.per_dimension_template}};
    j["retrieval"] = {{"k", c.prompt.exemplar_count}, {"exclude_self", c.run.exclude_self}};
    j["embedder"] = {{"kind", c.embedder.kind},         {"dim", c.embedder.dim},
                     {"endpoint", c.embedder.endpoint}, {"model", c.embedder.model},
                     {"batch_size", c.embedder.batch_size}, {"parallelism", c.embedder.parallelism}};
    j["backend"] = {{"kind", to_string(c.backend.kind)},
                    {"endpoint", c.backend.endpoint},
                    {"model", c.backend.model},
                    {"temperature", c.backend.temperature},
                    {"max_retries", c.backend.max_retries},
                    {"timeout_seconds", c.backend.timeout_seconds},
                    {"parallelism", c.backend.parallelism},
                    {"api_key_env", c.backend.api_key_env},
                    {"rule_answer", c.backend.rule_answer},
                    {"backoff_base_ms", c.backend.backoff_base.count()},
                    {"jitter_seed", c.backend.jitter_seed}};
    j["split"] = {{"train", c.split.train.to_string()},
                  {"val", c.split.val.to_string()},
                  {"test", c.split.test.to_string()},
                  {"seed", c.split.seed}};
    j["anonymize"] = {{"enabled", c.anonymize.enabled}, {"seed", c.anonymize.seed}};
    j["balance"] = {{"enabled", c.balance.enabled},
                    {"dimension", key(c.balance.spec.dimension)},
                    {"min_count", c.balance.spec.min_count},
                    {"max_count", balance_max(c.balance.spec.max_count)},
                    {"seed", c.balance.spec.seed}};
    j["run"] = {{"eval_split", c.run.eval_split}};
    json modes = json::array(), variants = json::array();
    for (auto m : c.ablation.modes) modes.push_back(to_string(m));
    for (auto v : c.ablation.variants) variants.push_back(to_string(v));
    j["ablation"] = {{"modes", modes}, {"variants", variants}, {"shots", c.ablation.shots}};
    json formats = json::array();
    for (auto f : c.network.formats) formats.push_back(to_string(f));
    j["network"] = {{"source", to_string(c.network.source)},
                    {"formats", formats},
                    {"include_roster", c.network.include_roster}};
    return j;
}

PipelineConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const auto known = config_keys();
    const std::set<std::string> known_set(known.begin(), known.end());
    for (const auto& [k, v] : flatten_config(j))
        if (!known_set.count(k)) throw ConfigError(fmt::format("unknown config key '{}'", k));
    for (const auto& required : kRequiredConfigKeys) {
        const auto dot = required.find('.');
        const auto section = required.substr(0, dot);
        if (!j.contains(section) || !j.at(section).is_object() || !j.at(section).contains(required.substr(dot + 1)))
            throw ConfigError(fmt::format("config key '{}' is required", required));
    }

    PipelineConfig c;
    try {
        const Reader paths(j, "paths");
        paths.read("novels", c.paths.novels);
        paths.read("roster", c.paths.roster);
        paths.read("corpus", c.paths.corpus);
        paths.read("splits", c.paths.splits);
        paths.read("index", c.paths.index);
        paths.read("predictions", c.paths.predictions);
        paths.read("reports", c.paths.reports);
        paths.read("network", c.paths.network);
        paths.read("roles", c.paths.roles);
        paths.read("finetune", c.paths.finetune);

        const Reader seg(j, "segmenter");
        if (seg.has("quote_delimiters")) {
            std::vector<std::string> pairs;
            seg.read("quote_delimiters", pairs);
            c.segmenter.quote_delimiters.clear();
            for (const auto& p : pairs) {
                const auto cps = text::code_points(p);
                if (cps.size() != 2)
                    throw ConfigError(fmt::format("segmenter.quote_delimiters entry '{}' must be two characters", p));
                c.segmenter.quote_delimiters.emplace_back(cps[0], cps[1]);
            }
        }
        seg.read("attribution_verbs", c.segmenter.attribution_verbs);
        seg.read("max_gap_paragraphs", c.segmenter.max_gap_paragraphs);
        seg.read("chapter_pattern", c.segmenter.chapter_pattern);

        const Reader prompt(j, "prompt");
        prompt.read_as("mode", c.prompt.mode, [](const std::string& s) { return PromptMode::parse(s); });
        prompt.read_as("dialogue_variant", c.prompt.dialogue_variant,
                       [](const std::string& s) { return dialogue_variant_from_string(s); });
        prompt.read_as("locale", c.prompt.locale, [](const std::string& s) { return locale_from_string(s); });
        prompt.read("joint_template", c.prompt.joint_template);
        prompt.read("per_dimension_template", c.prompt.per_dimension_template);

        const Reader retrieval(j, "retrieval");
        retrieval.read("k", c.prompt.exemplar_count);
        retrieval.read("exclude_self", c.run.exclude_self);

        const Reader emb(j, "embedder");
        emb.read("kind", c.embedder.kind);
        emb.read("dim", c.embedder.dim);
        emb.read("endpoint", c.embedder.endpoint);
        emb.read("model", c.embedder.model);
        emb.read("batch_size", c.embedder.batch_size);
        emb.read("parallelism", c.embedder.parallelism);

        const Reader be(j, "backend");
        be.read_as("kind", c.backend.kind, [](const std::string& s) { return backend_kind_from_string(s); });
        be.read("endpoint", c.backend.endpoint);
        be.read("model", c.backend.model);
        be.read("temperature", c.backend.temperature);
        be.read("max_retries", c.backend.max_retries);
        be.read("timeout_seconds", c.backend.timeout_seconds);
        be.read("parallelism", c.backend.parallelism);
        be.read("api_key_env", c.backend.api_key_env);
        be.read("rule_answer", c.backend.rule_answer);
        std::int64_t backoff_ms = c.backend.backoff_base.count();
        be.read("backoff_base_ms", backoff_ms);
        if (backoff_ms < 0) throw ConfigError("backend.backoff_base_ms must not be negative");
        c.backend.backoff_base = std::chrono::milliseconds(backoff_ms);
        be.read("jitter_seed", c.backend.jitter_seed);

        const Reader split(j, "split");
        auto fraction = [](const std::string& s) { return Fraction::parse(s); };
        split.read_as("train", c.split.train, fraction);
        split.read_as("val", c.split.val, fraction);
        split.read_as("test", c.split.test, fraction);
        split.read("seed", c.split.seed);

        const Reader anon(j, "anonymize");
        anon.read("enabled", c.anonymize.enabled);
        anon.read("seed", c.anonymize.seed);

        const Reader bal(j, "balance");
        bal.read("enabled", c.balance.enabled);
        bal.read_as("dimension", c.balance.spec.dimension,
                    [](const std::string& s) {
                        auto d = dimension_from_key(s);
                        if (!d) throw ConfigError(fmt::format("unknown dimension '{}'", s));
                        return *d;
                    });
        bal.read("min_count", c.balance.spec.min_count);
        if (bal.has("max_count")) {
            const json& m = j.at("balance").at("max_count");
            if (m.is_null())
                c.balance.spec.max_count.reset();
            else
                c.balance.spec.max_count = m.get<std::size_t>();
        }
        bal.read("seed", c.balance.spec.seed);

        const Reader run(j, "run");
        run.read("eval_split", c.run.eval_split);

        const Reader abl(j, "ablation");
        if (abl.has("modes")) {
            std::vector<std::string> modes;
            abl.read("modes", modes);
            c.ablation.modes.clear();
            for (const auto& m : modes) c.ablation.modes.push_back(ablation_mode_from_string(m));
        }
        if (abl.has("variants")) {
            std::vector<std::string> variants;
            abl.read("variants", variants);
            c.ablation.variants.clear();
            for (const auto& v : variants) c.ablation.variants.push_back(dialogue_variant_from_string(v));
        }
        abl.read("shots", c.ablation.shots);

        const Reader net(j, "network");
        net.read_as("source", c.network.source, [](const std::string& s) { return label_source_from_string(s); });
        if (net.has("formats")) {
            std::vector<std::string> formats;
            net.read("formats", formats);
            c.network.formats.clear();
            for (const auto& f : formats) c.network.formats.push_back(graph_format_from_string(f));
        }
        net.read("include_roster", c.network.include_roster);
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("invalid config: {}", e.what()));
    } catch (const Error& e) {
        throw ConfigError(fmt::format("invalid config: {}", e.what()));
    }
    c.validate();
    return c;
}

std::map<std::string, json> flatten_config(const json& j) {
    std::map<std::string, json> out;
    flatten_into(j, "", out);
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    const json defaults = config_to_json(PipelineConfig{});
    for (const auto& [section, body] : defaults.items())
        for (const auto& [k, v] : body.items()) keys.push_back(section + "." + k);
    return keys;
}

void apply_override(json& j, const std::string& key, const std::string& value) {
    const auto keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw ConfigError(fmt::format("unknown config key '{}'", key));
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot), leaf = key.substr(dot + 1);
    if (!j.contains(section)) j[section] = json::object();
    if (!j[section].is_object()) throw ConfigError(fmt::format("config section '{}' must be an object", section));

    const json reference = config_to_json(PipelineConfig{})[section][leaf];
    json parsed;
    if (reference.is_string()) {
        parsed = value;
    } else if (reference.is_array() && (reference.empty() || reference.front().is_string())) {
        parsed = split_commas(value);
    } else {
        try {
            parsed = json::parse(value);
        } catch (const json::parse_error&) {
            throw ConfigError(fmt::format("cannot parse value '{}' for --{}", value, key));
        }
        if (reference.is_array() && !parsed.is_array()) parsed = json::array({parsed});
    }
    j[section][leaf] = std::move(parsed);
}

PipelineConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    json j;
    try {
        j = json::parse(text::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config file {} is not valid JSON: {}", path, e.what()));
    }
    if (!j.is_object()) throw ConfigError(fmt::format("config file {} must hold a JSON object", path));
    for (const auto& [k, v] : overrides) apply_override(j, k, v);
    PipelineConfig cfg = config_from_json(j);
    const fs::path parent = fs::path(path).parent_path();
    cfg.base_dir = parent.empty() ? "." : parent.string();
    return cfg;
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
    text::write_file(path, config_to_json(cfg).dump(2) + "\n");
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& cfg) {
    if (cfg.kind == "hash") return std::make_unique<HashEmbedder>(cfg.dim);
    if (cfg.kind == "http") {
        HttpEmbedderConfig h;
        h.endpoint = cfg.endpoint;
        h.model = cfg.model;
        h.dim = cfg.dim;
        h.batch_size = cfg.batch_size;
        return std::make_unique<HttpEmbedder>(std::move(h));
    }
    throw ConfigError(fmt::format("unknown embedder kind '{}'", cfg.kind));
}

} // namespace credi
