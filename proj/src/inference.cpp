#include "credi/inference.hpp"

#include "credi/error.hpp"
#include "credi/parallel.hpp"
#include "credi/rng.hpp"
#include "credi/text.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <thread>

namespace credi {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(BackendKind k) noexcept {
    switch (k) {
    case BackendKind::RemoteChat: return "remote_chat";
    case BackendKind::MockLookup: return "mock_lookup";
    case BackendKind::MockRule: return "mock_rule";
    }
    return "";
}

BackendKind backend_kind_from_string(std::string_view s) {
    for (auto k : {BackendKind::RemoteChat, BackendKind::MockLookup, BackendKind::MockRule})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown backend kind '" + std::string(s) + "' (expected remote_chat, mock_lookup or mock_rule)");
}

std::string_view to_string(BackendError::Kind k) noexcept {
    switch (k) {
    case BackendError::Kind::Timeout: return "timeout";
    case BackendError::Kind::HttpStatus: return "http_status";
    case BackendError::Kind::Transport: return "transport";
    case BackendError::Kind::NotFound: return "not_found";
    case BackendError::Kind::ExhaustedRetries: return "exhausted_retries";
    case BackendError::Kind::Malformed: return "malformed";
    }
    return "";
}

namespace {

BackendError::Kind backend_error_kind_from_string(std::string_view s) {
    for (auto k : {BackendError::Kind::Timeout, BackendError::Kind::HttpStatus, BackendError::Kind::Transport,
                   BackendError::Kind::NotFound, BackendError::Kind::ExhaustedRetries, BackendError::Kind::Malformed})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown backend error kind '" + std::string(s) + "'");
}

} // namespace

void BackendConfig::validate() const {
    if (kind == BackendKind::RemoteChat && (endpoint.empty() || model.empty()))
        throw ConfigError("remote_chat backend requires endpoint and model");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (!(timeout_seconds > 0.0)) throw ConfigError("timeout must be positive");
    if (backoff_base.count() < 0) throw ConfigError("backoff base must be >= 0");
}

// ---------------------------------------------------------------------------

MockLookupBackend::MockLookupBackend(std::unordered_map<std::string, std::string> answers)
    : answers_(std::move(answers)) {}

MockLookupBackend MockLookupBackend::from_gold(const Dataset& ds) {
    std::unordered_map<std::string, std::string> answers;
    for (const auto& inst : ds.instances)
        if (inst.gold) answers.emplace(inst.id, render_answer(*inst.gold, PromptMode::joint()));
    return MockLookupBackend(std::move(answers));
}

std::string MockLookupBackend::complete(const PromptItem& item) const {
    auto it = answers_.find(item.instance_id);
    if (it == answers_.end())
        throw BackendError(BackendError::Kind::NotFound, "mock lookup has no answer for '" + item.instance_id + "'");
    return it->second;
}

RemoteChatBackend::RemoteChatBackend(const BackendConfig& cfg)
    : url_(http::Url::parse(cfg.endpoint)), model_(cfg.model), temperature_(cfg.temperature),
      timeout_(static_cast<long long>(std::llround(cfg.timeout_seconds * 1000.0))) {
    cfg.validate();
    const char* key = cfg.api_key_env.empty() ? nullptr : std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("environment variable " + cfg.api_key_env + " must hold the API key for remote_chat");
    api_key_ = key;
}

std::string RemoteChatBackend::request_body(const std::string& prompt) const {
    ordered_json body;
    body["model"] = model_;
    body["messages"] = ordered_json::array({ordered_json{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = temperature_;
    return body.dump();
}

std::string RemoteChatBackend::complete(const PromptItem& item) const {
    http::Response resp;
    try {
        resp = http::post_json(url_, "/chat/completions", request_body(item.text),
                               {{"Authorization", "Bearer " + api_key_}}, timeout_);
    } catch (const http::TransportError& e) {
        const bool timeout = e.kind() == http::FailureKind::Timeout;
        throw BackendError(timeout ? BackendError::Kind::Timeout : BackendError::Kind::Transport, e.what(), 0, true);
    }
    if (resp.status != 200) {
        const bool retryable = resp.status == 429 || resp.status >= 500;
        throw BackendError(BackendError::Kind::HttpStatus, fmt::format("HTTP {}", resp.status), resp.status, retryable);
    }
    try {
        const auto body = json::parse(resp.body);
        return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendError(BackendError::Kind::Malformed, std::string("malformed chat response: ") + e.what());
    }
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg, const Dataset* lookup_source) {
    cfg.validate();
    switch (cfg.kind) {
    case BackendKind::RemoteChat: return std::make_unique<RemoteChatBackend>(cfg);
    case BackendKind::MockRule: return std::make_unique<MockRuleBackend>(cfg.rule_answer);
    case BackendKind::MockLookup:
        if (lookup_source == nullptr) throw ConfigError("mock_lookup backend needs a labeled dataset");
        return std::make_unique<MockLookupBackend>(MockLookupBackend::from_gold(*lookup_source));
    }
    throw ConfigError("unknown backend kind");
}

// ---------------------------------------------------------------------------

BatchOptions BatchOptions::from(const BackendConfig& cfg) {
    BatchOptions opts;
    opts.parallelism = cfg.parallelism;
    opts.max_retries = cfg.max_retries;
    opts.backoff_base = cfg.backoff_base;
    opts.jitter_seed = cfg.jitter_seed;
    return opts;
}

std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, int attempt, std::uint64_t seed,
                                        std::size_t item_index) {
    // splitmix-style mixing so neighbouring items get unrelated jitter
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (item_index + 1) + static_cast<std::uint64_t>(attempt);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    Rng rng(z ^ (z >> 31));
    const double jitter = 0.5 + rng.unit();
    const double scaled = static_cast<double>(base.count()) * std::ldexp(1.0, std::max(attempt, 1) - 1) * jitter;
    return std::chrono::milliseconds(static_cast<long long>(std::llround(scaled)));
}

PredictionRecord predict_one(const Backend& backend, const PromptItem& item, const BatchOptions& opts,
                             std::size_t item_index) {
    PredictionRecord rec;
    rec.instance_id = item.instance_id;
    const auto started = std::chrono::steady_clock::now();
    const int max_attempts = std::max(opts.max_retries, 0) + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        rec.attempts = attempt;
        try {
            rec.raw_text = backend.complete(item);
            rec.backend_error.reset();
            rec.backend_error_kind.reset();
            break;
        } catch (const BackendError& e) {
            rec.backend_error = e.what();
            rec.backend_error_kind = e.kind();
            if (!e.retryable()) break;
            if (attempt == max_attempts) {
                rec.backend_error_kind = BackendError::Kind::ExhaustedRetries;
                rec.backend_error = fmt::format("gave up after {} attempts: {}", attempt, e.what());
                break;
            }
            const auto delay = backoff_delay(opts.backoff_base, attempt, opts.jitter_seed, item_index);
            if (opts.sleep) {
                opts.sleep(delay);
            } else {
                std::this_thread::sleep_for(delay);
            }
        } catch (const std::exception& e) {
            rec.backend_error = e.what();
            rec.backend_error_kind = BackendError::Kind::Transport;
            break;
        }
    }
    rec.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return rec;
}

std::vector<PredictionRecord> predict_batch(const Backend& backend, const std::vector<PromptItem>& items,
                                            const BatchOptions& opts) {
    if (opts.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (opts.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    std::vector<PredictionRecord> records(items.size());
    parallel_for(items.size(), static_cast<std::size_t>(opts.parallelism),
                 [&](std::size_t i) { records[i] = predict_one(backend, items[i], opts, i); });
    return records;
}

void parse_predictions(std::vector<PredictionRecord>& records, const PromptMode& mode) {
    for (auto& rec : records) {
        ParseOutcome outcome = parse_response(rec.raw_text, mode);
        rec.parsed = std::move(outcome.labels);
        rec.parse_error = std::move(outcome.error);
    }
}

// ---------------------------------------------------------------------------

std::string dump_predictions(const std::vector<PredictionRecord>& records) {
    std::string out;
    for (const auto& rec : records) {
        ordered_json j;
        j["instance_id"] = rec.instance_id;
        j["raw_text"] = rec.raw_text;
        if (rec.parsed) {
            ordered_json p = ordered_json::object();
            for (Dimension d : kDimensions)
                if (auto it = rec.parsed->find(d); it != rec.parsed->end()) p[std::string(key(d))] = std::string(token(it->second));
            j["parsed"] = std::move(p);
        } else {
            j["parsed"] = nullptr;
        }
        j["parse_error"] = rec.parse_error
                               ? ordered_json{{"kind", std::string(to_string(rec.parse_error->kind))}, {"detail", rec.parse_error->detail}}
                               : ordered_json(nullptr);
        j["backend_error"] = rec.backend_error
                                 ? ordered_json{{"kind", std::string(to_string(rec.backend_error_kind.value_or(BackendError::Kind::Transport)))},
                                                {"detail", *rec.backend_error}}
                                 : ordered_json(nullptr);
        j["attempts"] = rec.attempts;
        out += j.dump(-1, ' ', false, json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

std::vector<PredictionRecord> parse_predictions_jsonl(std::string_view jsonl, const std::string& source) {
    std::vector<PredictionRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t eol = jsonl.find('\n', pos);
        if (eol == std::string_view::npos) eol = jsonl.size();
        const auto line = text::trim(jsonl.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            PredictionRecord rec;
            rec.instance_id = j.at("instance_id").get<std::string>();
            rec.raw_text = j.value("raw_text", "");
            if (auto it = j.find("parsed"); it != j.end() && !it->is_null()) {
                LabelMap labels;
                for (const auto& [k, v] : it->items()) {
                    auto d = dimension_from_key(k);
                    if (!d) throw SchemaError(line_no, "parsed." + k, "unknown dimension");
                    auto l = label_from_token(*d, v.get<std::string>());
                    if (!l) throw SchemaError(line_no, "parsed." + k, "unknown label");
                    labels.emplace(*d, *l);
                }
                rec.parsed = std::move(labels);
            }
            if (auto it = j.find("parse_error"); it != j.end() && !it->is_null())
                rec.parse_error = ParseError{parse_error_kind_from_string(it->at("kind").get<std::string>()),
                                             it->value("detail", "")};
            if (auto it = j.find("backend_error"); it != j.end() && !it->is_null()) {
                rec.backend_error = it->value("detail", "");
                rec.backend_error_kind = backend_error_kind_from_string(it->at("kind").get<std::string>());
            }
            rec.attempts = j.value("attempts", 0);
            out.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw SchemaError(line_no, "<record>", source + ": " + e.what());
        } catch (const ValidationError& e) {
            if (dynamic_cast<const SchemaError*>(&e)) throw;
            throw SchemaError(line_no, "<record>", e.what());
        }
    }
    return out;
}

void save_predictions(const std::vector<PredictionRecord>& records, const std::string& path) {
    text::write_file(path, dump_predictions(records));
}

std::vector<PredictionRecord> load_predictions(const std::string& path) {
    return parse_predictions_jsonl(text::read_file(path), path);
}

} // namespace credi
