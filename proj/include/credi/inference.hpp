#pragma once

#include "credi/corpus.hpp"
#include "credi/error.hpp"
#include "credi/http.hpp"
#include "credi/prompting.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace credi {

enum class BackendKind { RemoteChat, MockLookup, MockRule };

std::string_view to_string(BackendKind k) noexcept;
BackendKind backend_kind_from_string(std::string_view s);

struct BackendConfig {
    BackendKind kind = BackendKind::MockLookup;
    std::string endpoint; ///< base URL; requests go to <endpoint>/chat/completions
    std::string model;
    double temperature = 0.0;
    int max_retries = 3;
    double timeout_seconds = 60.0;
    int parallelism = 4;
    std::string api_key_env = "CREDI_API_KEY";
    /// Fixed answer line for MockRule.
    std::string rule_answer = "polarity=neutral; rel_type=other; hierarchy=peer";
    /// Base delay before the first retry; doubles per attempt, jittered.
    std::chrono::milliseconds backoff_base{1000};
    std::uint64_t jitter_seed = 0;

    /// RemoteChat requires endpoint and model; temperature >= 0; bounds >= 1.
    void validate() const;
};

/// A failed backend call. `retryable` marks timeouts, transport errors,
/// HTTP 429 and 5xx.
class BackendError : public BackendFailure {
public:
    enum class Kind { Timeout, HttpStatus, Transport, NotFound, ExhaustedRetries, Malformed };

    BackendError(Kind kind, const std::string& what, int status = 0, bool retryable = false)
        : BackendFailure(what), kind_(kind), status_(status), retryable_(retryable) {}

    Kind kind() const noexcept { return kind_; }
    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return retryable_; }

private:
    Kind kind_;
    int status_;
    bool retryable_;
};

std::string_view to_string(BackendError::Kind k) noexcept;

struct PromptItem {
    std::string instance_id;
    std::string text;
};

/// Chat-style completion engine.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    /// Returns the completion text or throws BackendError.
    virtual std::string complete(const PromptItem& item) const = 0;
};

/// Returns a stored answer per instance id (gold echo in tests).
class MockLookupBackend final : public Backend {
public:
    explicit MockLookupBackend(std::unordered_map<std::string, std::string> answers);
    /// Answers are the gold answer lines in joint form.
    static MockLookupBackend from_gold(const Dataset& ds);

    std::string name() const override { return "mock_lookup"; }
    std::string complete(const PromptItem& item) const override;

private:
    std::unordered_map<std::string, std::string> answers_;
};

/// Returns the same text for every prompt.
class MockRuleBackend final : public Backend {
public:
    explicit MockRuleBackend(std::string answer) : answer_(std::move(answer)) {}
    std::string name() const override { return "mock_rule"; }
    std::string complete(const PromptItem&) const override { return answer_; }

private:
    std::string answer_;
};

/// POST <endpoint>/chat/completions with {model, messages, temperature};
/// bearer token from the configured environment variable.
class RemoteChatBackend final : public Backend {
public:
    explicit RemoteChatBackend(const BackendConfig& cfg);
    std::string name() const override { return "remote_chat:" + model_; }
    std::string complete(const PromptItem& item) const override;

    /// Request body for one prompt (exposed for tests).
    std::string request_body(const std::string& prompt) const;

private:
    http::Url url_;
    std::string model_;
    double temperature_;
    std::chrono::milliseconds timeout_;
    std::string api_key_;
};

/// Builds the backend described by cfg. MockLookup needs `lookup_source`
/// (its gold labels become answers). RemoteChat fails with ConfigError when
/// the API key variable is unset, before any network traffic.
std::unique_ptr<Backend> make_backend(const BackendConfig& cfg, const Dataset* lookup_source = nullptr);

struct PredictionRecord {
    std::string instance_id;
    std::string raw_text;
    std::optional<LabelMap> parsed;
    std::optional<ParseError> parse_error;
    /// Backend failure after all retries, if any.
    std::optional<std::string> backend_error;
    std::optional<BackendError::Kind> backend_error_kind;
    double latency_ms = 0.0;
    int attempts = 0;
};

struct BatchOptions {
    int parallelism = 4;
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000};
    std::uint64_t jitter_seed = 0;
    /// Injectable for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;

    static BatchOptions from(const BackendConfig& cfg);
};

/// Backoff before retry number `attempt` (1-based): base * 2^(attempt-1),
/// scaled by a jitter factor in [0.5, 1.5) drawn from (seed, item, attempt).
std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, int attempt, std::uint64_t seed,
                                        std::size_t item_index);

/// Single call with the retry policy applied; failures are tagged on the
/// record rather than thrown.
PredictionRecord predict_one(const Backend& backend, const PromptItem& item, const BatchOptions& opts,
                             std::size_t item_index = 0);

/// Output order matches input order; per-item failures never abort the batch.
/// Throws ConfigError for parallelism < 1 or max_retries < 0.
std::vector<PredictionRecord> predict_batch(const Backend& backend, const std::vector<PromptItem>& items,
                                            const BatchOptions& opts);

/// Fills parsed/parse_error for each record.
void parse_predictions(std::vector<PredictionRecord>& records, const PromptMode& mode);

// Predictions file: JSONL, one record per line, latency omitted so reruns
// under mocks are byte-identical.
std::string dump_predictions(const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> parse_predictions_jsonl(std::string_view jsonl, const std::string& source = "<memory>");
void save_predictions(const std::vector<PredictionRecord>& records, const std::string& path);
std::vector<PredictionRecord> load_predictions(const std::string& path);

} // namespace credi
