#pragma once

#include "credi/corpus.hpp"
#include "credi/dialogue.hpp"
#include "credi/http.hpp"
#include "credi/prompting.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace credi {

using Embedding = std::vector<float>;

/// L2 norm accumulated in double precision.
double l2_norm(const Embedding& v) noexcept;

/// Scales v to unit length. Throws ValidationError for the zero vector.
void normalize(Embedding& v);

/// Cosine score of two unit vectors: the dot product accumulated in double
/// precision, in index order.
double dot(const Embedding& a, const Embedding& b) noexcept;

/// Text -> unit vector. Implementations are deterministic for a fixed input
/// and must be safe to call from several threads at once.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual Embedding embed(const std::string& text) const = 0;
    /// Batch form; the default loops over embed().
    virtual std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) const;
};

/// Feature hashing of character 1..3-grams (Unicode code points) into a
/// fixed number of buckets, followed by L2 normalization. Runs offline.
class HashEmbedder final : public Embedder {
public:
    explicit HashEmbedder(std::size_t dim = 256);
    std::string name() const override;
    std::size_t dim() const override { return dim_; }
    Embedding embed(const std::string& text) const override;

private:
    std::size_t dim_;
};

struct HttpEmbedderConfig {
    std::string endpoint;  ///< base URL; requests go to <endpoint>/embeddings
    std::string model;
    std::size_t dim = 0;   ///< expected dimension (checked against responses)
    std::string api_key_env = "CREDI_API_KEY";
    std::chrono::milliseconds timeout{60000};
    std::size_t batch_size = 32;
};

/// Remote embedding endpoint. Request {"model", "input": [texts]}, response
/// {"data": [{"embedding": [...]}, ...]} in input order.
class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(HttpEmbedderConfig cfg);
    std::string name() const override;
    std::size_t dim() const override { return cfg_.dim; }
    Embedding embed(const std::string& text) const override;
    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) const override;

private:
    HttpEmbedderConfig cfg_;
    http::Url url_;
};

// ---------------------------------------------------------------------------

struct IndexEntry {
    std::string instance_id;
    Embedding vector;

    friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

struct ScoredId {
    std::string instance_id;
    double score = 0.0;

    friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

/// Exact cosine search over unit vectors.
class RetrievalIndex {
public:
    RetrievalIndex(std::size_t dim, std::string embedder_name);

    /// Throws on duplicate id, wrong dimension, or a non-unit vector.
    void add(std::string instance_id, Embedding vector);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::string& embedder_name() const noexcept { return embedder_name_; }
    const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
    bool contains(const std::string& id) const { return positions_.contains(id); }

    /// Highest scores first, ties by ascending id; min(k, size()) results.
    /// Throws ConfigError for k < 1 and DimensionMismatch.
    std::vector<ScoredId> topk(const Embedding& query, std::size_t k) const;

    /// Binary container, see README ("Index file format").
    std::string serialize() const;
    static RetrievalIndex deserialize(std::string_view bytes);
    void save(const std::string& path) const;
    static RetrievalIndex load(const std::string& path);

    friend bool operator==(const RetrievalIndex&, const RetrievalIndex&) = default;

private:
    std::size_t dim_;
    std::string embedder_name_;
    std::vector<IndexEntry> entries_;
    std::unordered_map<std::string, std::size_t> positions_;
};

inline constexpr double kUnitNormTolerance = 1e-5;

/// Text fed to the embedder: dialogue variant text + "\nTARGET: <s> -> <o>".
std::string embedding_text(const RelationInstance& instance, const DialogueUnit& unit, DialogueVariant variant,
                           Locale locale);

struct IndexBuildOptions {
    DialogueVariant variant = DialogueVariant::Expanded;
    Locale locale = Locale::Zh;
    std::size_t parallelism = 1;
    std::size_t batch_size = 32;
};

/// One entry per training instance. Throws EmptyDataset, EmbedderFailure.
RetrievalIndex build_index(const Dataset& train, const Embedder& embedder, const IndexBuildOptions& opts = {});

/// Top-k training exemplars for a query vector, most similar first. With
/// `exclude_self`, `query_id` never appears. Each exemplar carries its
/// dialogue text, target pair and gold answer line for `cfg.mode`.
std::vector<Exemplar> select_exemplars(const RetrievalIndex& index, const Embedding& query, const std::string& query_id,
                                       std::size_t k, const Dataset& train, bool exclude_self, const PromptConfig& cfg);

} // namespace credi
