#include "credi/retrieval.hpp"

#include "credi/error.hpp"
#include "credi/parallel.hpp"
#include "credi/text.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace credi {

double l2_norm(const Embedding& v) noexcept {
    double sum = 0.0;
    for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(sum);
}

void normalize(Embedding& v) {
    const double n = l2_norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("cannot normalize a zero or non-finite vector");
    for (float& x : v) x = static_cast<float>(static_cast<double>(x) / n);
}

double dot(const Embedding& a, const Embedding& b) noexcept {
    double sum = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return sum;
}

std::vector<Embedding> Embedder::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw ConfigError("hash embedder dimension must be positive");
}

std::string HashEmbedder::name() const { return fmt::format("hash-ngram1-3-d{}", dim_); }

Embedding HashEmbedder::embed(const std::string& input) const {
    Embedding v(dim_, 0.0f);
    const auto cps = text::code_points(input);
    for (std::size_t n = 1; n <= 3; ++n) {
        if (cps.size() < n) break;
        for (std::size_t i = 0; i + n <= cps.size(); ++i) {
            std::uint64_t h = fnv1a(std::string_view(reinterpret_cast<const char*>(&n), 1));
            for (std::size_t j = 0; j < n; ++j) h = fnv1a(cps[i + j], h);
            v[h % dim_] += 1.0f;
        }
    }
    normalize(v);
    return v;
}

// ---------------------------------------------------------------------------

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig cfg) : cfg_(std::move(cfg)), url_(http::Url::parse(cfg_.endpoint)) {
    if (cfg_.dim == 0) throw ConfigError("http embedder needs the expected dimension");
    if (cfg_.batch_size == 0) cfg_.batch_size = 1;
}

std::string HttpEmbedder::name() const { return fmt::format("http:{}:d{}", cfg_.model, cfg_.dim); }

Embedding HttpEmbedder::embed(const std::string& text) const { return embed_batch({text}).at(0); }

std::vector<Embedding> HttpEmbedder::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    std::map<std::string, std::string> headers;
    if (!cfg_.api_key_env.empty())
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) headers["Authorization"] = std::string("Bearer ") + key;

    for (std::size_t begin = 0; begin < texts.size(); begin += cfg_.batch_size) {
        const std::size_t end = std::min(texts.size(), begin + cfg_.batch_size);
        nlohmann::json req;
        if (!cfg_.model.empty()) req["model"] = cfg_.model;
        req["input"] = std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                                texts.begin() + static_cast<std::ptrdiff_t>(end));
        http::Response resp;
        try {
            resp = http::post_json(url_, "/embeddings", req.dump(), headers, cfg_.timeout);
        } catch (const http::TransportError& e) {
            throw BackendFailure(e.what());
        }
        if (resp.status != 200) throw BackendFailure(fmt::format("embedding endpoint returned HTTP {}", resp.status));
        try {
            const auto body = nlohmann::json::parse(resp.body);
            const auto& data = body.at("data");
            if (data.size() != end - begin) throw BackendFailure("embedding response has the wrong number of vectors");
            for (const auto& item : data) {
                Embedding v = item.at("embedding").get<Embedding>();
                if (v.size() != cfg_.dim) throw BackendFailure(fmt::format("embedding has dimension {}, expected {}", v.size(), cfg_.dim));
                normalize(v);
                out.push_back(std::move(v));
            }
        } catch (const nlohmann::json::exception& e) {
            throw BackendFailure(std::string("malformed embedding response: ") + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

RetrievalIndex::RetrievalIndex(std::size_t dim, std::string embedder_name)
    : dim_(dim), embedder_name_(std::move(embedder_name)) {
    if (dim == 0) throw ValidationError("index dimension must be positive");
}

void RetrievalIndex::add(std::string instance_id, Embedding vector) {
    if (vector.size() != dim_) throw DimensionMismatch(dim_, vector.size());
    if (std::abs(l2_norm(vector) - 1.0) > kUnitNormTolerance)
        throw ValidationError("index vectors must be L2-normalized (instance '" + instance_id + "')");
    if (positions_.contains(instance_id)) throw ValidationError("duplicate index id '" + instance_id + "'");
    positions_.emplace(instance_id, entries_.size());
    entries_.push_back(IndexEntry{std::move(instance_id), std::move(vector)});
}

std::vector<ScoredId> RetrievalIndex::topk(const Embedding& query, std::size_t k) const {
    if (k < 1) throw ConfigError("top-k needs k >= 1");
    if (query.size() != dim_) throw DimensionMismatch(dim_, query.size());

    struct Hit {
        double score;
        std::size_t pos;
    };
    std::vector<Hit> hits;
    hits.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) hits.push_back({dot(query, entries_[i].vector), i});

    const auto better = [this](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return entries_[a.pos].instance_id < entries_[b.pos].instance_id;
    };
    const std::size_t n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), better);

    std::vector<ScoredId> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({entries_[hits[i].pos].instance_id, hits[i].score});
    return out;
}

namespace {

constexpr char kMagic[8] = {'C', 'R', 'E', 'D', 'I', 'I', 'D', 'X'};
constexpr std::uint32_t kIndexVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }

    std::string_view take(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw ValidationError("index file is truncated");
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::string RetrievalIndex::serialize() const {
    std::string out(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(out, kIndexVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
    put_le<std::uint64_t>(out, entries_.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(embedder_name_.size()));
    out += embedder_name_;
    for (const auto& e : entries_) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.instance_id.size()));
        out += e.instance_id;
        for (float x : e.vector) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
    }
    return out;
}

RetrievalIndex RetrievalIndex::deserialize(std::string_view bytes) {
    Reader r(bytes);
    if (r.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) throw ValidationError("not a CREDI index file");
    const auto version = r.get<std::uint32_t>();
    if (version != kIndexVersion) throw ValidationError(fmt::format("unsupported index version {}", version));
    const auto dim = r.get<std::uint32_t>();
    const auto count = r.get<std::uint64_t>();
    const auto name_len = r.get<std::uint32_t>();
    RetrievalIndex index(dim, std::string(r.take(name_len)));
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto id_len = r.get<std::uint32_t>();
        std::string id(r.take(id_len));
        Embedding v(dim);
        for (auto& x : v) x = std::bit_cast<float>(r.get<std::uint32_t>());
        index.add(std::move(id), std::move(v));
    }
    if (!r.done()) throw ValidationError("trailing bytes after index entries");
    return index;
}

void RetrievalIndex::save(const std::string& path) const { text::write_file(path, serialize()); }

RetrievalIndex RetrievalIndex::load(const std::string& path) { return deserialize(text::read_file(path)); }

// ---------------------------------------------------------------------------

std::string embedding_text(const RelationInstance& instance, const DialogueUnit& unit, DialogueVariant variant,
                           Locale locale) {
    return dialogue_text(unit, variant, locale) + "\nTARGET: " + instance.subject + " -> " + instance.object;
}

RetrievalIndex build_index(const Dataset& train, const Embedder& embedder, const IndexBuildOptions& opts) {
    if (train.instances.empty()) throw EmptyDataset("cannot build an index from an empty training set");
    const std::size_t n = train.instances.size();
    const std::size_t batch = std::max<std::size_t>(opts.batch_size, 1);
    const std::size_t batches = (n + batch - 1) / batch;

    std::vector<Embedding> vectors(n);
    std::atomic<std::size_t> completed{0};
    std::mutex failure_mutex;
    std::optional<std::pair<std::size_t, std::string>> failure; // first failing position + cause

    parallel_for(batches, opts.parallelism, [&](std::size_t b) {
        const std::size_t begin = b * batch;
        const std::size_t end = std::min(n, begin + batch);
        std::vector<std::string> texts;
        for (std::size_t i = begin; i < end; ++i) {
            const auto& inst = train.instances[i];
            texts.push_back(embedding_text(inst, train.unit(inst.unit_id), opts.variant, opts.locale));
        }
        try {
            auto out = embedder.embed_batch(texts);
            if (out.size() != texts.size()) throw BackendFailure("embedder returned the wrong number of vectors");
            for (std::size_t i = begin; i < end; ++i) {
                if (out[i - begin].size() != embedder.dim()) throw DimensionMismatch(embedder.dim(), out[i - begin].size());
                vectors[i] = std::move(out[i - begin]);
            }
            completed += end - begin;
        } catch (const std::exception& e) {
            std::lock_guard lock(failure_mutex);
            if (!failure || begin < failure->first) failure = std::make_pair(begin, std::string(e.what()));
        }
    });
    if (failure) throw EmbedderFailure(train.instances[failure->first].id, completed.load(), failure->second);

    RetrievalIndex index(embedder.dim(), embedder.name());
    for (std::size_t i = 0; i < n; ++i) index.add(train.instances[i].id, std::move(vectors[i]));
    return index;
}

std::vector<Exemplar> select_exemplars(const RetrievalIndex& index, const Embedding& query, const std::string& query_id,
                                       std::size_t k, const Dataset& train, bool exclude_self, const PromptConfig& cfg) {
    if (k == 0) return {};
    const bool self_present = exclude_self && index.contains(query_id);
    const auto hits = index.topk(query, self_present ? k + 1 : k);

    std::unordered_map<std::string, const RelationInstance*> by_id;
    by_id.reserve(train.instances.size());
    for (const auto& inst : train.instances) by_id.emplace(inst.id, &inst);

    std::vector<Exemplar> out;
    for (const auto& hit : hits) {
        if (out.size() == k) break;
        if (self_present && hit.instance_id == query_id) continue;
        auto it = by_id.find(hit.instance_id);
        if (it == by_id.end()) throw DanglingReference("index entry '" + hit.instance_id + "' is not in the training set");
        const RelationInstance& inst = *it->second;
        if (!inst.gold) throw MissingGold(inst.id);
        out.push_back(Exemplar{inst.id, dialogue_text(train.unit(inst.unit_id), cfg.dialogue_variant, cfg.locale),
                               TargetPair{inst.subject, inst.object}, render_answer(*inst.gold, cfg.mode)});
    }
    return out;
}

} // namespace credi
