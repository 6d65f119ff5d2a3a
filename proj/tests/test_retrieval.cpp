#include "credi/error.hpp"
#include "credi/retrieval.hpp"

#include "support.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <random>

using namespace credi;
using testing::labels;

namespace {

/// Embedder that fails on any text containing a marker.
class FailingEmbedder final : public Embedder {
public:
    explicit FailingEmbedder(std::string marker) : marker_(std::move(marker)) {}
    std::string name() const override { return "failing"; }
    std::size_t dim() const override { return inner_.dim(); }
    Embedding embed(const std::string& text) const override {
        if (text.find(marker_) != std::string::npos) throw BackendFailure("refused");
        return inner_.embed(text);
    }

private:
    HashEmbedder inner_{16};
    std::string marker_;
};

Dataset train_set(std::size_t n) {
    Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string uid = "u" + std::to_string(i);
        ds.units.emplace(uid, testing::unit(uid, {{"甲", "第" + std::to_string(i) + "句"}, {"乙", "好"}}));
        ds.instances.push_back(testing::instance("i" + std::to_string(i), uid, "甲", "乙",
                                                 labels(Label::Positive, Label::Kinship, Label::Peer)));
    }
    ds.roster = derive_roster(ds);
    return ds;
}

} // namespace

TEST_CASE("hash embedder is deterministic and unit length") {
    HashEmbedder e(64);
    const auto a = e.embed("郭靖道：“好。”");
    CHECK(a == e.embed("郭靖道：“好。”"));
    CHECK(a.size() == 64);
    CHECK(l2_norm(a) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(dot(a, e.embed("郭靖道：“好。”")) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(dot(a, e.embed("完全不同的内容")) < 0.9);
    CHECK_THROWS_AS(e.embed(""), ValidationError);
    CHECK_THROWS_AS(HashEmbedder(0), ConfigError);
}

TEST_CASE("index rejects bad vectors") {
    RetrievalIndex index(3, "t");
    CHECK_THROWS_AS(index.add("a", {1.0f, 0.0f}), DimensionMismatch);
    CHECK_THROWS_AS(index.add("a", {1.0f, 1.0f, 0.0f}), ValidationError);
    index.add("a", {1.0f, 0.0f, 0.0f});
    CHECK_THROWS_AS(index.add("a", {0.0f, 1.0f, 0.0f}), ValidationError);
    CHECK_THROWS_AS(index.topk({1.0f, 0.0f, 0.0f}, 0), ConfigError);
    CHECK_THROWS_AS(index.topk({1.0f, 0.0f}, 1), DimensionMismatch);
    CHECK(index.topk({1.0f, 0.0f, 0.0f}, 5).size() == 1);
}

TEST_CASE("ties are broken by ascending id") {
    RetrievalIndex index(2, "t");
    index.add("b", {1.0f, 0.0f});
    index.add("a", {1.0f, 0.0f});
    index.add("c", {0.0f, 1.0f});
    const auto hits = index.topk({1.0f, 0.0f}, 2);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].instance_id == "a");
    CHECK(hits[1].instance_id == "b");
}

TEST_CASE("property: top-k agrees with the brute-force oracle") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t dim = 8 + rng() % 64;
        RetrievalIndex index(dim, "rand");
        std::vector<std::pair<std::string, std::vector<float>>> entries;
        const std::size_t n = 50 + rng() % 200;
        for (std::size_t i = 0; i < n; ++i) {
            entries.emplace_back("v" + std::to_string(rng() % 100000) + "-" + std::to_string(i),
                                 testing::random_unit_vector(rng, dim));
            index.add(entries.back().first, entries.back().second);
        }
        // exact duplicates exercise the tie rule
        entries.emplace_back("dup-a", entries[0].second);
        index.add("dup-a", entries[0].second);
        for (int q = 0; q < 10; ++q) {
            const auto query = q == 0 ? entries[0].second : testing::random_unit_vector(rng, dim);
            for (std::size_t k : {1u, 3u, 5u, 10u}) {
                const auto got = index.topk(query, k);
                const auto want = testing::brute_force_topk(entries, query, k);
                REQUIRE(got.size() == want.size());
                for (std::size_t i = 0; i < got.size(); ++i) {
                    CHECK(got[i].instance_id == want[i].id);
                    CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("index files round trip and reject corruption") {
    const Dataset train = train_set(12);
    const RetrievalIndex index = build_index(train, HashEmbedder(32));
    const auto dir = testing::temp_dir("index");
    const auto path = (dir / "train.idx").string();
    index.save(path);
    const RetrievalIndex back = RetrievalIndex::load(path);
    CHECK(back == index);
    CHECK(back.embedder_name() == "hash-ngram1-3-d32");

    std::string bytes = index.serialize();
    CHECK_THROWS_AS(RetrievalIndex::deserialize(bytes.substr(0, bytes.size() - 1)), ValidationError);
    CHECK_THROWS_AS(RetrievalIndex::deserialize(bytes + "x"), ValidationError);
    bytes[0] = 'X';
    CHECK_THROWS_AS(RetrievalIndex::deserialize(bytes), ValidationError);
    CHECK_THROWS_AS(RetrievalIndex::load((dir / "missing.idx").string()), FileNotFound);
}

TEST_CASE("parallel index builds equal the serial build") {
    const Dataset train = train_set(40);
    HashEmbedder e(48);
    IndexBuildOptions serial;
    IndexBuildOptions parallel;
    parallel.parallelism = 4;
    parallel.batch_size = 3;
    CHECK(build_index(train, e, serial) == build_index(train, e, parallel));
    CHECK_THROWS_AS(build_index(Dataset{}, e), EmptyDataset);
}

TEST_CASE("embedder failures name the first failing instance") {
    const Dataset train = train_set(10);
    IndexBuildOptions opts;
    opts.batch_size = 1;
    opts.parallelism = 3;
    try {
        build_index(train, FailingEmbedder("第7句"), opts);
        FAIL("expected EmbedderFailure");
    } catch (const EmbedderFailure& e) {
        CHECK(std::string(e.what()).find("i7") != std::string::npos);
    }
}

TEST_CASE("exemplar selection excludes the query and is ordered by similarity") {
    const Dataset train = train_set(10);
    HashEmbedder e(64);
    const RetrievalIndex index = build_index(train, e);
    const auto& q = train.instances[3];
    const auto query = e.embed(embedding_text(q, train.unit(q.unit_id), DialogueVariant::Expanded, Locale::Zh));
    PromptConfig cfg;

    const auto with_self = select_exemplars(index, query, q.id, 3, train, false, cfg);
    REQUIRE(with_self.size() == 3);
    CHECK(with_self[0].instance_id == q.id);

    const auto without = select_exemplars(index, query, q.id, 3, train, true, cfg);
    REQUIRE(without.size() == 3);
    for (const auto& ex : without) CHECK(ex.instance_id != q.id);
    CHECK(without[0].instance_id == with_self[1].instance_id);
    CHECK(without[0].answer == "polarity=positive; rel_type=kinship; hierarchy=peer");

    CHECK(select_exemplars(index, query, q.id, 0, train, true, cfg).empty());
    CHECK(select_exemplars(index, query, q.id, 50, train, true, cfg).size() == 9);
}

TEST_CASE("http embedder talks to an embeddings endpoint") {
    httplib::Server server;
    std::atomic<int> calls{0};
    server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json out;
        out["data"] = nlohmann::json::array();
        for (std::size_t i = 0; i < body.at("input").size(); ++i)
            out["data"].push_back({{"embedding", {3.0, 4.0}}});
        res.set_content(out.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpEmbedderConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.model = "m";
    cfg.dim = 2;
    cfg.batch_size = 2;
    HttpEmbedder e(cfg);
    const auto out = e.embed_batch({"a", "b", "c"});
    CHECK(calls == 2);
    REQUIRE(out.size() == 3);
    CHECK(out[2][0] == doctest::Approx(0.6));

    cfg.dim = 3;
    CHECK_THROWS_AS(HttpEmbedder(cfg).embed("a"), BackendFailure);
    server.stop();
    th.join();
}
