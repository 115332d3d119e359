#include "cbir/errors.hpp"
#include "cbir/simulation.hpp"
#include "cbir/split.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace cbir;
namespace fx = cbir::fixtures;

namespace {

struct Engine {
    fx::TempDir dir;
    std::unique_ptr<Store> store = Store::open(dir.path());
    Executor executor{*store, std::make_shared<SurfExtractor>(), std::make_shared<KMeansIndexer>()};
    std::vector<fx::CorpusImage> corpus;
    std::vector<ImageId> ids;
    IndexId index = 0;

    explicit Engine(int perClass = 5) {
        corpus = fx::three_class_corpus(perClass, 21);
        ids = fx::insert_corpus(executor, corpus);
        IndexParams p;
        p.k = 16;
        p.seed = 1;
        index = executor.create_index(p);
    }
    QueryOptions top(int k) const { return {index, QueryMode::TopK, k, 0.5}; }
};

ImageRecord labeled(const std::string& label, int n) {
    ImageRecord r;
    r.name = label + " (" + std::to_string(n) + ").png";
    r.classLabel = label;
    r.width = r.height = 1;
    r.bytes = {1};
    return r;
}

} // namespace

TEST_CASE("retrieval factors of a worked example") {
    const RetrievalFactors f = compute_factors({1, 2, 3}, {2, 3, 4, 5}, 10);
    CHECK(f.RI == 3);
    CHECK(f.AI == 4);
    CHECK(f.rai == 2);
    CHECK(f.iri == 1);
    CHECK(f.anr == 2);
    CHECK(f.inr == 5);
    CHECK(f.precision == doctest::Approx(2.0 / 3.0));
    CHECK(f.recall == doctest::Approx(0.5));
}

TEST_CASE("retrieval factors with empty sets") {
    const RetrievalFactors none = compute_factors({}, {1, 2}, 5);
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.inr == 3);
    const RetrievalFactors irrelevant = compute_factors({1}, {}, 5);
    CHECK(irrelevant.precision == 0.0);
    CHECK(irrelevant.recall == 0.0);
    CHECK_THROWS_AS(compute_factors({1, 2}, {3}, 2), ValidationError);
}

TEST_CASE("retrieval factors agree with set algebra") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const int corpus = 1 + static_cast<int>(rng() % 60);
        std::set<ImageId> returned, relevant;
        for (int id = 0; id < corpus; ++id) {
            if (rng() % 3 == 0) returned.insert(id);
            if (rng() % 4 == 0) relevant.insert(id);
        }
        const RetrievalFactors got = compute_factors(returned, relevant, corpus);
        const RetrievalFactors want = oracle::factors(returned, relevant, corpus);
        CHECK(got.RI == want.RI);
        CHECK(got.AI == want.AI);
        CHECK(got.rai == want.rai);
        CHECK(got.iri == want.iri);
        CHECK(got.anr == want.anr);
        CHECK(got.inr == want.inr);
        CHECK(std::abs(got.precision - want.precision) <= 1e-12);
        CHECK(std::abs(got.recall - want.recall) <= 1e-12);
    }
}

TEST_CASE("dataset splits") {
    fx::TempDir dir;
    auto store = Store::open(dir.path());
    store->write([](Transaction& t) {
        for (int i = 0; i < 10; ++i) t.add(labeled("ten", i));
        for (int i = 0; i < 2; ++i) t.add(labeled("two", i));
    });

    const DatasetSplit s = split_dataset(*store, 0.9, 3);
    const auto count = [&](const std::vector<ImageId>& ids, const std::string& label) {
        return store->read([&](const StoreView& v) {
            return std::count_if(ids.begin(), ids.end(),
                                 [&](ImageId id) { return v.get<ImageRecord>(id).classLabel == label; });
        });
    };
    CHECK(count(s.indexSet, "ten") == 9);
    CHECK(count(s.querySet, "ten") == 1);
    CHECK(count(s.indexSet, "two") == 1);
    CHECK(count(s.querySet, "two") == 1);

    std::vector<ImageId> all = s.indexSet;
    all.insert(all.end(), s.querySet.begin(), s.querySet.end());
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(all.size() == 12);
    CHECK(std::is_sorted(s.indexSet.begin(), s.indexSet.end()));

    const DatasetSplit again = split_dataset(*store, 0.9, 3);
    CHECK(again.indexSet == s.indexSet);
    CHECK(again.querySet == s.querySet);

    const DatasetSplit half = split_dataset(*store, 0.5, 3);
    CHECK(count(half.indexSet, "ten") == 5);
    CHECK(count(half.indexSet, "two") == 1);

    bool differs = false;
    for (std::uint64_t seed = 4; seed < 12 && !differs; ++seed)
        differs = split_dataset(*store, 0.9, seed).querySet != s.querySet;
    CHECK(differs);

    CHECK_THROWS_AS(split_dataset(*store, 1.0, 3), ValidationError);
    CHECK_THROWS_AS(split_dataset(*store, 0.0, 3), ValidationError);
    store->write([](Transaction& t) { t.add(labeled("lonely", 0)); });
    CHECK_THROWS_AS(split_dataset(*store, 0.9, 3), ValidationError);
}

TEST_CASE("simulating queries") {
    Engine e;
    const SimulationEvaluator evaluator(e.executor);

    SUBCASE("single query over the whole store") {
        const RetrievalFactors f = evaluator.simulate_single_query(e.ids[0], e.top(4));
        CHECK(f.queryName == e.corpus[0].name);
        CHECK(f.RI == 4);
        CHECK(f.AI == 4);
        CHECK(f.rai + f.iri + f.anr + f.inr == static_cast<int>(e.ids.size()) - 1);

        const auto ranked = e.executor.execute_query(e.corpus[0].png, e.top(5)).entries;
        std::set<ImageId> returned;
        for (const auto& entry : ranked)
            if (entry.imageId != e.ids[0] && returned.size() < 4) returned.insert(entry.imageId);
        std::set<ImageId> relevant;
        for (std::size_t i = 1; i < e.ids.size(); ++i)
            if (e.corpus[i].label == e.corpus[0].label) relevant.insert(e.ids[i]);
        const RetrievalFactors want = oracle::factors(returned, relevant, static_cast<int>(e.ids.size()) - 1);
        CHECK(f.rai == want.rai);
        CHECK(f.inr == want.inr);
        CHECK(f.precision == doctest::Approx(want.precision));
    }

    SUBCASE("single query against a split") {
        const DatasetSplit split = split_dataset(*e.store, 0.6, 5);
        const ImageId q = split.querySet.front();
        const RetrievalFactors f = evaluator.simulate_single_query(q, e.top(100), split);
        CHECK(f.RI == static_cast<int>(split.indexSet.size()));
        CHECK(f.AI == 3);
        CHECK(f.recall == 1.0);
        CHECK(f.inr == 0);
    }

    SUBCASE("multi query report") {
        const DatasetSplit split = split_dataset(*e.store, 0.6, 5);
        const MultiQueryReport report = evaluator.simulate_multi_query(split.querySet, e.top(3), split);
        REQUIRE(report.rows.size() == split.querySet.size());
        double p = 0, r = 0;
        for (const auto& row : report.rows) {
            p += row.precision;
            r += row.recall;
        }
        REQUIRE(report.meanPrecision.has_value());
        CHECK(*report.meanPrecision == doctest::Approx(p / report.rows.size()));
        CHECK(*report.meanRecall == doctest::Approx(r / report.rows.size()));

        const std::string csv = report_csv(report);
        std::istringstream lines(csv);
        std::string header, line, last;
        std::getline(lines, header);
        CHECK(header == "name,RI,AI,rai,iri,anr,inr,precision,recall");
        std::size_t rows = 0;
        while (std::getline(lines, line)) {
            ++rows;
            last = line;
        }
        CHECK(rows == report.rows.size() + 1);
        CHECK(last.rfind("(mean),,,,,,,", 0) == 0);
    }

    SUBCASE("an empty query set has no aggregate") {
        const MultiQueryReport report = evaluator.simulate_multi_query({}, e.top(3));
        CHECK(report.rows.empty());
        CHECK_FALSE(report.meanPrecision.has_value());
        CHECK_FALSE(report.meanRecall.has_value());
    }

    SUBCASE("the training split is the default index set") {
        IndexParams p;
        p.k = 16;
        p.seed = 1;
        const IndexId trained = e.executor.create_index(p, SplitSpec{0.6, 5});
        const auto recorded = evaluator.training_split(trained);
        REQUIRE(recorded.has_value());
        CHECK(recorded->indexSet == split_dataset(*e.store, 0.6, 5).indexSet);
        CHECK_FALSE(evaluator.training_split(e.index).has_value());

        QueryOptions o = e.top(100);
        o.indexId = trained;
        const RetrievalFactors f = evaluator.simulate_single_query(recorded->querySet.front(), o);
        CHECK(f.RI == static_cast<int>(recorded->indexSet.size()));
    }

    SUBCASE("unknown ids") {
        CHECK_THROWS_AS(evaluator.simulate_single_query(9999, e.top(3)), NotFoundError);
        const std::vector<ImageId> qs = {e.ids[0], 9999};
        try {
            evaluator.simulate_multi_query(qs, e.top(3));
            FAIL("expected an error");
        } catch (const CbirError& err) {
            CHECK(err.code() == ErrorCode::NotFound);
            CHECK(std::string(err.what()).find("9999") != std::string::npos);
        }
    }
}
