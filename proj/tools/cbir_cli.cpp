// Operator entry point: ingestion, extraction, index building, queries,
// simulation reports and the HTTP service.
//
// Exit codes: 0 success, 1 engine error, 2 usage error.

#include "cbir/config.hpp"
#include "cbir/errors.hpp"
#include "cbir/executor.hpp"
#include "cbir/service.hpp"
#include "cbir/simulation.hpp"
#include "cbir/wire.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <pthread.h>

namespace {

using namespace cbir;

enum class Format { Tsv, Csv, Json };

struct Globals {
    std::string store = "cbir-store";
    std::string config;
    std::string format = "tsv";
};

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::move(fallback);
}

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    return Format::Tsv;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw NotFoundError("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

bool is_image_file(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

struct Engine {
    std::unique_ptr<Store> store;
    std::unique_ptr<Executor> executor;
};

Engine open_engine(const Globals& g, const EngineConfig& config, OpenMode mode) {
    Engine e;
    e.store = Store::open(g.store, mode);
    e.executor = std::make_unique<Executor>(*e.store, std::make_shared<SurfExtractor>(config.extractor),
                                            std::make_shared<KMeansIndexer>());
    return e;
}

int cmd_ingest(const Globals& g, const EngineConfig& config, const std::string& dir) {
    if (!std::filesystem::is_directory(dir)) throw NotFoundError(dir + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    auto engine = open_engine(g, config, OpenMode::ReadWrite);
    std::size_t inserted = 0;
    std::vector<std::string> skipped;
    for (const auto& f : files) {
        try {
            engine.executor->insert_image(
                {std::nullopt, f.filename().string(), derive_label(f, config.labeling), read_file(f)});
            ++inserted;
        } catch (const DecodeError& e) {
            skipped.push_back(f.string());
            std::cerr << "skipped " << f.string() << ": " << e.what() << '\n';
        }
    }
    if (files.empty()) std::cerr << "warning: no PNG or JPEG files under " << dir << '\n';

    if (parse_format(g.format) == Format::Json)
        std::cout << nlohmann::json{{"inserted", inserted}, {"skipped", skipped}}.dump() << '\n';
    else
        std::cout << inserted << '\n';
    return 0;
}

int cmd_extract(const Globals& g, const EngineConfig& config) {
    auto engine = open_engine(g, config, OpenMode::ReadWrite);
    const std::size_t n = engine.executor->extract_all();
    if (parse_format(g.format) == Format::Json) std::cout << nlohmann::json{{"extracted", n}}.dump() << '\n';
    else std::cout << n << '\n';
    return 0;
}

int cmd_build_index(const Globals& g, const EngineConfig& config, std::optional<double> split) {
    auto engine = open_engine(g, config, OpenMode::ReadWrite);
    std::optional<SplitSpec> training;
    if (split) training = SplitSpec{*split, config.indexer.seed};
    const IndexId id = engine.executor->create_index(config.indexer, training);
    if (parse_format(g.format) == Format::Json) std::cout << nlohmann::json{{"indexId", id}}.dump() << '\n';
    else std::cout << id << '\n';
    return 0;
}

int cmd_query(const Globals& g, const EngineConfig& config, const std::string& image) {
    auto engine = open_engine(g, config, OpenMode::ReadOnly);
    const QueryResult result = engine.executor->execute_query(read_file(image), config.query);
    const Format f = parse_format(g.format);
    if (f == Format::Json) {
        std::cout << to_json(result).dump() << '\n';
        return 0;
    }
    const char sep = f == Format::Csv ? ',' : '\t';
    std::cout << "rank" << sep << "imageId" << sep << "name" << sep << "similarity\n";
    int rank = 0;
    for (const auto& e : result.entries)
        std::cout << ++rank << sep << e.imageId << sep << e.name << sep << num(e.similarity) << '\n';
    return 0;
}

int cmd_simulate(const Globals& g, const EngineConfig& config, std::optional<double> ratio,
                 std::optional<std::uint64_t> seed, const std::string& out) {
    auto engine = open_engine(g, config, OpenMode::ReadOnly);
    SimulationEvaluator evaluator(*engine.executor);

    std::optional<DatasetSplit> split;
    if (ratio || seed) {
        const SplitSpec defaults = engine.store->read([&](const StoreView& v) {
            return v.get<Vocabulary>(config.query.indexId).trainingSplit.value_or(SplitSpec{});
        });
        split = split_dataset(*engine.store, ratio.value_or(defaults.ratio), seed.value_or(defaults.seed));
    } else {
        split = evaluator.training_split(config.query.indexId);
        if (!split) split = split_dataset(*engine.store, SplitSpec{}.ratio, SplitSpec{}.seed);
    }
    const MultiQueryReport report = evaluator.simulate_multi_query(split->querySet, config.query, split);

    const bool json_report = std::filesystem::path(out).extension() == ".json";
    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    if (!os) throw StorageError("cannot write " + out);
    if (json_report) os << to_json(report).dump(2) << '\n';
    else os << report_csv(report);

    const auto show = [](const std::optional<double>& v) { return v ? num(*v) : std::string("null"); };
    switch (parse_format(g.format)) {
    case Format::Json: std::cout << to_json(report)["aggregate"].dump() << '\n'; break;
    case Format::Csv:
        std::cout << "meanPrecision,meanRecall\n" << show(report.meanPrecision) << ',' << show(report.meanRecall) << '\n';
        break;
    case Format::Tsv:
        std::cout << "meanPrecision\tmeanRecall\n" << show(report.meanPrecision) << '\t' << show(report.meanRecall) << '\n';
        break;
    }
    return 0;
}

int cmd_serve(const Globals& g, const EngineConfig& config, const std::string& host, int port) {
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto engine = open_engine(g, config, OpenMode::ReadWrite);
    CbirService service(*engine.executor, config);
    const int bound = service.bind(host, port);
    std::cerr << "serving " << g.store << " on " << host << ':' << bound << '\n';

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        service.stop();
    });
    service.run();
    // run() can also end without a signal; wake the waiter so it can exit
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Content-based image retrieval engine"};
    app.require_subcommand(1);

    Globals g;
    g.store = env_or("STORE_PATH", g.store);
    g.config = env_or("CONFIG_FILE", "");
    app.add_option("--store", g.store, "Store directory (env STORE_PATH)");
    app.add_option("--config", g.config, "Engine config file (env CONFIG_FILE)");
    app.add_option("--format", g.format, "Stdout format")->check(CLI::IsMember({"tsv", "csv", "json"}));

    auto* ingest = app.add_subcommand("ingest", "Insert every PNG/JPEG under a directory");
    std::string ingest_dir, labeling;
    ingest->add_option("dir", ingest_dir, "Directory to walk")->required();
    ingest->add_option("--labeling", labeling, "Class labels from 'directory' or 'filenamePrefix'")
        ->check(CLI::IsMember({"directory", "filenamePrefix"}));

    auto* extract = app.add_subcommand("extract", "Precompute descriptor sets");
    bool extract_all = false;
    extract->add_flag("--all", extract_all, "Every image lacking descriptors")->required();

    auto* build = app.add_subcommand("build-index", "Cluster descriptors into a new index");
    std::optional<int> k, max_iter;
    std::optional<std::uint64_t> build_seed;
    std::optional<double> eps, build_split;
    build->add_option("--k", k, "Vocabulary size");
    build->add_option("--seed", build_seed, "k-means++ seed (also seeds --split)");
    build->add_option("--max-iter", max_iter, "Lloyd iteration cap");
    build->add_option("--eps", eps, "Convergence threshold on centroid movement");
    build->add_option("--split", build_split, "Train on the index side of a per-class split with this ratio");

    auto* query = app.add_subcommand("query", "Rank stored images against a query image");
    std::string query_image;
    std::optional<IndexId> query_index, sim_index;
    std::optional<int> top_k, sim_top_k;
    std::optional<double> min_sim, sim_min_sim;
    query->add_option("image", query_image, "Query image file")->required();
    query->add_option("--index", query_index, "Index id")->required();
    auto* qk = query->add_option("--top-k", top_k, "Return the best K images");
    query->add_option("--min-sim", min_sim, "Return every image at or above this similarity")->excludes(qk);

    auto* simulate = app.add_subcommand("simulate", "Replay the query split and write a precision/recall report");
    std::optional<double> sim_split;
    std::optional<std::uint64_t> sim_seed;
    std::string sim_out = "report.csv";
    simulate->add_option("--index", sim_index, "Index id")->required();
    simulate->add_option("--split", sim_split, "Index-side ratio of the per-class split");
    simulate->add_option("--seed", sim_seed, "Split seed");
    simulate->add_option("--out", sim_out, "Report file (.csv or .json)");
    auto* sk = simulate->add_option("--top-k", sim_top_k, "Return the best K images per query");
    simulate->add_option("--min-sim", sim_min_sim, "Similarity threshold per query")->excludes(sk);

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string host = env_or("HOST", "127.0.0.1");
    int port = std::atoi(env_or("PORT", "8080").c_str());
    serve->add_option("--host", host, "Listen address (env HOST)");
    serve->add_option("--port", port, "Listen port (env PORT)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        EngineConfig config = g.config.empty() ? EngineConfig{} : load_config(g.config);
        if (!labeling.empty()) config.labeling = parse_labeling(labeling);
        if (k) config.indexer.k = *k;
        if (build_seed) config.indexer.seed = *build_seed;
        if (max_iter) config.indexer.maxIterations = *max_iter;
        if (eps) config.indexer.convergenceEps = *eps;

        const auto apply_query = [&](std::optional<IndexId> index, std::optional<int> topk, std::optional<double> minsim) {
            if (index) config.query.indexId = *index;
            if (topk) {
                config.query.mode = QueryMode::TopK;
                config.query.topK = *topk;
            }
            if (minsim) {
                config.query.mode = QueryMode::Threshold;
                config.query.minSimilarity = *minsim;
            }
        };

        if (*ingest) return cmd_ingest(g, config, ingest_dir);
        if (*extract) return cmd_extract(g, config);
        if (*build) return cmd_build_index(g, config, build_split);
        if (*query) {
            apply_query(query_index, top_k, min_sim);
            return cmd_query(g, config, query_image);
        }
        if (*simulate) {
            apply_query(sim_index, sim_top_k, sim_min_sim);
            return cmd_simulate(g, config, sim_split, sim_seed, sim_out);
        }
        if (*serve) return cmd_serve(g, config, host, port);
    } catch (const CbirError& e) {
        std::cerr << error_code_name(e.code()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "INTERNAL: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
