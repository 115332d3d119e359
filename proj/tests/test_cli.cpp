// Drives the cbir executable as a subprocess.

#include "cbir/store.hpp"

#include "fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace cbir;
namespace fx = cbir::fixtures;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

Run cbir_cli(const fx::TempDir& scratch, const std::vector<std::string>& args) {
    std::string cmd = quote(CBIR_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    const auto out = scratch / "stdout", err = scratch / "stderr";
    cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

void write_file(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                             static_cast<std::streamsize>(bytes.size()));
}

// corpus/<label>/<name>.png plus one corrupt PNG and one unrelated file
std::size_t write_corpus(const std::filesystem::path& root, int perClass) {
    const auto corpus = fx::three_class_corpus(perClass, 5);
    for (const auto& c : corpus) write_file(root / c.label / c.name, c.png);
    write_file(root / "checker" / "broken.png", {0x89, 'P', 'N', 'G', 0, 0});
    std::ofstream(root / "README.txt") << "not an image";
    return corpus.size();
}

} // namespace

TEST_CASE("usage errors exit with 2") {
    fx::TempDir dir;
    CHECK(cbir_cli(dir, {}).code == 2);
    CHECK(cbir_cli(dir, {"frobnicate"}).code == 2);
    CHECK(cbir_cli(dir, {"query"}).code == 2);
    CHECK(cbir_cli(dir, {"--format", "xml", "extract", "--all"}).code == 2);
    const Run help = cbir_cli(dir, {"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("build-index") != std::string::npos);
}

TEST_CASE("end to end through the command line") {
    fx::TempDir dir;
    const std::string store = (dir / "store").string();
    const std::size_t images = write_corpus(dir / "corpus", 3);

    const Run ingest = cbir_cli(dir, {"--store", store, "ingest", (dir / "corpus").string()});
    REQUIRE(ingest.code == 0);
    CHECK(ingest.out == std::to_string(images) + "\n");
    CHECK(ingest.err.find("broken.png") != std::string::npos);

    CHECK(cbir_cli(dir, {"--store", store, "extract", "--all"}).out == "0\n");

    const Run a = cbir_cli(dir, {"--store", store, "build-index", "--k", "8", "--seed", "3"});
    const Run b = cbir_cli(dir, {"--store", store, "build-index", "--k", "8", "--seed", "3"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out == "1\n");
    CHECK(b.out == "2\n");
    {
        auto reader = Store::open(store, OpenMode::ReadOnly);
        reader->read([](const StoreView& v) {
            CHECK(v.get<Vocabulary>(1).centroids == v.get<Vocabulary>(2).centroids);
            CHECK(v.get<ImageRecord>(1).classLabel == "blobs");
        });
    }

    const std::string probe = (dir / "corpus" / "stripes" / "stripes (1).png").string();
    const Run q = cbir_cli(dir, {"--store", store, "query", probe, "--index", "1", "--top-k", "3"});
    REQUIRE(q.code == 0);
    const auto rows = lines(q.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "rank\timageId\tname\tsimilarity");
    CHECK(rows[1].find("stripes (1).png") != std::string::npos);

    const Run qj = cbir_cli(dir, {"--store", store, "--format", "json", "query", probe, "--index", "1", "--min-sim", "0"});
    REQUIRE(qj.code == 0);
    CHECK(nlohmann::json::parse(qj.out)["entries"].size() == images);

    const auto report = dir / "report.csv";
    const Run sim = cbir_cli(dir, {"--store", store, "simulate", "--index", "1", "--split", "0.67", "--seed", "1",
                                   "--top-k", "2", "--out", report.string()});
    REQUIRE(sim.code == 0);
    CHECK(lines(sim.out).at(0) == "meanPrecision\tmeanRecall");
    const auto csv = lines(slurp(report));
    REQUIRE(csv.size() == 3 + 2);
    CHECK(csv[0] == "name,RI,AI,rai,iri,anr,inr,precision,recall");

    const auto report_json = dir / "report.json";
    REQUIRE(cbir_cli(dir, {"--store", store, "simulate", "--index", "1", "--out", report_json.string()}).code == 0);
    CHECK(nlohmann::json::parse(slurp(report_json)).contains("aggregate"));

    const Run missing = cbir_cli(dir, {"--store", store, "query", probe, "--index", "42"});
    CHECK(missing.code == 1);
    CHECK(missing.err.rfind("NOT_FOUND", 0) == 0);
}

TEST_CASE("engine errors exit with 1") {
    fx::TempDir dir;
    const std::string store = (dir / "store").string();

    std::filesystem::create_directories(dir / "empty");
    const Run empty = cbir_cli(dir, {"--store", store, "ingest", (dir / "empty").string()});
    CHECK(empty.code == 0);
    CHECK(empty.out == "0\n");

    const Run nowhere = cbir_cli(dir, {"--store", store, "ingest", (dir / "absent").string()});
    CHECK(nowhere.code == 1);
    CHECK(nowhere.err.rfind("NOT_FOUND", 0) == 0);

    const Run no_data = cbir_cli(dir, {"--store", store, "build-index", "--k", "4"});
    CHECK(no_data.code == 1);
    CHECK(no_data.err.rfind("INSUFFICIENT_DATA", 0) == 0);

    std::ofstream(dir / "cfg.json") << R"({"indexer": {"bogus": 1}})";
    const Run bad_config = cbir_cli(dir, {"--store", store, "--config", (dir / "cfg.json").string(), "extract", "--all"});
    CHECK(bad_config.code == 1);
    CHECK(bad_config.err.rfind("VALIDATION", 0) == 0);

    auto holder = Store::open(store);
    const Run locked = cbir_cli(dir, {"--store", store, "extract", "--all"});
    CHECK(locked.code == 1);
    CHECK(locked.err.rfind("STORAGE", 0) == 0);
}
