#include "cbir/service.hpp"

#include "cbir/errors.hpp"
#include "cbir/wire.hpp"

#include <httplib.h>

#include <string>

namespace cbir {

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Validation: return 400;
    case ErrorCode::Decode: return 400;
    case ErrorCode::InsufficientData: return 409;
    case ErrorCode::Storage: return 503;
    case ErrorCode::Internal: return 500;
    }
    return 500;
}

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    send_json(res, http_status(code), {{"code", error_code_name(code)}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("request body is not valid JSON: ") + e.what());
    }
}

json parse_part(const httplib::MultipartFormData& part) {
    try {
        return json::parse(part.content);
    } catch (const json::parse_error& e) {
        throw ValidationError("form part '" + part.name + "' is not valid JSON");
    }
}

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

EntityId path_id(const httplib::Request& req) {
    try {
        return std::stoll(req.matches[1].str());
    } catch (const std::exception&) {
        throw ValidationError("malformed id in path");
    }
}

std::optional<SplitSpec> split_from_json(const json& doc) {
    if (doc.is_null()) return std::nullopt;
    if (!doc.is_object()) throw ValidationError("split must be an object {ratio, seed}");
    SplitSpec s;
    for (const auto& [key, value] : doc.items())
        if (key != "ratio" && key != "seed") throw ValidationError("unknown key '" + key + "' in split");
    try {
        s.ratio = doc.value("ratio", s.ratio);
        s.seed = doc.value("seed", s.seed);
    } catch (const json::exception&) {
        throw ValidationError("split fields have the wrong type");
    }
    if (!(s.ratio > 0 && s.ratio < 1)) throw ValidationError("split ratio must lie in (0,1)");
    return s;
}

template <class T> T required(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) throw ValidationError(std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has the wrong type");
    }
}

} // namespace

struct CbirService::Impl {
    Executor& executor;
    SimulationEvaluator evaluator;
    EngineConfig defaults;
    httplib::Server server;

    Impl(Executor& e, EngineConfig d) : executor(e), evaluator(e), defaults(std::move(d)) {}

    // Wraps a handler so every engine error becomes an ApiError response.
    template <class F> httplib::Server::Handler guarded(F&& f) {
        return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const CbirError& e) {
                send_error(res, e.code(), e.what());
            } catch (const json::exception& e) {
                send_error(res, ErrorCode::Validation, std::string("malformed request: ") + e.what());
            } catch (const std::exception& e) {
                send_error(res, ErrorCode::Internal, e.what());
            }
        };
    }

    QueryOptions options_from(const json& doc, const json& indexIdField) const {
        QueryOptions o = query_options_from_json(doc, defaults.query);
        if (!indexIdField.is_null()) {
            if (!indexIdField.is_number_integer()) throw ValidationError("indexId must be an integer");
            o.indexId = indexIdField.get<IndexId>();
        }
        return o;
    }

    void routes() {
        server.set_payload_max_length(64u << 20);

        server.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
            const auto [images, indexes] = executor.store().read([](const StoreView& v) {
                return std::pair{v.count<ImageRecord>(), v.count<Vocabulary>()};
            });
            send_json(res, 200, {{"status", "ok"}, {"images", images}, {"indexes", indexes}});
        }));

        server.Post("/images", guarded([this](const httplib::Request& req, httplib::Response& res) {
            ImageContract contract;
            if (req.is_multipart_form_data()) {
                if (!req.has_file("image")) throw ValidationError("multipart upload needs an 'image' part");
                const auto image = req.get_file_value("image");
                contract.imageBytes = to_bytes(image.content);
                contract.name = req.has_file("name") ? req.get_file_value("name").content : image.filename;
                if (req.has_file("classLabel")) contract.classLabel = req.get_file_value("classLabel").content;
            } else {
                const json body = parse_body(req);
                contract.name = body.value("name", std::string{});
                if (body.contains("classLabel") && body["classLabel"].is_string())
                    contract.classLabel = body["classLabel"].get<std::string>();
                if (body.contains("imageBytes")) contract.imageBytes = base64_decode(required<std::string>(body, "imageBytes"));
            }
            const ImageId id = executor.insert_image(contract);
            send_json(res, 201, {{"imageId", id}});
        }));

        server.Get(R"(/images/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const EntityId id = path_id(req);
            const json body = executor.store().read(
                [&](const StoreView& v) { return image_contract_json(v.get<ImageRecord>(id)); });
            send_json(res, 200, body);
        }));

        server.Get("/images", guarded([this](const httplib::Request& req, httplib::Response& res) {
            long long offset = 0, limit = 50;
            try {
                if (req.has_param("offset")) offset = std::stoll(req.get_param_value("offset"));
                if (req.has_param("limit")) limit = std::stoll(req.get_param_value("limit"));
            } catch (const std::exception&) {
                throw ValidationError("offset and limit must be integers");
            }
            if (offset < 0 || limit < 0) throw ValidationError("offset and limit must be non-negative");
            const json body = executor.store().read([&](const StoreView& v) {
                json rows = json::array();
                long long i = 0;
                for (const auto& [id, image] : v.all<ImageRecord>()) {
                    if (i >= offset && i < offset + limit) rows.push_back(image_metadata_json(image));
                    ++i;
                }
                return json{{"total", v.count<ImageRecord>()}, {"offset", offset}, {"limit", limit}, {"images", rows}};
            });
            send_json(res, 200, body);
        }));

        server.Get("/indexes", guarded([this](const httplib::Request&, httplib::Response& res) {
            const json body = executor.store().read([](const StoreView& v) {
                json rows = json::array();
                for (const auto& [id, voc] : v.all<Vocabulary>()) {
                    json row = {{"indexId", id}, {"k", voc.k}, {"params", to_json(voc.params)}, {"createdAt", voc.createdAt}};
                    row["trainingSplit"] = voc.trainingSplit
                                               ? json{{"ratio", voc.trainingSplit->ratio}, {"seed", voc.trainingSplit->seed}}
                                               : json(nullptr);
                    rows.push_back(std::move(row));
                }
                return json{{"indexes", rows}};
            });
            send_json(res, 200, body);
        }));

        server.Post("/indexes", guarded([this](const httplib::Request& req, httplib::Response& res) {
            json body = parse_body(req);
            if (!body.is_object()) throw ValidationError("index request must be a JSON object");
            const auto split = split_from_json(body.value("split", json(nullptr)));
            body.erase("split");
            const IndexParams params = index_params_from_json(body, defaults.indexer);
            const IndexId id = executor.create_index(params, split);
            send_json(res, 201, {{"indexId", id}});
        }));

        server.Delete(R"(/indexes/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            executor.delete_index(path_id(req));
            res.status = 204;
        }));

        server.Post("/query", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::vector<std::uint8_t> bytes;
            QueryOptions options;
            if (req.is_multipart_form_data()) {
                if (!req.has_file("image")) throw ValidationError("query needs an 'image' part");
                bytes = to_bytes(req.get_file_value("image").content);
                const json opts = req.has_file("options") ? parse_part(req.get_file_value("options")) : json(nullptr);
                options = options_from(opts, nullptr);
            } else {
                const json body = parse_body(req);
                bytes = base64_decode(required<std::string>(body, "imageBytes"));
                options = options_from(body.value("options", json(nullptr)), body.value("indexId", json(nullptr)));
            }
            if (bytes.empty()) throw ValidationError("query image is empty");
            send_json(res, 200, to_json(executor.execute_query(bytes, options)));
        }));

        server.Post("/simulate/single", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            const auto query = required<ImageId>(body, "queryImageId");
            const QueryOptions options =
                options_from(body.value("options", json(nullptr)), body.value("indexId", json(nullptr)));
            std::optional<DatasetSplit> split;
            if (const auto spec = split_from_json(body.value("split", json(nullptr))))
                split = split_dataset(executor.store(), spec->ratio, spec->seed);
            send_json(res, 200, to_json(evaluator.simulate_single_query(query, options, split)));
        }));

        server.Post("/simulate/multi", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            const QueryOptions options =
                options_from(body.value("options", json(nullptr)), body.value("indexId", json(nullptr)));
            std::optional<DatasetSplit> split;
            if (const auto spec = split_from_json(body.value("split", json(nullptr))))
                split = split_dataset(executor.store(), spec->ratio, spec->seed);
            else
                split = evaluator.training_split(options.indexId);

            std::vector<ImageId> queries;
            if (body.contains("querySet")) {
                queries = required<std::vector<ImageId>>(body, "querySet");
            } else {
                if (!split) split = split_dataset(executor.store(), SplitSpec{}.ratio, SplitSpec{}.seed);
                queries = split->querySet;
            }
            send_json(res, 200, to_json(evaluator.simulate_multi_query(queries, options, split)));
        }));

        server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
            if (!res.body.empty()) return;
            if (res.status == 404) send_error(res, ErrorCode::NotFound, "no route for " + req.method + " " + req.path);
            else if (res.status == 413)
                send_json(res, 413, {{"code", error_code_name(ErrorCode::Validation)}, {"message", "payload too large"}});
            else if (res.status >= 400 && res.status < 500) send_error(res, ErrorCode::Validation, "bad request");
        });
    }
};

CbirService::CbirService(Executor& executor, EngineConfig defaults)
    : impl_(std::make_unique<Impl>(executor, std::move(defaults))) {
    impl_->routes();
}

CbirService::~CbirService() { stop(); }

int CbirService::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw StorageError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void CbirService::run() { impl_->server.listen_after_bind(); }

void CbirService::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

void CbirService::wait_until_ready() const { impl_->server.wait_until_ready(); }

} // namespace cbir
