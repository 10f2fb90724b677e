#include "delaycode/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "delaycode/error.hpp"
#include "delaycode/log.hpp"

namespace delaycode {

struct Service::Server {
    httplib::Server http;
};

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

namespace {

HttpResult json_result(int status, const nlohmann::json& j) { return {status, j.dump()}; }

HttpResult error_result(int status, const std::string& message) {
    return json_result(status, {{"error", message}});
}

HttpResult unavailable() { return error_result(503, "no model bundle loaded"); }

nlohmann::json candidates(const LevelPrediction& lp, int top_k) {
    std::vector<std::size_t> order(lp.set.labels.size());
    std::iota(order.begin(), order.end(), 0);
    const auto& p = lp.set.p_values;
    const auto& s = lp.set.scores;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        if (p(ia) != p(ib)) return p(ia) > p(ib);
        if (s(ia) != s(ib)) return s(ia) > s(ib);
        return lp.set.labels[a] < lp.set.labels[b];
    });
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t t = 0; t < order.size() && static_cast<int>(t) < top_k; ++t) {
        const std::size_t i = order[t];
        const auto ii = static_cast<Eigen::Index>(i);
        out.push_back({{"label", lp.set.labels[i]},
                       {"score", s(ii)},
                       {"p_value", p(ii)},
                       {"in_prediction_set", lp.set.contains(lp.set.labels[i])}});
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char b[20];
    std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(v));
    return b;
}

nlohmann::json code_tree(const CodeNode& n) {
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : n.children) children.push_back(code_tree(c));
    nlohmann::json j = {{"code", n.label}, {"level", n.level}, {"children", children}};
    if (n.level == 1) j["description"] = std::string(level1_description(n.label[0]));
    return j;
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
    if (!config_.clock) config_.clock = utc_timestamp;
}

void Service::load(const std::string& bundle_dir) { set_bundle(load_bundle(bundle_dir)); }

void Service::set_bundle(Bundle bundle) {
    log::info("serving {} bundle {}", bundle.kind, bundle.model_version);
    bundle_ = std::move(bundle);
}

HttpResult Service::classify(const std::string& body) const {
    if (!bundle_) return unavailable();
    nlohmann::json req;
    try {
        req = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
        return error_result(400, "request body is not valid JSON");
    }
    if (!req.is_object() || !req.contains("text") || !req["text"].is_string())
        return error_result(400, "field 'text' (string) is required");
    double epsilon = config_.default_epsilon;
    int top_k = config_.default_top_k;
    if (req.contains("epsilon")) {
        if (!req["epsilon"].is_number()) return error_result(400, "'epsilon' must be a number");
        epsilon = req["epsilon"].get<double>();
        if (!(epsilon > 0.0 && epsilon < 1.0)) return error_result(400, "'epsilon' must lie in (0, 1)");
    }
    if (req.contains("top_k")) {
        if (!req["top_k"].is_number_integer()) return error_result(400, "'top_k' must be an integer");
        top_k = req["top_k"].get<int>();
        if (top_k < 1) return error_result(400, "'top_k' must be positive");
    }
    const std::string normalized = normalize_text(req["text"].get<std::string>());
    if (normalized.empty()) return error_result(400, "text is empty after normalization");

    const HierarchicalPrediction pred = bundle_->hierarchical
                                            ? predict_hierarchical(*bundle_->hierarchical, normalized, epsilon)
                                            : predict_flat(*bundle_->flat, normalized, epsilon);
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lp : pred.levels)
        levels.push_back({{"level", lp.level},
                          {"point", lp.point},
                          {"prediction_set", lp.set.set},
                          {"candidates", candidates(lp, top_k)}});
    std::uint64_t h = hash_string(bundle_->model_version);
    h = mix_seed(h, hash_string(normalized));
    h = mix_seed(h, hash_string(std::to_string(epsilon) + "/" + std::to_string(top_k)));
    return json_result(200, {{"request_id", hex64(h)},
                             {"normalized_text", normalized},
                             {"levels", levels},
                             {"full_code", pred.full_code},
                             {"numeric_only_warning", is_numeric_only(normalized)},
                             {"epsilon", epsilon},
                             {"model_version", bundle_->model_version}});
}

HttpResult Service::codes() const {
    if (!bundle_) return unavailable();
    nlohmann::json codes = nlohmann::json::array();
    for (const auto& n : bundle_->hierarchy().root.children) codes.push_back(code_tree(n));
    return json_result(200, {{"codes", codes}, {"model_version", bundle_->model_version}});
}

HttpResult Service::health() const {
    if (!bundle_) return json_result(503, {{"status", "unavailable"}});
    return json_result(200, {{"status", "ok"}, {"kind", bundle_->kind}, {"model_version", bundle_->model_version}});
}

HttpResult Service::feedback(const std::string& body) {
    if (!bundle_) return unavailable();
    nlohmann::json req;
    try {
        req = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
        return error_result(400, "request body is not valid JSON");
    }
    if (!req.is_object() || !req.contains("chosen_code") || !req["chosen_code"].is_string())
        return error_result(400, "field 'chosen_code' (string) is required");
    std::string code;
    try {
        code = parse_code(req["chosen_code"].get<std::string>()).condensed();
    } catch (const DataError& e) {
        return error_result(400, e.what());
    }
    const auto text_field = [&](const char* name) {
        return req.contains(name) && req[name].is_string() ? req[name].get<std::string>() : std::string();
    };
    const nlohmann::json line = {{"ts", config_.clock()},
                                 {"request_id", text_field("request_id")},
                                 {"chosen_code", code},
                                 {"note", text_field("operator_note")},
                                 {"model_version", bundle_->model_version}};
    std::lock_guard lock(feedback_mutex_);
    std::ofstream out(config_.feedback_log, std::ios::app | std::ios::binary);
    if (!out) return error_result(500, "cannot open feedback log");
    out << line.dump() << "\n";
    out.flush();
    if (!out) return error_result(500, "cannot write feedback log");
    return {204, ""};
}

void Service::install_routes() {
    server_ = std::make_shared<Server>();
    auto& http = server_->http;
    auto reply = [](httplib::Response& res, const HttpResult& r) {
        res.status = r.status;
        res.set_header("Access-Control-Allow-Origin", "*");
        if (r.status != 204) res.set_content(r.body, "application/json; charset=utf-8");
    };
    http.Post("/classify", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, classify(req.body));
    });
    http.Get("/codes", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, codes()); });
    http.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
    http.Post("/feedback", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, feedback(req.body));
    });
    http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        log::warn("request failed: {}", what);
        res.status = 500;
        res.set_content(nlohmann::json{{"error", what}}.dump(), "application/json; charset=utf-8");
    });
}

void Service::listen(const std::string& host, int port) {
    install_routes();
    log::info("listening on {}:{}", host, port);
    if (!server_->http.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
}

int Service::bind_any_port(const std::string& host) {
    install_routes();
    const int port = server_->http.bind_to_any_port(host);
    if (port <= 0) throw ConfigError("cannot bind " + host);
    return port;
}

void Service::listen_after_bind() { server_->http.listen_after_bind(); }

void Service::stop() {
    if (server_) server_->http.stop();
}

}  // namespace delaycode
