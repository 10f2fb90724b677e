#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "delaycode/hierarchy.hpp"

namespace delaycode {

struct HttpResult {
    int status = 200;
    std::string body;  // JSON, empty for 204
};

struct ServiceConfig {
    std::string feedback_log = "feedback.jsonl";
    int default_top_k = 3;
    double default_epsilon = 0.05;
    /// ISO-8601 UTC timestamp source; replaceable in tests.
    std::function<std::string()> clock;
};

/// Request handling independent of the transport. A service without a bundle
/// answers 503 on every endpoint.
class Service {
public:
    explicit Service(ServiceConfig config = {});

    void load(const std::string& bundle_dir);
    void set_bundle(Bundle bundle);
    bool loaded() const noexcept { return bundle_.has_value(); }

    HttpResult classify(const std::string& body) const;
    HttpResult codes() const;
    HttpResult health() const;
    HttpResult feedback(const std::string& body);

    /// Blocks serving HTTP until stop() is called.
    void listen(const std::string& host, int port);
    /// Binds to an ephemeral port and returns it; serve with listen_after_bind().
    int bind_any_port(const std::string& host);
    void listen_after_bind();
    void stop();

private:
    void install_routes();

    ServiceConfig config_;
    std::optional<Bundle> bundle_;
    std::mutex feedback_mutex_;
    struct Server;
    std::shared_ptr<Server> server_;
};

std::string utc_timestamp();

}  // namespace delaycode
