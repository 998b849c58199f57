#pragma once

#include "darkscan/backend.hpp"
#include "darkscan/detection.hpp"
#include "darkscan/ingest.hpp"

#include <memory>
#include <string>
#include <vector>

namespace darkscan {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8787;  // 0 picks a free port
    // Origins allowed by CORS; a trailing '*' matches any suffix.
    std::vector<std::string> cors_origins = {"chrome-extension://*", "moz-extension://*"};
    AggregationMode mode = AggregationMode::ArgmaxFraction;
    FetchConfig fetch;
    SegmentationRules rules;
};

/// "host:port" (IPv6 hosts in brackets). Throws InvalidArgument.
void parse_bind_address(std::string_view text, ServiceConfig& cfg);

struct ServiceReply {
    int status = 200;
    std::string body;  // JSON
};

/// Request handlers without the transport, shared by the HTTP server and tests.
class ServiceHandlers {
public:
    ServiceHandlers(BackendPtr backend, ThresholdConfig thresholds, ServiceConfig config);

    [[nodiscard]] ServiceReply health() const;
    [[nodiscard]] ServiceReply classify(std::string_view body) const;
    [[nodiscard]] ServiceReply scan(std::string_view body) const;
    [[nodiscard]] bool origin_allowed(std::string_view origin) const;
    [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }

private:
    BackendPtr backend_;
    ThresholdConfig thresholds_;
    ServiceConfig config_;
};

class Service {
public:
    Service(BackendPtr backend, ThresholdConfig thresholds, ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the socket. Throws BindFailure.
    void bind();
    /// Port actually bound (after bind()).
    [[nodiscard]] int port() const noexcept;
    /// Serves until stop(); call bind() first.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace darkscan
