#include "darkscan/service.hpp"

#include "darkscan/error.hpp"
#include "darkscan/report.hpp"
#include "darkscan/url.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <charconv>

namespace darkscan {

namespace {

ServiceReply error_reply(int status, std::string_view kind, std::string_view message) {
    nlohmann::ordered_json doc;
    doc["error"] = std::string(kind);
    doc["message"] = std::string(message);
    return {status, dump_json(doc)};
}

std::optional<nlohmann::json> parse_object(std::string_view body) {
    auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    return doc;
}

nlohmann::ordered_json category_map(const CategoryDistribution& d) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (Category c : canonical_order()) m[std::string(display_name(c))] = d[c];
    return m;
}

}  // namespace

void parse_bind_address(std::string_view text, ServiceConfig& cfg) {
    std::string_view host, port;
    if (text.starts_with('[')) {
        const auto close = text.find(']');
        if (close == std::string_view::npos || close + 1 >= text.size() || text[close + 1] != ':')
            throw InvalidArgument(fmt::format("bad bind address '{}'", text));
        host = text.substr(1, close - 1);
        port = text.substr(close + 2);
    } else {
        const auto colon = text.rfind(':');
        if (colon == std::string_view::npos) throw InvalidArgument(fmt::format("bind address '{}' lacks a port", text));
        host = text.substr(0, colon);
        port = text.substr(colon + 1);
    }
    int p = -1;
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), p);
    if (host.empty() || ec != std::errc{} || ptr != port.data() + port.size() || p < 0 || p > 65535)
        throw InvalidArgument(fmt::format("bad bind address '{}'", text));
    cfg.host = std::string(host);
    cfg.port = p;
}

ServiceHandlers::ServiceHandlers(BackendPtr backend, ThresholdConfig thresholds, ServiceConfig config)
    : backend_(std::move(backend)), thresholds_(thresholds), config_(std::move(config)) {
    if (!backend_) throw InvalidArgument("service needs a classifier backend");
    config_.fetch.validate();
}

ServiceReply ServiceHandlers::health() const {
    nlohmann::ordered_json doc;
    doc["status"] = "ok";
    doc["backend"] = backend_->name();
    return {200, dump_json(doc)};
}

ServiceReply ServiceHandlers::classify(std::string_view body) const {
    const auto doc = parse_object(body);
    if (!doc) return error_reply(400, "MalformedBody", "body must be a JSON object");
    auto it = doc->find("texts");
    if (it == doc->end() || !it->is_array()) return error_reply(400, "MalformedBody", "body must contain a \"texts\" array");
    std::vector<std::string> texts;
    for (const auto& t : *it) {
        if (!t.is_string()) return error_reply(400, "MalformedBody", "every entry of \"texts\" must be a string");
        texts.push_back(t.get<std::string>());
    }
    if (texts.empty()) return error_reply(422, "EmptyInput", "\"texts\" is empty");

    std::vector<CategoryDistribution> dists;
    try {
        dists = backend_->classify_batch(texts);
    } catch (const std::exception& e) {
        return error_reply(502, "BackendFailure", e.what());
    }
    if (dists.size() != texts.size()) return error_reply(502, "BackendFailure", "backend returned the wrong number of results");

    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& d : dists) {
        nlohmann::ordered_json r;
        r["probabilities"] = category_map(d);
        r["predicted"] = std::string(display_name(predict_category(d)));
        nlohmann::ordered_json flagged = nlohmann::ordered_json::array();
        for (Category c : flagged_list(flag(d, thresholds_))) flagged.push_back(std::string(display_name(c)));
        r["flagged"] = std::move(flagged);
        results.push_back(std::move(r));
    }
    nlohmann::ordered_json out;
    out["results"] = std::move(results);
    return {200, dump_json(out)};
}

ServiceReply ServiceHandlers::scan(std::string_view body) const {
    const auto doc = parse_object(body);
    if (!doc) return error_reply(400, "MalformedBody", "body must be a JSON object");
    const bool has_url = doc->contains("url");
    const bool has_html = doc->contains("html");
    if (has_url == has_html) return error_reply(400, "MalformedBody", "body must contain exactly one of \"url\" or \"html\"");
    const auto& value = has_url ? (*doc)["url"] : (*doc)["html"];
    if (!value.is_string()) return error_reply(400, "MalformedBody", has_url ? "\"url\" must be a string" : "\"html\" must be a string");

    PageSource page;
    std::string site_id = "inline";
    if (has_url) {
        try {
            site_id = parse_http_url(value.get<std::string>()).host;
        } catch (const InvalidArgument& e) {
            return error_reply(400, "MalformedBody", e.what());
        }
        try {
            page = fetch_page(value.get<std::string>(), config_.fetch);
        } catch (const Error& e) {
            return error_reply(502, "FetchFailure", e.what());
        }
    } else {
        page.html = value.get<std::string>();
        page.url = "inline";
        page.origin = PageOrigin::File;
        page.fetched_at = std::chrono::system_clock::now();
    }

    std::vector<TextSegment> segments;
    try {
        segments = extract_segments(page, config_.rules);
    } catch (const ParseFailure& e) {
        return error_reply(422, "EmptySite", e.what());
    }
    if (segments.empty()) return error_reply(422, "EmptySite", "page has no visible text segments");

    try {
        const auto results = detect_all(segments, *backend_, thresholds_);
        const SiteReport report = aggregate(results, config_.mode, site_id, {page.url});
        return {200, render_report(report, ReportFormat::Json)};
    } catch (const std::exception& e) {
        return error_reply(502, "BackendFailure", e.what());
    }
}

bool ServiceHandlers::origin_allowed(std::string_view origin) const {
    for (const auto& pattern : config_.cors_origins) {
        if (pattern.ends_with('*')) {
            if (origin.starts_with(std::string_view(pattern).substr(0, pattern.size() - 1))) return true;
        } else if (origin == pattern) {
            return true;
        }
    }
    return false;
}

struct Service::Impl {
    ServiceHandlers handlers;
    httplib::Server server;
    int port = -1;

    Impl(BackendPtr backend, ThresholdConfig thresholds, ServiceConfig config)
        : handlers(std::move(backend), thresholds, std::move(config)) {}

    void apply_cors(const httplib::Request& req, httplib::Response& res) const {
        const auto origin = req.get_header_value("Origin");
        if (origin.empty() || !handlers.origin_allowed(origin)) return;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }

    void reply(const httplib::Request& req, httplib::Response& res, const ServiceReply& r) const {
        apply_cors(req, res);
        res.status = r.status;
        res.set_content(r.body, "application/json; charset=utf-8");
    }
};

Service::Service(BackendPtr backend, ThresholdConfig thresholds, ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(backend), thresholds, std::move(config))) {
    auto* impl = impl_.get();
    auto& srv = impl->server;
    srv.set_payload_max_length(16 * 1024 * 1024);
    // httplib's default adds SO_REUSEPORT, which lets a second server share a taken port.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    srv.Get("/v1/health", [impl](const httplib::Request& req, httplib::Response& res) {
        impl->reply(req, res, impl->handlers.health());
    });
    srv.Post("/v1/classify", [impl](const httplib::Request& req, httplib::Response& res) {
        impl->reply(req, res, impl->handlers.classify(req.body));
    });
    srv.Post("/v1/scan", [impl](const httplib::Request& req, httplib::Response& res) {
        impl->reply(req, res, impl->handlers.scan(req.body));
    });
    srv.Options(R"(/v1/.*)", [impl](const httplib::Request& req, httplib::Response& res) {
        impl->apply_cors(req, res);
        res.status = 204;
    });
}

Service::~Service() {
    stop();
}

void Service::bind() {
    const auto& cfg = impl_->handlers.config();
    if (cfg.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(cfg.host);
    } else {
        impl_->port = impl_->server.bind_to_port(cfg.host, cfg.port) ? cfg.port : -1;
    }
    if (impl_->port < 0) throw BindFailure(fmt::format("cannot bind {}:{}", cfg.host, cfg.port));
}

int Service::port() const noexcept {
    return impl_->port;
}

void Service::listen() {
    if (impl_->port < 0) bind();
    impl_->server.listen_after_bind();
}

void Service::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace darkscan
