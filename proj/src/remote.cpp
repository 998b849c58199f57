#include "darkscan/error.hpp"
#include "darkscan/transformer.hpp"
#include "darkscan/url.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <cmath>

namespace darkscan {

CategoryDistribution distribution_from_wire(const nlohmann::json& probabilities) {
    if (!probabilities.is_object()) throw MalformedResponse("probabilities must be an object");
    if (probabilities.size() != kNumCategories)
        throw MalformedResponse(fmt::format("expected 8 categories, got {}", probabilities.size()));
    CategoryDistribution::Probabilities p{};
    std::array<bool, kNumCategories> seen{};
    for (const auto& [key, value] : probabilities.items()) {
        Category c{};
        try {
            c = parse_label(key);
        } catch (const UnknownLabel&) {
            throw MalformedResponse("unknown category '" + key + "'");
        }
        if (key != display_name(c)) throw MalformedResponse("category '" + key + "' is not a display name");
        if (!value.is_number()) throw MalformedResponse("probability for '" + key + "' is not a number");
        const double v = value.get<double>();
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw MalformedResponse(fmt::format("probability {} for '{}' out of range", v, key));
        seen[index_of(c)] = true;
        p[index_of(c)] = v;
    }
    for (Category c : canonical_order()) {
        if (!seen[index_of(c)]) throw MalformedResponse(fmt::format("missing category '{}'", display_name(c)));
    }
    double sum = 0;
    for (double v : p) sum += v;
    if (std::fabs(sum - 1.0) > 1e-4) throw MalformedResponse(fmt::format("probabilities sum to {}, not 1", sum));
    return CategoryDistribution::normalized(p);
}

RemoteBackend::RemoteBackend(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
    while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
    (void)parse_http_url(endpoint_);
}

std::vector<CategoryDistribution> RemoteBackend::classify_batch(std::span<const std::string> texts) const {
    if (texts.empty()) return {};
    const Url url = parse_http_url(endpoint_);
    httplib::Client cli(url.origin());
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_write_timeout(timeout_);

    std::string prefix = url.target == "/" ? "" : url.target;
    nlohmann::json body = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    auto res = cli.Post(prefix + "/v1/classify", body.dump(), "application/json");
    if (!res) throw EndpointUnavailable(fmt::format("{} unreachable: {}", endpoint_, httplib::to_string(res.error())));
    if (res->status < 200 || res->status >= 300)
        throw EndpointUnavailable(fmt::format("{} answered HTTP {}", endpoint_, res->status));

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
        throw MalformedResponse("response is not JSON");
    }
    if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_array())
        throw MalformedResponse("response lacks a results array");
    const auto& results = doc["results"];
    if (results.size() != texts.size())
        throw MalformedResponse(fmt::format("sent {} texts, received {} results", texts.size(), results.size()));
    std::vector<CategoryDistribution> out;
    out.reserve(results.size());
    for (const auto& r : results) {
        if (!r.is_object() || !r.contains("probabilities")) throw MalformedResponse("result lacks probabilities");
        out.push_back(distribution_from_wire(r["probabilities"]));
    }
    return out;
}

}  // namespace darkscan
