#pragma once

#include <string>
#include <string_view>

namespace darkscan {

struct Url {
    std::string scheme;  // "http" or "https"
    std::string host;
    int port = 0;
    std::string target = "/";  // path + query, fragment removed

    /// "scheme://host:port" as accepted by the HTTP client.
    [[nodiscard]] std::string origin() const;
};

/// Parses an absolute http(s) URL. Throws InvalidArgument otherwise.
[[nodiscard]] Url parse_http_url(std::string_view text);

}  // namespace darkscan
