#include "darkscan/url.hpp"

#include "darkscan/error.hpp"
#include "darkscan/text.hpp"

#include <charconv>

namespace darkscan {

std::string Url::origin() const {
    return scheme + "://" + host + ":" + std::to_string(port);
}

Url parse_http_url(std::string_view text) {
    text = trim_ascii(text);
    auto fail = [&](const char* why) {
        return InvalidArgument(std::string("invalid URL '") + std::string(text) + "': " + why);
    };
    auto sep = text.find("://");
    if (sep == std::string_view::npos) throw fail("missing scheme");
    Url url;
    url.scheme = ascii_lower(text.substr(0, sep));
    if (url.scheme != "http" && url.scheme != "https") throw fail("scheme must be http or https");

    std::string_view rest = text.substr(sep + 3);
    std::size_t authority_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, authority_end);
    std::string_view tail = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
    std::string_view host = authority;
    url.port = url.scheme == "https" ? 443 : 80;
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos) throw fail("unterminated IPv6 literal");
        host = authority.substr(0, close + 1);
        authority = authority.substr(close + 1);
        if (!authority.empty() && authority.front() == ':') {
            auto port_text = authority.substr(1);
            auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), url.port);
            if (ec != std::errc{} || p != port_text.data() + port_text.size()) throw fail("bad port");
        }
    } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        auto port_text = authority.substr(colon + 1);
        if (!port_text.empty()) {
            auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), url.port);
            if (ec != std::errc{} || p != port_text.data() + port_text.size()) throw fail("bad port");
        }
    }
    if (host.empty()) throw fail("missing host");
    if (url.port <= 0 || url.port > 65535) throw fail("port out of range");
    url.host = ascii_lower(host);

    if (auto hash = tail.find('#'); hash != std::string_view::npos) tail = tail.substr(0, hash);
    url.target = tail.empty() ? "/" : std::string(tail);
    if (url.target.front() == '?') url.target.insert(url.target.begin(), '/');
    return url;
}

}  // namespace darkscan
