#include "darkscan/error.hpp"
#include "darkscan/ingest.hpp"
#include "darkscan/robots.hpp"
#include "darkscan/text.hpp"
#include "darkscan/url.hpp"

#include <httplib.h>
#include <iconv.h>
#include <json.hpp>

#include <cerrno>
#include <regex>

namespace darkscan {

namespace {

std::string header_param(std::string_view header, std::string_view name) {
    std::string lower = ascii_lower(header);
    auto at = lower.find(std::string(name) + "=");
    if (at == std::string::npos) return {};
    std::string_view value = std::string_view(header).substr(at + name.size() + 1);
    value = value.substr(0, value.find(';'));
    value = trim_ascii(value);
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'')) value = value.substr(1, value.size() - 2);
    return std::string(value);
}

bool is_html_content_type(std::string_view content_type, std::string_view body_prefix) {
    std::string mime = ascii_lower(trim_ascii(content_type.substr(0, content_type.find(';'))));
    if (mime.empty()) {
        // No declared type: accept anything that looks like markup.
        return trim_ascii(body_prefix).starts_with("<");
    }
    return mime == "text/html" || mime == "application/xhtml+xml";
}

std::string sniff_meta_charset(std::string_view bytes) {
    static const std::regex meta(R"(<meta[^>]*charset\s*=\s*["']?\s*([A-Za-z0-9_:.\-]+))", std::regex::icase);
    std::string head(bytes.substr(0, 4096));
    std::smatch m;
    if (std::regex_search(head, m, meta)) return m[1].str();
    return {};
}

std::string canonical_charset(std::string_view label) {
    std::string cs = ascii_lower(trim_ascii(label));
    if (cs.empty() || cs == "utf8" || cs == "unicode-1-1-utf-8") return "utf-8";
    // WHATWG maps these labels to windows-1252.
    if (cs == "iso-8859-1" || cs == "latin1" || cs == "us-ascii" || cs == "ascii" || cs == "l1" ||
        cs == "iso8859-1" || cs == "windows-1252" || cs == "cp1252")
        return "windows-1252";
    return cs;
}

// Converts with iconv, substituting U+FFFD for undecodable bytes. Returns
// nullopt when the charset is unknown.
std::optional<std::string> iconv_to_utf8(std::string_view bytes, const std::string& charset) {
    std::string from = charset == "windows-1252" ? "CP1252" : charset;
    iconv_t cd = iconv_open("UTF-8", from.c_str());
    if (cd == reinterpret_cast<iconv_t>(-1)) return std::nullopt;

    std::string out;
    out.reserve(bytes.size() * 2);
    std::string input(bytes);
    char* in_ptr = input.data();
    std::size_t in_left = input.size();
    char buffer[4096];
    while (in_left > 0) {
        char* out_ptr = buffer;
        std::size_t out_left = sizeof(buffer);
        std::size_t rc = iconv(cd, &in_ptr, &in_left, &out_ptr, &out_left);
        out.append(buffer, sizeof(buffer) - out_left);
        if (rc == static_cast<std::size_t>(-1)) {
            if (errno == E2BIG) continue;
            // EILSEQ / EINVAL: skip one byte.
            out += "\xEF\xBF\xBD";
            ++in_ptr;
            --in_left;
        }
    }
    iconv_close(cd);
    return out;
}

}  // namespace

void FetchConfig::validate() const {
    if (timeout.count() <= 0) throw InvalidArgument("fetch timeout must be positive");
    if (max_bytes == 0) throw InvalidArgument("fetch max_bytes must be positive");
}

std::string decode_body(std::string_view bytes, std::string_view charset) {
    if (bytes.starts_with("\xEF\xBB\xBF")) {
        bytes.remove_prefix(3);
        charset = "utf-8";
    }
    std::string declared(charset);
    if (declared.empty()) declared = sniff_meta_charset(bytes);
    std::string cs = canonical_charset(declared);
    if (cs == "utf-8") {
        if (is_valid_utf8(bytes)) return std::string(bytes);
        cs = "windows-1252";
    }
    if (auto converted = iconv_to_utf8(bytes, cs)) return *converted;
    if (is_valid_utf8(bytes)) return std::string(bytes);
    return *iconv_to_utf8(bytes, "windows-1252");
}

PageSource fetch_page(const std::string& url_text, const FetchConfig& cfg) {
    cfg.validate();
    const Url url = parse_http_url(url_text);

    auto make_client = [&](const Url& target) {
        auto cli = std::make_unique<httplib::Client>(target.origin());
        cli->set_connection_timeout(cfg.timeout);
        cli->set_read_timeout(cfg.timeout);
        cli->set_write_timeout(cfg.timeout);
        cli->set_follow_location(true);
        return cli;
    };
    const httplib::Headers headers = {{"User-Agent", cfg.user_agent},
                                      {"Accept", "text/html,application/xhtml+xml;q=0.9,*/*;q=0.1"}};

    if (cfg.respect_robots) {
        auto cli = make_client(url);
        auto res = cli->Get("/robots.txt", headers);
        if (!res) throw NetworkError("robots.txt fetch failed for " + url.origin() + ": " + httplib::to_string(res.error()));
        RobotsRules rules = RobotsRules::allow_all();
        if (res->status >= 200 && res->status < 300) rules = RobotsRules::parse(res->body, cfg.user_agent);
        else if (res->status >= 500) rules = RobotsRules::disallow_all();
        if (!rules.allowed(url.target)) throw RobotsDisallowed("robots.txt disallows " + url_text);
    }

    PageSource page;
    page.url = url_text;
    page.origin = PageOrigin::Live;

    if (cfg.renderer_hook) {
        const Url hook = parse_http_url(*cfg.renderer_hook);
        auto cli = make_client(hook);
        nlohmann::json req = {{"url", url_text}};
        auto res = cli->Post(hook.target, req.dump(), "application/json");
        if (!res) throw NetworkError("renderer hook unreachable: " + httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300)
            throw NetworkError("renderer hook returned HTTP " + std::to_string(res->status));
        if (res->body.size() > cfg.max_bytes) throw TooLarge("rendered page exceeds max_bytes: " + url_text);
        page.html = decode_body(res->body, header_param(res->get_header_value("Content-Type"), "charset"));
        if (trim_ascii(page.html).empty()) throw NetworkError("renderer hook returned an empty page");
        page.fetched_at = std::chrono::system_clock::now();
        return page;
    }

    auto cli = make_client(url);
    std::string body;
    std::string content_type;
    int status = 0;
    bool too_large = false;
    bool not_html = false;
    auto res = cli->Get(
        url.target, headers,
        [&](const httplib::Response& r) {
            status = r.status;
            content_type = r.get_header_value("Content-Type");
            if (status >= 200 && status < 300) {
                auto declared = r.get_header_value("Content-Length");
                if (!declared.empty()) {
                    try {
                        if (std::stoull(declared) > cfg.max_bytes) {
                            too_large = true;
                            return false;
                        }
                    } catch (const std::exception&) {
                    }
                }
                if (!content_type.empty() && !is_html_content_type(content_type, "")) {
                    not_html = true;
                    return false;
                }
            }
            return true;
        },
        [&](const char* data, std::size_t len) {
            if (body.size() + len > cfg.max_bytes) {
                too_large = true;
                return false;
            }
            body.append(data, len);
            return true;
        });

    if (too_large) throw TooLarge("response exceeds " + std::to_string(cfg.max_bytes) + " bytes: " + url_text);
    if (not_html) throw NotHtml("content type '" + content_type + "' is not HTML: " + url_text);
    if (!res) throw NetworkError("fetch failed for " + url_text + ": " + httplib::to_string(res.error()));
    if (status < 200 || status >= 300) throw NetworkError("HTTP " + std::to_string(status) + " for " + url_text);
    if (!is_html_content_type(content_type, std::string_view(body).substr(0, 512)))
        throw NotHtml("response is not HTML: " + url_text);

    page.html = decode_body(body, header_param(content_type, "charset"));
    if (trim_ascii(page.html).empty()) throw NetworkError("empty response body: " + url_text);
    page.fetched_at = std::chrono::system_clock::now();
    return page;
}

}  // namespace darkscan
