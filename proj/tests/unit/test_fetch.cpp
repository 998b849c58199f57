#include <doctest.h>

#include "darkscan/error.hpp"
#include "darkscan/ingest.hpp"

#include <httplib.h>

#include <thread>

using namespace darkscan;

namespace {

class StubSite {
public:
    explicit StubSite(std::string robots) : robots_(std::move(robots)) {
        svr_.Get("/robots.txt", [this](const httplib::Request&, httplib::Response& res) {
            if (robots_.empty()) {
                res.status = 404;
                return;
            }
            res.set_content(robots_, "text/plain");
        });
        svr_.Get("/page", [](const httplib::Request& req, httplib::Response& res) {
            res.set_content("<html><body>hi " + req.get_header_value("User-Agent") + "</body></html>",
                            "text/html; charset=utf-8");
        });
        svr_.Get("/private/page", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("<p>private</p>", "text/html");
        });
        svr_.Get("/img", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(std::string("\x89PNG\r\n", 6), "image/png");
        });
        svr_.Get("/big", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("<p>" + std::string(5000, 'x') + "</p>", "text/html");
        });
        svr_.Get("/latin1", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("<p>caf\xe9</p>", "text/html; charset=ISO-8859-1");
        });
        svr_.Get("/meta", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("<meta charset=\"windows-1252\"><p>\x93quoted\x94</p>", "text/html");
        });
        svr_.Get("/untyped", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("<!DOCTYPE html><p>sniffed</p>", "");
        });
        svr_.Get("/gone", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
        svr_.Post("/render", [](const httplib::Request& req, httplib::Response& res) {
            res.set_content("<p>rendered " + req.body + "</p>", "text/html");
        });
        port_ = svr_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { svr_.listen_after_bind(); });
        svr_.wait_until_ready();
    }
    ~StubSite() {
        svr_.stop();
        thread_.join();
    }

    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

private:
    std::string robots_;
    httplib::Server svr_;
    int port_ = 0;
    std::thread thread_;
};

FetchConfig config() {
    FetchConfig cfg;
    cfg.timeout = std::chrono::milliseconds(5000);
    return cfg;
}

}  // namespace

TEST_CASE("fetch returns the served html") {
    StubSite site("User-agent: *\nDisallow: /private\n");
    auto page = fetch_page(site.url("/page"), config());
    CHECK(page.html == "<html><body>hi darkscan/1.0</body></html>");
    CHECK(page.origin == PageOrigin::Live);
    CHECK(page.url == site.url("/page"));
    CHECK(page.fetched_at.time_since_epoch().count() > 0);
}

TEST_CASE("robots.txt is honored unless disabled") {
    StubSite site("User-agent: *\nDisallow: /\n");
    CHECK_THROWS_AS((void)fetch_page(site.url("/page"), config()), RobotsDisallowed);
    auto cfg = config();
    cfg.respect_robots = false;
    CHECK_NOTHROW((void)fetch_page(site.url("/page"), cfg));

    StubSite partial("User-agent: *\nDisallow: /private\n");
    CHECK_THROWS_AS((void)fetch_page(partial.url("/private/page"), config()), RobotsDisallowed);

    StubSite none("");
    CHECK_NOTHROW((void)fetch_page(none.url("/page"), config()));
}

TEST_CASE("non-html content, oversized bodies and errors") {
    StubSite site("");
    CHECK_THROWS_AS((void)fetch_page(site.url("/img"), config()), NotHtml);
    auto small = config();
    small.max_bytes = 1000;
    CHECK_THROWS_AS((void)fetch_page(site.url("/big"), small), TooLarge);
    CHECK_THROWS_AS((void)fetch_page(site.url("/gone"), config()), NetworkError);
    CHECK_THROWS_AS((void)fetch_page("ftp://127.0.0.1/x", config()), InvalidArgument);
    CHECK_NOTHROW((void)fetch_page(site.url("/untyped"), config()));
}

TEST_CASE("dead host is a network error") {
    int port;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    auto cfg = config();
    cfg.timeout = std::chrono::milliseconds(1000);
    CHECK_THROWS_AS((void)fetch_page("http://127.0.0.1:" + std::to_string(port) + "/", cfg), NetworkError);
}

TEST_CASE("charsets are decoded to utf-8") {
    StubSite site("");
    CHECK(fetch_page(site.url("/latin1"), config()).html == "<p>caf\xc3\xa9</p>");
    auto meta = fetch_page(site.url("/meta"), config()).html;
    CHECK(meta.find("\xe2\x80\x9cquoted\xe2\x80\x9d") != std::string::npos);
    CHECK(decode_body("caf\xe9", "") == "caf\xc3\xa9");
    CHECK(decode_body("caf\xc3\xa9", "utf-8") == "caf\xc3\xa9");
    CHECK(decode_body("\xe9", "no-such-charset") == "\xc3\xa9");
}

TEST_CASE("renderer hook supplies the html") {
    StubSite site("");
    auto cfg = config();
    cfg.renderer_hook = site.url("/render");
    auto page = fetch_page(site.url("/page"), cfg);
    CHECK(page.html.find("rendered") != std::string::npos);
    CHECK(page.html.find("/page") != std::string::npos);
}

TEST_CASE("fetch config validation") {
    auto cfg = config();
    CHECK_NOTHROW(cfg.validate());
    cfg.timeout = std::chrono::milliseconds(0);
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = config();
    cfg.max_bytes = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
