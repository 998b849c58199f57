#include <doctest.h>

#include "darkscan/error.hpp"
#include "darkscan/report.hpp"
#include "statements.hpp"
#include "support.hpp"

#include <regex>

using namespace darkscan;

namespace {

SiteReport sample_report() {
    SiteReport r;
    r.site_id = "shop";
    r.page_urls = {"https://shop.test/a", "https://shop.test/b"};
    r.n_segments = 4;
    r.fractions[index_of(Category::NotDarkPattern)] = 0.75;
    r.fractions[index_of(Category::Scarcity)] = 0.25;
    auto d = testing::hurry_distribution();
    for (auto c : canonical_order()) r.mean_probabilities[index_of(c)] = 0.125;
    FlaggedSegment f;
    f.segment.text = testing::kHurryStatement;
    f.segment.dom_path = "html > body > p";
    f.segment.page_url = "https://shop.test/a";
    f.probabilities = d.probabilities();
    f.categories[index_of(Category::Scarcity)] = true;
    r.flagged.push_back(f);
    return r;
}

SiteReport from_values(std::string id, CategoryValues v) {
    SiteReport r;
    r.site_id = std::move(id);
    r.fractions = v;
    r.mean_probabilities = v;
    return r;
}

}  // namespace

TEST_CASE("decimal formatting") {
    CHECK(format_decimal(0.75) == "0.75");
    CHECK(format_decimal(1.0) == "1.0");
    CHECK(format_decimal(0.0) == "0.0");
    CHECK(format_decimal(-0.0) == "0.0");
    CHECK(format_decimal(0.002) == "0.002");
    CHECK(format_decimal(1.0 / 3.0) == "0.333333");
    CHECK(format_decimal(2.0 / 3.0) == "0.666667");
    CHECK(format_decimal(1e-9) == "0.0");
    CHECK(format_decimal(12.5) == "12.5");
}

TEST_CASE("markdown report lists all categories in canonical order") {
    auto md = render_report(sample_report(), ReportFormat::Markdown);
    std::size_t last = 0;
    for (auto c : canonical_order()) {
        auto pos = md.find("| " + std::string(display_name(c)) + " |");
        REQUIRE(pos != std::string::npos);
        CHECK(pos > last);
        last = pos;
    }
    CHECK(md.find("| Forced Action | 0.0 |") != std::string::npos);
    CHECK(md.find("| Not Dark Pattern | 0.75 |") != std::string::npos);
    CHECK(md.find("| Scarcity | 0.25 |") != std::string::npos);
}

TEST_CASE("flagged evidence is quoted under its category") {
    auto md = render_report(sample_report(), ReportFormat::Markdown);
    auto section = md.find("### Scarcity");
    REQUIRE(section != std::string::npos);
    auto quote = md.find("\"Hurry! Only 2 left in stock\"", section);
    REQUIRE(quote != std::string::npos);
    CHECK(md.find("`html > body > p`", quote) != std::string::npos);

    auto clean = sample_report();
    clean.flagged.clear();
    CHECK(render_report(clean, ReportFormat::Markdown).find("No segments were flagged.") != std::string::npos);
}

TEST_CASE("JSON layout and round trip") {
    auto r = sample_report();
    auto text = render_report(r, ReportFormat::Json);
    auto doc = nlohmann::ordered_json::parse(text);
    std::vector<std::string> keys;
    for (const auto& [k, v] : doc.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"site_id", "pages", "n_segments", "mode", "fractions", "mean_probabilities",
                                           "flags"});
    CHECK(doc["fractions"].size() == 8);
    CHECK(doc["flags"][0]["categories"] == nlohmann::ordered_json::array({"Scarcity"}));
    std::vector<std::string> flag_keys;
    for (const auto& [k, v] : doc["flags"][0].items()) flag_keys.push_back(k);
    CHECK(flag_keys == std::vector<std::string>{"text", "dom_path", "page_url", "categories", "probabilities"});

    auto back = report_from_json(nlohmann::json::parse(text));
    CHECK(render_report(back, ReportFormat::Json) == text);
    CHECK(render_report(r, ReportFormat::Json) == text);
    CHECK(text.back() == '\n');
}

TEST_CASE("numbers have at most six fractional digits") {
    auto r = sample_report();
    r.mean_probabilities[0] = 1.0 / 7.0;
    auto text = render_report(r, ReportFormat::Json);
    std::regex number(R"([:\[,]\s*(-?\d+\.\d+))");
    std::regex exponent(R"(\d[eE][-+]?\d)");
    CHECK_FALSE(std::regex_search(text, exponent));
    for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator(); ++it) {
        auto s = (*it)[1].str();
        CHECK(s.size() - s.find('.') - 1 <= 6);
    }
}

TEST_CASE("schema violations carry the offending path") {
    auto good = nlohmann::json::parse(render_report(sample_report(), ReportFormat::Json));
    auto expect_violation = [](const nlohmann::json& doc, const std::string& path_part) {
        try {
            (void)report_from_json(doc);
            FAIL("expected SchemaViolation");
        } catch (const SchemaViolation& e) {
            CHECK(std::string(e.what()).find(path_part) != std::string::npos);
        }
    };
    auto d = good;
    d["extra"] = 1;
    expect_violation(d, "extra");
    d = good;
    d["fractions"].erase("Urgency");
    expect_violation(d, "$.fractions");
    d = good;
    d["fractions"]["Urgency"] = 1.5;
    expect_violation(d, "$.fractions.Urgency");
    d = good;
    d["mode"] = "median";
    expect_violation(d, "$.mode");
    d = good;
    d["n_segments"] = -1;
    expect_violation(d, "$.n_segments");
    d = good;
    d["flags"][0]["categories"] = {"Nope"};
    expect_violation(d, "$.flags[0].categories");
    d = good;
    d.erase("site_id");
    expect_violation(d, "site_id");
    CHECK_THROWS_AS((void)report_from_json(nlohmann::json::array()), SchemaViolation);
}

TEST_CASE("published schema file matches the built-in schema") {
    auto file = nlohmann::json::parse(testing::read_file(testing::data_dir() / "schema" / "site_report.schema.json"));
    CHECK(file == nlohmann::json::parse(site_report_schema()));
    CHECK(file["$schema"] == "https://json-schema.org/draft/2020-12/schema");
}

TEST_CASE("bundled reports load and compare as the table narrates") {
    auto w1 = load_report(testing::data_dir() / "reports" / "website1.json");
    auto w2 = load_report(testing::data_dir() / "reports" / "website2.json");
    CHECK(w1.fractions[index_of(Category::NotDarkPattern)] == 0.75);
    CHECK(w2.fractions[index_of(Category::Urgency)] == 0.002);
    auto cmp = compare_sites({w1, w2});
    auto md = render_comparison(cmp, ReportFormat::Markdown);
    CHECK(md.find("Overall: **website1**") != std::string::npos);
    CHECK(md.find("| Scarcity | 0.2 | 0.02 | 0.18 | website2 |") != std::string::npos);
    CHECK(md.find("| Urgency | 0.073 | 0.002 | 0.071 | website2 |") != std::string::npos);

    auto j = comparison_to_json(cmp);
    CHECK(j["overall"] == "website1");
    CHECK(j["ranking"] == nlohmann::ordered_json::array({"website1", "website2"}));
    CHECK(j["categories"].size() == 8);
    CHECK(j["categories"][index_of(Category::Scarcity)]["better"] == "website2");
    CHECK(j["categories"][index_of(Category::Scarcity)]["rule"] == "lower is better");
    CHECK(j["categories"][index_of(Category::NotDarkPattern)]["rule"] == "higher is better");

    CHECK(render_report(w1, ReportFormat::Json) == testing::read_file(testing::data_dir() / "reports" / "website1.json"));
}

TEST_CASE("comparison rendering for ties and three sites") {
    CategoryValues v = {0, 0.1, 0.7, 0, 0.1, 0, 0.1, 0};
    auto tie = compare_sites({from_values("a", v), from_values("b", v)});
    auto md = render_comparison(tie, ReportFormat::Markdown);
    CHECK(md.find("Overall: **tie**") != std::string::npos);
    for (auto c : canonical_order())
        CHECK(md.find("| " + std::string(display_name(c)) + " | ") != std::string::npos);
    auto j = comparison_to_json(tie);
    for (const auto& row : j["categories"]) {
        CHECK(row["better"] == "tie");
        CHECK(row["delta"] == 0.0);
    }

    auto three = compare_sites({from_values("a", v), from_values("b", {0, 0, 0.9, 0, 0.1, 0, 0, 0}),
                                from_values("c", {0.5, 0, 0.5, 0, 0, 0, 0, 0})});
    auto j3 = comparison_to_json(three);
    CHECK(j3["ranking"] == nlohmann::ordered_json::array({"b", "a", "c"}));
    auto md3 = render_comparison(three, ReportFormat::Markdown);
    CHECK(md3.find("1. b") != std::string::npos);
    CHECK(md3.find("3. c") != std::string::npos);
}

TEST_CASE("multi-site rendering and format parsing") {
    auto a = sample_report();
    auto b = sample_report();
    b.site_id = "other";
    auto arr = nlohmann::json::parse(render_reports({a, b}, ReportFormat::Json));
    REQUIRE(arr.is_array());
    CHECK(arr.size() == 2);
    CHECK(arr[1]["site_id"] == "other");
    auto md = render_reports({a, b}, ReportFormat::Markdown);
    CHECK(md.find("# Dark pattern report: shop") != std::string::npos);
    CHECK(md.find("# Dark pattern report: other") != std::string::npos);

    CHECK(parse_format("json") == ReportFormat::Json);
    CHECK(parse_format("md") == ReportFormat::Markdown);
    CHECK(parse_format("markdown") == ReportFormat::Markdown);
    CHECK_THROWS_AS((void)parse_format("pdf"), InvalidArgument);
}

TEST_CASE("dump_json is deterministic") {
    nlohmann::ordered_json doc = {{"b", 1}, {"a", {0.5, 1.0, "x"}}, {"c", nlohmann::ordered_json::object()}};
    CHECK(dump_json(doc) == "{\n  \"b\": 1,\n  \"a\": [\n    0.5,\n    1.0,\n    \"x\"\n  ],\n  \"c\": {}\n}\n");
}
