#include "darkscan/report.hpp"

#include "darkscan/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

namespace darkscan {

namespace {

void dump(const nlohmann::ordered_json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
    const std::string close(static_cast<std::size_t>(depth) * 2, ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                out += nlohmann::ordered_json(key).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
                out += ": ";
                dump(value, out, depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k > 0) out += ",\n";
                out += pad;
                dump(j[k], out, depth + 1);
            }
            out += "\n" + close + "]";
            return;
        }
        case nlohmann::json::value_t::number_float:
            out += format_decimal(j.get<double>());
            return;
        default:
            out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    }
}

nlohmann::ordered_json category_map(const CategoryValues& v) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (Category c : canonical_order()) m[std::string(display_name(c))] = v[index_of(c)];
    return m;
}

[[noreturn]] void violation(const std::string& path, const std::string& what) {
    throw SchemaViolation(fmt::format("{}: {}", path, what));
}

const nlohmann::json& field(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) violation(path, "missing field '" + key + "'");
    return *it;
}

std::string string_field(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_string()) violation(path + "." + key, "must be a string");
    return v.get<std::string>();
}

void only_fields(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) violation(path, "unexpected field '" + key + "'");
    }
}

CategoryValues read_category_map(const nlohmann::json& v, const std::string& path) {
    if (!v.is_object()) violation(path, "must be an object");
    if (v.size() != kNumCategories) violation(path, fmt::format("must have exactly 8 categories, found {}", v.size()));
    CategoryValues out{};
    for (Category c : canonical_order()) {
        const std::string name(display_name(c));
        auto it = v.find(name);
        if (it == v.end()) violation(path, "missing category '" + name + "'");
        if (!it->is_number()) violation(path + "." + name, "must be a number");
        const double x = it->get<double>();
        if (!std::isfinite(x) || x < 0.0 || x > 1.0) violation(path + "." + name, "must lie in [0, 1]");
        out[index_of(c)] = x;
    }
    return out;
}

Category read_category_name(const nlohmann::json& v, const std::string& path) {
    if (!v.is_string()) violation(path, "must be a category name");
    const auto s = v.get<std::string>();
    for (Category c : canonical_order()) {
        if (display_name(c) == s) return c;
    }
    violation(path, "'" + s + "' is not a category display name");
}

std::string markdown_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|' || c == '`' || c == '*' || c == '_' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string markdown_report(const SiteReport& r) {
    std::string md;
    md += fmt::format("# Dark pattern report: {}\n\n", markdown_escape(r.site_id.empty() ? "(unnamed)" : r.site_id));
    md += fmt::format("- Pages: {}\n- Segments: {}\n- Mode: {}\n- Flagged segments: {}\n\n", r.page_urls.size(),
                      r.n_segments, mode_name(r.mode), r.flagged.size());
    const char* headline = r.mode == AggregationMode::ArgmaxFraction ? "Argmax fraction" : "Mean probability";
    md += fmt::format("| Category | {} | Mean probability |\n|---|---:|---:|\n", headline);
    for (Category c : canonical_order()) {
        md += fmt::format("| {} | {} | {} |\n", display_name(c), format_decimal(r.fractions[index_of(c)]),
                          format_decimal(r.mean_probabilities[index_of(c)]));
    }
    md += "\n## Flagged segments\n\n";
    if (r.flagged.empty()) {
        md += "No segments were flagged.\n";
        return md;
    }
    for (Category c : dark_categories()) {
        std::string items;
        for (const auto& f : r.flagged) {
            if (!f.categories[index_of(c)]) continue;
            items += fmt::format("- \"{}\" (p = {}) at `{}` on {}\n", f.segment.text, format_decimal(f.probabilities[index_of(c)]),
                                 f.segment.dom_path, f.segment.page_url);
        }
        if (!items.empty()) md += fmt::format("### {}\n\n{}\n", display_name(c), items);
    }
    while (md.ends_with("\n\n")) md.pop_back();
    return md;
}

}  // namespace

ReportFormat parse_format(std::string_view s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "md" || s == "markdown") return ReportFormat::Markdown;
    throw InvalidArgument(fmt::format("unknown format '{}' (expected json or md)", s));
}

std::string format_decimal(double v) {
    if (!std::isfinite(v)) throw InvalidArgument("cannot format a non-finite number");
    std::string s = fmt::format("{:.6f}", v + 0.0);
    if (s == "-0.000000") s = "0.000000";
    while (s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
}

std::string dump_json(const nlohmann::ordered_json& doc) {
    std::string out;
    dump(doc, out, 0);
    out += '\n';
    return out;
}

nlohmann::ordered_json report_to_json(const SiteReport& r) {
    nlohmann::ordered_json doc;
    doc["site_id"] = r.site_id;
    doc["pages"] = r.page_urls;
    doc["n_segments"] = r.n_segments;
    doc["mode"] = std::string(mode_name(r.mode));
    doc["fractions"] = category_map(r.fractions);
    doc["mean_probabilities"] = category_map(r.mean_probabilities);
    nlohmann::ordered_json flags = nlohmann::ordered_json::array();
    for (const auto& f : r.flagged) {
        nlohmann::ordered_json e;
        e["text"] = f.segment.text;
        e["dom_path"] = f.segment.dom_path;
        e["page_url"] = f.segment.page_url;
        nlohmann::ordered_json cats = nlohmann::ordered_json::array();
        for (Category c : flagged_list(f.categories)) cats.push_back(std::string(display_name(c)));
        e["categories"] = std::move(cats);
        e["probabilities"] = category_map(f.probabilities);
        flags.push_back(std::move(e));
    }
    doc["flags"] = std::move(flags);
    return doc;
}

SiteReport report_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) violation("$", "report must be an object");
    only_fields(doc, {"site_id", "pages", "n_segments", "mode", "fractions", "mean_probabilities", "flags"}, "$");
    SiteReport r;
    r.site_id = string_field(doc, "site_id", "$");

    const auto& pages = field(doc, "pages", "$");
    if (!pages.is_array()) violation("$.pages", "must be an array");
    for (std::size_t k = 0; k < pages.size(); ++k) {
        if (!pages[k].is_string()) violation(fmt::format("$.pages[{}]", k), "must be a string");
        r.page_urls.push_back(pages[k].get<std::string>());
    }

    const auto& n = field(doc, "n_segments", "$");
    if (!n.is_number_unsigned() && !(n.is_number_integer() && n.get<std::int64_t>() >= 0))
        violation("$.n_segments", "must be a non-negative integer");
    r.n_segments = n.get<std::size_t>();

    try {
        r.mode = parse_mode(string_field(doc, "mode", "$"));
    } catch (const InvalidArgument&) {
        violation("$.mode", "must be \"argmax\" or \"mean\"");
    }
    r.fractions = read_category_map(field(doc, "fractions", "$"), "$.fractions");
    r.mean_probabilities = read_category_map(field(doc, "mean_probabilities", "$"), "$.mean_probabilities");

    const auto& flags = field(doc, "flags", "$");
    if (!flags.is_array()) violation("$.flags", "must be an array");
    for (std::size_t k = 0; k < flags.size(); ++k) {
        const std::string path = fmt::format("$.flags[{}]", k);
        const auto& e = flags[k];
        if (!e.is_object()) violation(path, "must be an object");
        only_fields(e, {"text", "dom_path", "page_url", "categories", "probabilities"}, path);
        FlaggedSegment f;
        f.segment.text = string_field(e, "text", path);
        f.segment.dom_path = string_field(e, "dom_path", path);
        f.segment.page_url = string_field(e, "page_url", path);
        const auto& cats = field(e, "categories", path);
        if (!cats.is_array() || cats.empty()) violation(path + ".categories", "must be a non-empty array");
        for (std::size_t j = 0; j < cats.size(); ++j) {
            const Category c = read_category_name(cats[j], fmt::format("{}.categories[{}]", path, j));
            if (!is_dark(c)) violation(fmt::format("{}.categories[{}]", path, j), "Not Dark Pattern cannot be flagged");
            if (f.categories[index_of(c)]) violation(fmt::format("{}.categories[{}]", path, j), "duplicate category");
            f.categories[index_of(c)] = true;
        }
        f.probabilities = read_category_map(field(e, "probabilities", path), path + ".probabilities");
        r.flagged.push_back(std::move(f));
    }
    return r;
}

SiteReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileUnreadable("cannot read report " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaViolation(fmt::format("{} is not valid JSON: {}", path.string(), e.what()));
    }
    return report_from_json(doc);
}

std::string render_report(const SiteReport& report, ReportFormat format) {
    return format == ReportFormat::Json ? dump_json(report_to_json(report)) : markdown_report(report);
}

std::string render_reports(const std::vector<SiteReport>& reports, ReportFormat format) {
    if (format == ReportFormat::Json) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : reports) arr.push_back(report_to_json(r));
        return dump_json(arr);
    }
    std::string md;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        if (k > 0) md += "\n";
        md += markdown_report(reports[k]);
    }
    return md;
}

nlohmann::ordered_json comparison_to_json(const ComparisonReport& cmp) {
    nlohmann::ordered_json doc;
    doc["mode"] = std::string(mode_name(cmp.mode));
    doc["sites"] = cmp.sites;
    doc["ranking"] = cmp.ranking;
    doc["overall"] = cmp.overall;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : cmp.categories) {
        nlohmann::ordered_json e;
        e["category"] = std::string(display_name(row.category));
        e["values"] = row.values;
        e["delta"] = row.delta;
        e["better"] = row.better;
        e["rule"] = is_dark(row.category) ? "lower is better" : "higher is better";
        rows.push_back(std::move(e));
    }
    doc["categories"] = std::move(rows);
    return doc;
}

std::string render_comparison(const ComparisonReport& cmp, ReportFormat format) {
    if (format == ReportFormat::Json) return dump_json(comparison_to_json(cmp));
    std::string md = "# Site comparison\n\n";
    md += fmt::format("Mode: {}\n\n", mode_name(cmp.mode));
    md += fmt::format("Overall: **{}** (higher Not Dark Pattern value is better)\n\n", markdown_escape(cmp.overall));
    md += "## Ranking\n\n";
    for (std::size_t k = 0; k < cmp.ranking.size(); ++k) md += fmt::format("{}. {}\n", k + 1, markdown_escape(cmp.ranking[k]));
    md += "\n## Per category\n\n| Category |";
    for (const auto& s : cmp.sites) md += fmt::format(" {} |", markdown_escape(s));
    md += " Delta | Better |\n|---|";
    for (std::size_t k = 0; k < cmp.sites.size(); ++k) md += "---:|";
    md += "---:|---|\n";
    for (const auto& row : cmp.categories) {
        md += fmt::format("| {} |", display_name(row.category));
        for (double v : row.values) md += fmt::format(" {} |", format_decimal(v));
        md += fmt::format(" {} | {} |\n", format_decimal(row.delta), markdown_escape(row.better));
    }
    md += "\nDark categories: lower is better. Not Dark Pattern: higher is better.\n";
    return md;
}

const std::string& site_report_schema() {
    static const std::string schema = [] {
        nlohmann::ordered_json cat_map;
        cat_map["type"] = "object";
        nlohmann::ordered_json props = nlohmann::ordered_json::object();
        nlohmann::ordered_json names = nlohmann::ordered_json::array();
        for (Category c : canonical_order()) {
            props[std::string(display_name(c))] = {{"type", "number"}, {"minimum", 0}, {"maximum", 1}};
            names.push_back(std::string(display_name(c)));
        }
        cat_map["properties"] = props;
        cat_map["required"] = names;
        cat_map["additionalProperties"] = false;

        nlohmann::ordered_json dark = nlohmann::ordered_json::array();
        for (Category c : dark_categories()) dark.push_back(std::string(display_name(c)));

        nlohmann::ordered_json flag;
        flag["type"] = "object";
        flag["properties"] = {
            {"text", {{"type", "string"}}},
            {"dom_path", {{"type", "string"}}},
            {"page_url", {{"type", "string"}}},
            {"categories", {{"type", "array"}, {"minItems", 1}, {"uniqueItems", true}, {"items", {{"enum", dark}}}}},
            {"probabilities", {{"$ref", "#/$defs/category_map"}}},
        };
        flag["required"] = {"text", "dom_path", "page_url", "categories", "probabilities"};
        flag["additionalProperties"] = false;

        nlohmann::ordered_json s;
        s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
        s["title"] = "SiteReport";
        s["type"] = "object";
        s["properties"] = {
            {"site_id", {{"type", "string"}}},
            {"pages", {{"type", "array"}, {"items", {{"type", "string"}}}}},
            {"n_segments", {{"type", "integer"}, {"minimum", 0}}},
            {"mode", {{"enum", nlohmann::ordered_json::array({"argmax", "mean"})}}},
            {"fractions", {{"$ref", "#/$defs/category_map"}}},
            {"mean_probabilities", {{"$ref", "#/$defs/category_map"}}},
            {"flags", {{"type", "array"}, {"items", {{"$ref", "#/$defs/flag"}}}}},
        };
        s["required"] = {"site_id", "pages", "n_segments", "mode", "fractions", "mean_probabilities", "flags"};
        s["additionalProperties"] = false;
        s["$defs"] = {{"category_map", cat_map}, {"flag", flag}};
        return s.dump(2) + "\n";
    }();
    return schema;
}

}  // namespace darkscan
