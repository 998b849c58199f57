#include "darkscan/error.hpp"
#include "darkscan/html.hpp"
#include "darkscan/ingest.hpp"
#include "darkscan/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace darkscan {

namespace {

const std::unordered_set<std::string_view> kExcluded = {
    "script", "style", "noscript", "template", "head", "title",
    "iframe", "meta",  "link",     "base",     "datalist",
};

// Elements that start and end a segment. Form controls are included because
// a button label or a field is perceived as a separate statement.
const std::unordered_set<std::string_view> kBlock = {
    "address", "article", "aside",  "blockquote", "body",     "caption", "center",  "dd",
    "details", "dialog",  "dir",    "div",        "dl",       "dt",      "fieldset", "figcaption",
    "figure",  "footer",  "form",   "h1",         "h2",       "h3",      "h4",      "h5",
    "h6",      "header",  "hgroup", "hr",         "html",     "legend",  "li",      "main",
    "menu",    "nav",     "ol",     "p",          "pre",      "section", "summary", "table",
    "tbody",   "td",      "tfoot",  "th",         "thead",    "tr",      "ul",      "button",
    "select",  "option",  "optgroup", "textarea", "label",    "br",
};

bool is_hidden(const html::Node& el) {
    if (el.has_attribute("hidden")) return true;
    if (auto aria = el.attribute("aria-hidden"); aria && ascii_lower(trim_ascii(*aria)) == "true") return true;
    if (el.tag == "input") {
        if (auto type = el.attribute("type"); type && ascii_lower(trim_ascii(*type)) == "hidden") return true;
    }
    if (auto style = el.attribute("style")) {
        std::string compact;
        for (char c : *style) {
            if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
        }
        compact = ascii_lower(compact);
        if (compact.find("display:none") != std::string::npos ||
            compact.find("visibility:hidden") != std::string::npos)
            return true;
    }
    return false;
}

std::string selector_for(const html::Node& el) {
    if (auto id = el.attribute("id")) {
        std::string_view v = trim_ascii(*id);
        bool simple = !v.empty() && std::all_of(v.begin(), v.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
        });
        if (simple) return fmt::format("{}#{}", el.tag, v);
    }
    if (el.parent == nullptr) return el.tag;
    std::size_t same = 0;
    std::size_t position = 0;
    for (const auto& sibling : el.parent->children) {
        if (!sibling->is_element() || sibling->tag != el.tag) continue;
        ++same;
        if (sibling.get() == &el) position = same;
    }
    if (same > 1) return fmt::format("{}:nth-of-type({})", el.tag, position);
    return el.tag;
}

std::vector<std::string> attribute_texts(const html::Node& el) {
    std::vector<std::string> out;
    auto add = [&](std::string_view name) {
        if (auto v = el.attribute(name)) {
            std::string s(*v);
            if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
        }
    };
    if (el.tag == "img" || el.tag == "area" || el.tag == "input") add("alt");
    add("aria-label");
    if (el.tag == "input" || el.tag == "textarea") add("placeholder");
    if (el.tag == "input") {
        if (auto type = el.attribute("type")) {
            std::string t = ascii_lower(trim_ascii(*type));
            if (t == "button" || t == "submit" || t == "reset") add("value");
        }
    }
    add("title");
    return out;
}

class Segmenter {
public:
    Segmenter(const PageSource& page, const SegmentationRules& rules) : page_(page), rules_(rules) {}

    std::vector<TextSegment> run(const html::Node& root) {
        block_paths_.push_back("");
        for (const auto& child : root.children) walk(*child, "");
        flush();
        return std::move(segments_);
    }

private:
    struct PendingAttribute {
        std::string text;
        std::string dom_path;
    };

    void walk(const html::Node& node, const std::string& parent_path) {
        if (node.is_text()) {
            if (run_.find_first_not_of(" \t\r\n\f") == std::string::npos) run_path_ = block_paths_.back();
            run_ += node.text;
            return;
        }
        if (kExcluded.count(node.tag) || is_hidden(node)) return;

        std::string path = parent_path.empty() ? selector_for(node) : parent_path + " > " + selector_for(node);
        const bool block = kBlock.count(node.tag) != 0;
        if (block) {
            flush();
            block_paths_.push_back(path);
        }
        for (const auto& child : node.children) walk(*child, path);

        if (rules_.include_attribute_text) {
            for (auto& text : attribute_texts(node)) pending_.push_back({std::move(text), path});
        }
        if (block) {
            flush();
            block_paths_.pop_back();
        }
    }

    void emit(std::string_view raw, const std::string& dom_path) {
        std::string text = normalize_text(raw);
        if (text.empty() || codepoint_count(text) < rules_.min_chars || !has_letter(text)) return;
        TextSegment seg;
        seg.order_index = segments_.size();
        seg.page_url = page_.url;
        seg.dom_path = dom_path.empty() ? std::string("#document") : dom_path;
        seg.segment_id = fmt::format(
            "{:016x}", fnv1a64(fmt::format("{}\x1f{}\x1f{}", page_.url, seg.order_index, text)));
        seg.text = std::move(text);
        segments_.push_back(std::move(seg));
    }

    void flush() {
        if (!run_.empty()) emit(run_, run_path_);
        run_.clear();
        for (const auto& attr : pending_) emit(attr.text, attr.dom_path);
        pending_.clear();
    }

    const PageSource& page_;
    const SegmentationRules& rules_;
    std::vector<TextSegment> segments_;
    std::vector<std::string> block_paths_;
    std::vector<PendingAttribute> pending_;
    std::string run_;
    std::string run_path_;
};

}  // namespace

std::vector<TextSegment> extract_segments(const PageSource& page, const SegmentationRules& rules) {
    if (trim_ascii(page.html).empty()) throw ParseFailure("empty html document: " + page.url);
    html::Document doc = html::parse(page.html);
    return Segmenter(page, rules).run(*doc);
}

PageSource load_page_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileUnreadable("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    PageSource page;
    page.url = path.generic_string();
    page.html = decode_body(buf.str(), "");
    page.fetched_at = std::chrono::system_clock::now();
    page.origin = PageOrigin::File;
    return page;
}

std::vector<CorpusSite> list_corpus(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw FileUnreadable("not a corpus directory: " + root.string());
    std::vector<CorpusSite> sites;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        CorpusSite site;
        site.site_id = entry.path().filename().string();
        for (const auto& page : fs::directory_iterator(entry.path())) {
            auto ext = ascii_lower(page.path().extension().string());
            if (page.is_regular_file() && (ext == ".html" || ext == ".htm")) site.pages.push_back(page.path());
        }
        std::sort(site.pages.begin(), site.pages.end());
        if (!site.pages.empty()) sites.push_back(std::move(site));
    }
    std::sort(sites.begin(), sites.end(),
              [](const CorpusSite& a, const CorpusSite& b) { return a.site_id < b.site_id; });
    return sites;
}

}  // namespace darkscan
