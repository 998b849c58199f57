#include "darkscan/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace darkscan::html {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

const std::unordered_map<std::string_view, std::uint32_t>& entity_table() {
    static const auto table = [] {
        std::unordered_map<std::string_view, std::uint32_t> t;
        // ISO 8859-1 block, U+00A0..U+00FF in order.
        static constexpr std::array<std::string_view, 96> latin1 = {
            "nbsp",   "iexcl",  "cent",   "pound",  "curren", "yen",    "brvbar", "sect",
            "uml",    "copy",   "ordf",   "laquo",  "not",    "shy",    "reg",    "macr",
            "deg",    "plusmn", "sup2",   "sup3",   "acute",  "micro",  "para",   "middot",
            "cedil",  "sup1",   "ordm",   "raquo",  "frac14", "frac12", "frac34", "iquest",
            "Agrave", "Aacute", "Acirc",  "Atilde", "Auml",   "Aring",  "AElig",  "Ccedil",
            "Egrave", "Eacute", "Ecirc",  "Euml",   "Igrave", "Iacute", "Icirc",  "Iuml",
            "ETH",    "Ntilde", "Ograve", "Oacute", "Ocirc",  "Otilde", "Ouml",   "times",
            "Oslash", "Ugrave", "Uacute", "Ucirc",  "Uuml",   "Yacute", "THORN",  "szlig",
            "agrave", "aacute", "acirc",  "atilde", "auml",   "aring",  "aelig",  "ccedil",
            "egrave", "eacute", "ecirc",  "euml",   "igrave", "iacute", "icirc",  "iuml",
            "eth",    "ntilde", "ograve", "oacute", "ocirc",  "otilde", "ouml",   "divide",
            "oslash", "ugrave", "uacute", "ucirc",  "uuml",   "yacute", "thorn",  "yuml",
        };
        for (std::size_t i = 0; i < latin1.size(); ++i) t.emplace(latin1[i], static_cast<std::uint32_t>(0xA0 + i));

        static constexpr std::pair<std::string_view, std::uint32_t> other[] = {
            {"quot", 34},      {"amp", 38},       {"lt", 60},        {"gt", 62},
            {"apos", 39},      {"OElig", 338},    {"oelig", 339},    {"Scaron", 352},
            {"scaron", 353},   {"Yuml", 376},     {"fnof", 402},     {"circ", 710},
            {"tilde", 732},    {"ensp", 8194},    {"emsp", 8195},    {"thinsp", 8201},
            {"zwnj", 8204},    {"zwj", 8205},     {"lrm", 8206},     {"rlm", 8207},
            {"ndash", 8211},   {"mdash", 8212},   {"lsquo", 8216},   {"rsquo", 8217},
            {"sbquo", 8218},   {"ldquo", 8220},   {"rdquo", 8221},   {"bdquo", 8222},
            {"dagger", 8224},  {"Dagger", 8225},  {"bull", 8226},    {"hellip", 8230},
            {"permil", 8240},  {"prime", 8242},   {"Prime", 8243},   {"lsaquo", 8249},
            {"rsaquo", 8250},  {"oline", 8254},   {"frasl", 8260},   {"euro", 8364},
            {"trade", 8482},   {"larr", 8592},    {"uarr", 8593},    {"rarr", 8594},
            {"darr", 8595},    {"harr", 8596},    {"minus", 8722},   {"infin", 8734},
            {"asymp", 8776},   {"ne", 8800},      {"le", 8804},      {"ge", 8805},
            {"starf", 9733},   {"star", 9734},    {"hearts", 9829},  {"check", 10003},
            {"nbhy", 8209},    {"NewLine", 10},   {"Tab", 9},        {"colon", 58},
            {"comma", 44},     {"period", 46},    {"excl", 33},      {"quest", 63},
            {"percnt", 37},    {"dollar", 36},    {"num", 35},       {"lpar", 40},
            {"rpar", 41},      {"ast", 42},       {"plus", 43},      {"sol", 47},
        };
        for (const auto& [name, cp] : other) t.emplace(name, cp);
        return t;
    }();
    return table;
}

// Numeric references in 0x80..0x9F name Windows-1252 characters.
std::uint32_t remap_c1(std::uint32_t cp) {
    static constexpr std::array<std::uint32_t, 32> map = {
        0x20AC, 0x81,   0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021,
        0x02C6, 0x2030, 0x0160, 0x2039, 0x0152, 0x8D,   0x017D, 0x8F,
        0x90,   0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013, 0x2014,
        0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0x9D,   0x017E, 0x0178,
    };
    if (cp >= 0x80 && cp <= 0x9F) return map[cp - 0x80];
    return cp;
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Legacy names browsers accept without a trailing ';'.
bool accepts_without_semicolon(std::string_view name) {
    return name == "amp" || name == "lt" || name == "gt" || name == "quot" || name == "nbsp" ||
           name == "copy" || name == "reg";
}

const std::unordered_set<std::string_view> kVoid = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr", "keygen",
};

const std::unordered_set<std::string_view> kRawText = {
    "script", "style", "xmp", "iframe", "noembed", "noframes", "noscript",
};

const std::unordered_set<std::string_view> kEscapableRawText = {"textarea", "title"};

const std::unordered_set<std::string_view> kClosesP = {
    "address", "article", "aside",  "blockquote", "center", "details", "dialog", "dir",
    "div",     "dl",      "fieldset", "figcaption", "figure", "footer", "form",  "h1",
    "h2",      "h3",      "h4",     "h5",         "h6",     "header",  "hgroup", "hr",
    "main",    "menu",    "nav",    "ol",         "p",      "pre",     "section", "summary",
    "table",   "ul",      "li",     "dd",         "dt",
};

const std::unordered_set<std::string_view> kScopeBoundary = {
    "applet", "caption", "html", "table", "td", "th", "marquee", "object", "template", "button",
};

const std::unordered_set<std::string_view> kHeadContent = {
    "meta", "link", "title", "style", "script", "base", "noscript", "template",
};

bool is_heading(std::string_view t) {
    return t.size() == 2 && t[0] == 'h' && t[1] >= '1' && t[1] <= '6';
}

class TreeBuilder {
public:
    explicit TreeBuilder(std::string_view src) : src_(src) {
        root_ = std::make_unique<Node>();
        stack_.push_back(root_.get());
    }

    Document run() {
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<') {
                if (!consume_markup()) emit_text("<"), ++pos_;
            } else {
                std::size_t next = src_.find('<', pos_);
                if (next == std::string_view::npos) next = src_.size();
                emit_text(decode_entities(src_.substr(pos_, next - pos_)));
                pos_ = next;
            }
        }
        return std::move(root_);
    }

private:
    Node* current() const { return stack_.back(); }

    bool starts_with_ci(std::size_t at, std::string_view what) const {
        if (at + what.size() > src_.size()) return false;
        for (std::size_t i = 0; i < what.size(); ++i) {
            if (std::tolower(static_cast<unsigned char>(src_[at + i])) != what[i]) return false;
        }
        return true;
    }

    // Returns false when '<' does not begin markup (it is then literal text).
    bool consume_markup() {
        if (src_.compare(pos_, 4, "<!--") == 0) {
            std::size_t end = src_.find("-->", pos_ + 4);
            pos_ = end == std::string_view::npos ? src_.size() : end + 3;
            return true;
        }
        if (starts_with_ci(pos_, "<![cdata[")) {
            std::size_t end = src_.find("]]>", pos_ + 9);
            std::size_t stop = end == std::string_view::npos ? src_.size() : end;
            emit_text(std::string(src_.substr(pos_ + 9, stop - pos_ - 9)));
            pos_ = end == std::string_view::npos ? src_.size() : end + 3;
            return true;
        }
        if (pos_ + 1 < src_.size() && (src_[pos_ + 1] == '!' || src_[pos_ + 1] == '?')) {
            std::size_t end = src_.find('>', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
            return true;
        }
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
            if (pos_ + 2 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_ + 2]))) {
                pos_ += 2;
                std::string name = read_tag_name();
                std::size_t end = src_.find('>', pos_);
                pos_ = end == std::string_view::npos ? src_.size() : end + 1;
                handle_end_tag(name);
                return true;
            }
            // "</>" or "</ ..." is a bogus comment.
            std::size_t end = src_.find('>', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
            return true;
        }
        if (pos_ + 1 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
            ++pos_;
            std::string name = read_tag_name();
            bool self_closing = false;
            auto attrs = read_attributes(self_closing);
            handle_start_tag(std::move(name), std::move(attrs), self_closing);
            return true;
        }
        return false;
    }

    std::string read_tag_name() {
        std::string name;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '/' || c == '>') break;
            name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            ++pos_;
        }
        return name;
    }

    std::vector<std::pair<std::string, std::string>> read_attributes(bool& self_closing) {
        std::vector<std::pair<std::string, std::string>> attrs;
        while (pos_ < src_.size()) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ >= src_.size()) break;
            char c = src_[pos_];
            if (c == '>') {
                ++pos_;
                break;
            }
            if (c == '/') {
                ++pos_;
                if (pos_ < src_.size() && src_[pos_] == '>') {
                    self_closing = true;
                    ++pos_;
                    break;
                }
                continue;
            }
            std::string name;
            while (pos_ < src_.size()) {
                char d = src_[pos_];
                if (std::isspace(static_cast<unsigned char>(d)) || d == '/' || d == '>' ||
                    (d == '=' && !name.empty()))
                    break;
                name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(d))));
                ++pos_;
            }
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            std::string value;
            if (pos_ < src_.size() && src_[pos_] == '=') {
                ++pos_;
                while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
                    char quote = src_[pos_++];
                    std::size_t end = src_.find(quote, pos_);
                    if (end == std::string_view::npos) end = src_.size();
                    value = decode_entities(src_.substr(pos_, end - pos_));
                    pos_ = std::min(end + 1, src_.size());
                } else {
                    std::size_t start = pos_;
                    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
                           src_[pos_] != '>')
                        ++pos_;
                    value = decode_entities(src_.substr(start, pos_ - start));
                }
            }
            if (name.empty()) continue;
            bool duplicate = std::any_of(attrs.begin(), attrs.end(),
                                         [&](const auto& a) { return a.first == name; });
            if (!duplicate) attrs.emplace_back(std::move(name), std::move(value));
        }
        return attrs;
    }

    bool in_foreign_content() const {
        return std::any_of(stack_.begin(), stack_.end(),
                           [](const Node* n) { return n->tag == "svg" || n->tag == "math"; });
    }

    long find_open(std::string_view tag, const std::unordered_set<std::string_view>& stop) const {
        for (long i = static_cast<long>(stack_.size()) - 1; i > 0; --i) {
            if (stack_[i]->tag == tag) return i;
            if (stop.count(stack_[i]->tag)) return -1;
        }
        return -1;
    }

    void pop_through(long index) {
        if (index > 0) stack_.resize(static_cast<std::size_t>(index));
    }

    void close_if_open(std::string_view tag, const std::unordered_set<std::string_view>& stop) {
        pop_through(find_open(tag, stop));
    }

    void apply_implied_end_tags(std::string_view tag) {
        static const std::unordered_set<std::string_view> list_stop = {"ul", "ol", "menu", "table", "td", "th", "html"};
        static const std::unordered_set<std::string_view> dl_stop = {"dl", "table", "td", "th", "html"};
        static const std::unordered_set<std::string_view> row_stop = {"table", "html"};
        static const std::unordered_set<std::string_view> cell_stop = {"tr", "table", "html"};
        static const std::unordered_set<std::string_view> select_stop = {"select", "datalist", "html"};

        if (kClosesP.count(tag)) close_if_open("p", kScopeBoundary);
        if (tag == "li") close_if_open("li", list_stop);
        if (tag == "dt" || tag == "dd") {
            close_if_open("dt", dl_stop);
            close_if_open("dd", dl_stop);
        }
        if (tag == "option" || tag == "optgroup") {
            close_if_open("option", select_stop);
            if (tag == "optgroup") close_if_open("optgroup", select_stop);
        }
        if (tag == "tr" || tag == "thead" || tag == "tbody" || tag == "tfoot") {
            close_if_open("td", cell_stop);
            close_if_open("th", cell_stop);
            close_if_open("tr", row_stop);
            if (tag != "tr") {
                close_if_open("thead", row_stop);
                close_if_open("tbody", row_stop);
                close_if_open("tfoot", row_stop);
            }
        }
        if (tag == "td" || tag == "th") {
            close_if_open("td", cell_stop);
            close_if_open("th", cell_stop);
        }
        if (is_heading(tag) && is_heading(current()->tag)) stack_.pop_back();
    }

    void leave_head_if_needed(std::string_view tag) {
        long head = find_open("head", {});
        if (head > 0 && !kHeadContent.count(tag)) pop_through(head);
    }

    void handle_start_tag(std::string name, std::vector<std::pair<std::string, std::string>> attrs,
                          bool self_closing) {
        if (name == "html" || name == "head" || name == "body") {
            if (find_open(name, {}) > 0) return;  // duplicate structural tag
        }
        if (name == "body") close_if_open("head", {});
        else leave_head_if_needed(name);

        apply_implied_end_tags(name);

        auto node = std::make_unique<Node>();
        node->tag = name;
        node->attributes = std::move(attrs);
        node->parent = current();
        Node* raw = node.get();
        current()->children.push_back(std::move(node));

        if (is_void_element(name) || (self_closing && in_foreign_content())) return;

        if (kRawText.count(name) || kEscapableRawText.count(name)) {
            std::size_t end = pos_;
            while (true) {
                end = src_.find("</", end);
                if (end == std::string_view::npos || starts_with_ci(end + 2, name)) break;
                end += 2;
            }
            std::size_t stop = end == std::string_view::npos ? src_.size() : end;
            std::string_view content = src_.substr(pos_, stop - pos_);
            if (!content.empty()) {
                auto text = std::make_unique<Node>();
                text->kind = Node::Kind::Text;
                text->text = kEscapableRawText.count(name) ? decode_entities(content) : std::string(content);
                text->parent = raw;
                raw->children.push_back(std::move(text));
            }
            if (end == std::string_view::npos) {
                pos_ = src_.size();
            } else {
                std::size_t gt = src_.find('>', end);
                pos_ = gt == std::string_view::npos ? src_.size() : gt + 1;
            }
            return;
        }
        stack_.push_back(raw);
    }

    void handle_end_tag(const std::string& name) {
        if (name == "br") {
            handle_start_tag("br", {}, false);
            return;
        }
        long index = find_open(name, {});
        pop_through(index);
    }

    void emit_text(std::string text) {
        if (text.empty()) return;
        bool whitespace_only = std::all_of(text.begin(), text.end(),
                                           [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        if (!whitespace_only) leave_head_if_needed("#text");

        Node* parent = current();
        if (!parent->children.empty() && parent->children.back()->is_text()) {
            parent->children.back()->text += text;
            return;
        }
        auto node = std::make_unique<Node>();
        node->kind = Node::Kind::Text;
        node->text = std::move(text);
        node->parent = parent;
        parent->children.push_back(std::move(node));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Document root_;
    std::vector<Node*> stack_;
};

}  // namespace

std::optional<std::string_view> Node::attribute(std::string_view name) const {
    for (const auto& [key, value] : attributes) {
        if (key == name) return std::string_view(value);
    }
    return std::nullopt;
}

bool is_void_element(std::string_view tag) noexcept {
    return kVoid.count(tag) != 0;
}

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c != '&') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        if (j < text.size() && text[j] == '#') {
            ++j;
            bool hex = j < text.size() && (text[j] == 'x' || text[j] == 'X');
            if (hex) ++j;
            std::size_t digits_start = j;
            std::uint32_t cp = 0;
            while (j < text.size() &&
                   (hex ? std::isxdigit(static_cast<unsigned char>(text[j])) != 0
                        : std::isdigit(static_cast<unsigned char>(text[j])) != 0)) {
                const auto ch = static_cast<unsigned char>(text[j]);
                const std::uint32_t digit = std::isdigit(ch) ? ch - '0' : std::tolower(ch) - 'a' + 10;
                if (cp < 0x110000) cp = cp * (hex ? 16 : 10) + digit;
                ++j;
            }
            if (j == digits_start) {
                out.push_back(c);
                ++i;
                continue;
            }
            if (j < text.size() && text[j] == ';') ++j;
            append_utf8(out, remap_c1(cp));
            i = j;
            continue;
        }
        while (j < text.size() && is_name_char(text[j]) && j - i <= 32) ++j;
        std::string_view name = text.substr(i + 1, j - i - 1);
        const auto& table = entity_table();
        auto it = table.find(name);
        bool terminated = j < text.size() && text[j] == ';';
        if (it != table.end() && (terminated || accepts_without_semicolon(name))) {
            append_utf8(out, it->second);
            i = terminated ? j + 1 : j;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

Document parse(std::string_view html) {
    return TreeBuilder(html).run();
}

}  // namespace darkscan::html
