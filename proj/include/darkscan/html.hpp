#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace darkscan::html {

struct Node {
    enum class Kind { Element, Text };

    Kind kind = Kind::Element;
    std::string tag;  // lowercase; empty for text nodes and the document root
    std::vector<std::pair<std::string, std::string>> attributes;  // names lowercase, values entity-decoded
    std::string text;  // decoded character data for text nodes
    std::vector<std::unique_ptr<Node>> children;
    Node* parent = nullptr;

    [[nodiscard]] bool is_element() const noexcept { return kind == Kind::Element; }
    [[nodiscard]] bool is_text() const noexcept { return kind == Kind::Text; }
    [[nodiscard]] std::optional<std::string_view> attribute(std::string_view name) const;
    [[nodiscard]] bool has_attribute(std::string_view name) const { return attribute(name).has_value(); }
};

/// Document root: an element node with an empty tag.
using Document = std::unique_ptr<Node>;

// Parses arbitrary (possibly malformed) HTML into a tree. Never throws on
// bad markup: unknown end tags are ignored, unclosed elements are closed at
// end of input, and the usual implied end tags (p, li, dt/dd, option, table
// rows and cells) are applied. Comments, doctypes and processing
// instructions are dropped. Raw-text elements (script, style, textarea,
// title, ...) keep their contents as a single text child.
[[nodiscard]] Document parse(std::string_view html);

/// Decodes named (HTML 4 set plus a few common HTML5 names) and numeric
/// character references. Unknown references are left verbatim.
[[nodiscard]] std::string decode_entities(std::string_view text);

[[nodiscard]] bool is_void_element(std::string_view tag) noexcept;

}  // namespace darkscan::html
