#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace darkscan {

enum class PageOrigin { Live, File };

struct PageSource {
    std::string url;  // absolute http(s) URL for Live pages, file path for File pages
    std::string html;  // UTF-8
    std::chrono::system_clock::time_point fetched_at{};
    PageOrigin origin = PageOrigin::File;
};

/// One block-level run of visible text: the unit that gets classified.
struct TextSegment {
    std::string segment_id;  // stable hex digest of (page_url, order_index, text)
    std::string text;
    std::string dom_path;  // "html > body > div:nth-of-type(2) > p"
    std::size_t order_index = 0;
    std::string page_url;

    friend bool operator==(const TextSegment&, const TextSegment&) = default;
};

struct SegmentationRules {
    std::size_t min_chars = 3;  // in code points, after normalization
    bool include_attribute_text = true;  // alt, title, placeholder, aria-label, button values
};

struct FetchConfig {
    std::chrono::milliseconds timeout{15000};
    std::string user_agent = "darkscan/1.0";
    bool respect_robots = true;
    std::size_t max_bytes = 8 * 1024 * 1024;
    // Optional endpoint of an external headless-browser renderer. When set,
    // fetch_page POSTs {"url": ...} to it and takes the response body as the
    // rendered HTML.
    std::optional<std::string> renderer_hook;

    /// Throws InvalidArgument when timeout or max_bytes is not positive.
    void validate() const;
};

/// Fetches an http(s) page. Honors robots.txt when cfg.respect_robots,
/// rejects non-HTML content types and bodies over cfg.max_bytes, and decodes
/// the body to UTF-8 (Content-Type charset, then <meta charset>, then
/// UTF-8 with a Windows-1252 fallback for invalid byte sequences).
/// Throws NetworkError, RobotsDisallowed, NotHtml, TooLarge, InvalidArgument.
[[nodiscard]] PageSource fetch_page(const std::string& url, const FetchConfig& cfg);

/// Reads an .html file. Throws FileUnreadable.
[[nodiscard]] PageSource load_page_file(const std::filesystem::path& path);

/// Converts bytes in the named charset to UTF-8 (iconv). Unknown charsets
/// and invalid UTF-8 fall back to Windows-1252.
[[nodiscard]] std::string decode_body(std::string_view bytes, std::string_view charset);

/// Extracts visible text segments in document order.
///
/// Text inside script, style, noscript, template, head (and title, iframe,
/// svg style blocks) is skipped, as is any element marked hidden via the
/// `hidden` attribute, aria-hidden="true", an inline display:none /
/// visibility:hidden style, or <input type=hidden>. Block-level elements
/// and form controls start a new segment; inline elements do not. Attribute
/// text (alt, title, placeholder, aria-label, button values) becomes its own
/// segment right after the run that contains its element. Runs shorter than
/// rules.min_chars or without any letter are dropped.
///
/// Throws ParseFailure when the html is empty.
[[nodiscard]] std::vector<TextSegment> extract_segments(const PageSource& page,
                                                        const SegmentationRules& rules = {});

/// A site in a corpus directory laid out as corpus/<site>/<page>.html.
struct CorpusSite {
    std::string site_id;
    std::vector<std::filesystem::path> pages;  // sorted
};

/// Lists sites (sorted by name) and their .html/.htm pages. Throws FileUnreadable.
[[nodiscard]] std::vector<CorpusSite> list_corpus(const std::filesystem::path& root);

}  // namespace darkscan
