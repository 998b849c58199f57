#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace darkscan {

/// NFC, every whitespace run (including NBSP and line breaks) collapsed to a
/// single space, trimmed, control characters removed. Invalid UTF-8 is
/// replaced with U+FFFD.
[[nodiscard]] std::string normalize_text(std::string_view raw);

/// Unicode-aware lowercase of UTF-8 text.
[[nodiscard]] std::string to_lower_utf8(std::string_view text);

/// Number of code points in valid UTF-8 (invalid bytes count as one each).
[[nodiscard]] std::size_t codepoint_count(std::string_view text);

/// True if any code point is alphabetic.
[[nodiscard]] bool has_letter(std::string_view text);

/// True if the bytes form valid UTF-8.
[[nodiscard]] bool is_valid_utf8(std::string_view text);

/// Stable 64-bit FNV-1a; used for segment ids.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

[[nodiscard]] std::string ascii_lower(std::string_view s);
[[nodiscard]] std::string_view trim_ascii(std::string_view s);

}  // namespace darkscan
