#include "darkscan/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <cctype>
#include <stdexcept>

namespace darkscan {

namespace {

bool is_space_cp(UChar32 c) {
    return u_isUWhiteSpace(c) || c == 0x00A0 || c == 0x2007 || c == 0x202F;
}

// Zero-width characters that carry no visible text.
bool is_invisible_format(UChar32 c) {
    return c == 0x200B || c == 0xFEFF || c == 0x00AD;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
    if (raw.empty()) return {};

    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");

    icu::UnicodeString src = icu::UnicodeString::fromUTF8(
        icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
    icu::UnicodeString normalized = nfc->normalize(src, status);
    if (U_FAILURE(status)) normalized = src;

    icu::UnicodeString collapsed;
    bool pending_space = false;
    for (int32_t i = 0; i < normalized.length();) {
        UChar32 c = normalized.char32At(i);
        i += U16_LENGTH(c);
        if (is_space_cp(c)) {
            pending_space = !collapsed.isEmpty();
            continue;
        }
        if (u_charType(c) == U_CONTROL_CHAR || is_invisible_format(c)) continue;
        if (pending_space) {
            collapsed.append(static_cast<UChar>(' '));
            pending_space = false;
        }
        collapsed.append(c);
    }

    std::string out;
    collapsed.toUTF8String(out);
    return out;
}

std::string to_lower_utf8(std::string_view text) {
    icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString lowered;
    for (int32_t i = 0; i < s.length();) {
        UChar32 c = s.char32At(i);
        i += U16_LENGTH(c);
        lowered.append(u_tolower(c));
    }
    std::string out;
    lowered.toUTF8String(out);
    return out;
}

std::size_t codepoint_count(std::string_view text) {
    std::size_t n = 0;
    int32_t i = 0;
    const auto len = static_cast<int32_t>(text.size());
    const auto* p = reinterpret_cast<const uint8_t*>(text.data());
    while (i < len) {
        UChar32 c;
        U8_NEXT(p, i, len, c);
        ++n;
    }
    return n;
}

bool has_letter(std::string_view text) {
    int32_t i = 0;
    const auto len = static_cast<int32_t>(text.size());
    const auto* p = reinterpret_cast<const uint8_t*>(text.data());
    while (i < len) {
        UChar32 c;
        U8_NEXT(p, i, len, c);
        if (c >= 0 && u_isalpha(c)) return true;
    }
    return false;
}

bool is_valid_utf8(std::string_view text) {
    int32_t i = 0;
    const auto len = static_cast<int32_t>(text.size());
    const auto* p = reinterpret_cast<const uint8_t*>(text.data());
    while (i < len) {
        UChar32 c;
        U8_NEXT(p, i, len, c);
        if (c < 0) return false;
    }
    return true;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

std::string_view trim_ascii(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace darkscan
