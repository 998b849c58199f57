#include "darkscan/wordpiece.hpp"

#include "darkscan/error.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <fstream>

namespace darkscan {

namespace {

bool is_punctuation(UChar32 c) {
    if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126))
        return true;
    return u_ispunct(c) != 0;
}

bool is_cjk(UChar32 c) {
    return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x20000 && c <= 0x2A6DF) ||
           (c >= 0x2A700 && c <= 0x2B73F) || (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B820 && c <= 0x2CEAF) ||
           (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

bool is_whitespace(UChar32 c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || u_charType(c) == U_SPACE_SEPARATOR;
}

bool is_control(UChar32 c) {
    if (c == '\t' || c == '\n' || c == '\r') return false;
    auto type = u_charType(c);
    return type == U_CONTROL_CHAR || type == U_FORMAT_CHAR;
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

}  // namespace

Vocab Vocab::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileUnreadable("cannot read vocabulary " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
    Vocab v;
    v.tokens_ = std::move(tokens);
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.index_.emplace(v.tokens_[i], static_cast<std::int64_t>(i));
    return v;
}

std::optional<std::int64_t> Vocab::id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

WordPieceTokenizer::WordPieceTokenizer(Vocab vocab, TokenizerConfig config)
    : vocab_(std::move(vocab)), config_(std::move(config)) {
    if (config_.max_seq_len < 2) throw InvalidArgument("max_seq_len must leave room for [CLS] and [SEP]");
    auto require = [&](const std::string& token) {
        auto id = vocab_.id(token);
        if (!id) throw VocabMissingMarkers("vocabulary lacks marker token " + token);
        return *id;
    };
    cls_ = require(config_.cls_token);
    sep_ = require(config_.sep_token);
    unk_ = require(config_.unk_token);
    pad_ = require(config_.pad_token);
}

std::vector<std::string> WordPieceTokenizer::basic_tokenize(std::string_view text) const {
    icu::UnicodeString src = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));

    if (config_.lowercase) {
        UErrorCode status = U_ZERO_ERROR;
        const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
        icu::UnicodeString lowered;
        for (int32_t i = 0; i < src.length();) {
            UChar32 c = src.char32At(i);
            i += U16_LENGTH(c);
            lowered.append(u_tolower(c));
        }
        icu::UnicodeString decomposed = U_SUCCESS(status) ? nfd->normalize(lowered, status) : lowered;
        if (U_FAILURE(status)) decomposed = lowered;
        src.remove();
        for (int32_t i = 0; i < decomposed.length();) {
            UChar32 c = decomposed.char32At(i);
            i += U16_LENGTH(c);
            if (u_charType(c) == U_NON_SPACING_MARK) continue;
            src.append(c);
        }
    }

    std::vector<std::string> tokens;
    icu::UnicodeString current;
    auto flush = [&] {
        if (!current.isEmpty()) tokens.push_back(to_utf8(current));
        current.remove();
    };
    for (int32_t i = 0; i < src.length();) {
        UChar32 c = src.char32At(i);
        i += U16_LENGTH(c);
        if (c == 0 || c == 0xFFFD || is_control(c)) continue;
        if (is_whitespace(c)) {
            flush();
        } else if (is_punctuation(c) || is_cjk(c)) {
            flush();
            tokens.push_back(to_utf8(icu::UnicodeString(c)));
        } else {
            current.append(c);
        }
    }
    flush();
    return tokens;
}

std::vector<std::int64_t> WordPieceTokenizer::wordpiece_ids(std::string_view word) const {
    icu::UnicodeString w = icu::UnicodeString::fromUTF8(
        icu::StringPiece(word.data(), static_cast<int32_t>(word.size())));
    if (static_cast<std::size_t>(w.countChar32()) > config_.max_chars_per_word) return {unk_};

    std::vector<std::int64_t> pieces;
    int32_t start = 0;
    const int32_t len = w.length();
    while (start < len) {
        int32_t end = len;
        std::optional<std::int64_t> match;
        while (start < end) {
            icu::UnicodeString sub;
            w.extractBetween(start, end, sub);
            std::string candidate = (start > 0 ? "##" : "") + to_utf8(sub);
            if (auto id = vocab_.id(candidate)) {
                match = id;
                break;
            }
            end = w.moveIndex32(end, -1);
        }
        if (!match) return {unk_};
        pieces.push_back(*match);
        start = end;
    }
    return pieces;
}

Encoding WordPieceTokenizer::encode(std::string_view text) const {
    const std::size_t budget = config_.max_seq_len - 2;
    Encoding enc;
    enc.ids.reserve(config_.max_seq_len);
    enc.ids.push_back(cls_);
    for (const auto& word : basic_tokenize(text)) {
        for (auto id : wordpiece_ids(word)) {
            if (enc.ids.size() - 1 >= budget) break;
            enc.ids.push_back(id);
        }
        if (enc.ids.size() - 1 >= budget) break;
    }
    enc.ids.push_back(sep_);
    enc.attention_mask.assign(enc.ids.size(), 1);
    enc.ids.resize(config_.max_seq_len, pad_);
    enc.attention_mask.resize(config_.max_seq_len, 0);
    return enc;
}

}  // namespace darkscan
