#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace darkscan {

/// Token vocabulary; a token's id is its zero-based line number in vocab.txt.
class Vocab {
public:
    [[nodiscard]] static Vocab from_file(const std::filesystem::path& path);
    [[nodiscard]] static Vocab from_tokens(std::vector<std::string> tokens);

    [[nodiscard]] std::optional<std::int64_t> id(std::string_view token) const;
    [[nodiscard]] std::size_t size() const noexcept { return tokens_.size(); }
    [[nodiscard]] const std::string& token(std::int64_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int64_t> index_;
};

struct TokenizerConfig {
    std::size_t max_seq_len = 128;
    bool lowercase = true;  // also strips accents, as uncased vocabularies expect
    std::size_t max_chars_per_word = 100;
    std::string cls_token = "[CLS]";
    std::string sep_token = "[SEP]";
    std::string unk_token = "[UNK]";
    std::string pad_token = "[PAD]";
};

/// Fixed-length model input: ids and attention mask, both max_seq_len long.
struct Encoding {
    std::vector<std::int64_t> ids;
    std::vector<std::int64_t> attention_mask;
};

class WordPieceTokenizer {
public:
    /// Throws VocabMissingMarkers if any of the four marker tokens is absent,
    /// InvalidArgument if max_seq_len < 2.
    WordPieceTokenizer(Vocab vocab, TokenizerConfig config);

    /// Text cleanup, optional lowercasing/accent stripping, whitespace and
    /// punctuation splitting (CJK ideographs become single tokens).
    [[nodiscard]] std::vector<std::string> basic_tokenize(std::string_view text) const;

    /// Greedy longest-match-first subwords ("##" continuation prefix). A word
    /// that cannot be fully covered, or is longer than max_chars_per_word,
    /// becomes a single [UNK].
    [[nodiscard]] std::vector<std::int64_t> wordpiece_ids(std::string_view word) const;

    /// [CLS] + subwords (truncated) + [SEP], padded to max_seq_len.
    [[nodiscard]] Encoding encode(std::string_view text) const;

    [[nodiscard]] const Vocab& vocab() const noexcept { return vocab_; }
    [[nodiscard]] const TokenizerConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::int64_t cls_id() const noexcept { return cls_; }
    [[nodiscard]] std::int64_t sep_id() const noexcept { return sep_; }
    [[nodiscard]] std::int64_t unk_id() const noexcept { return unk_; }
    [[nodiscard]] std::int64_t pad_id() const noexcept { return pad_; }

private:
    Vocab vocab_;
    TokenizerConfig config_;
    std::int64_t cls_ = 0, sep_ = 0, unk_ = 0, pad_ = 0;
};

}  // namespace darkscan
