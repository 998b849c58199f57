#pragma once

#include "darkscan/backend.hpp"
#include "darkscan/distribution.hpp"
#include "darkscan/taxonomy.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <regex>
#include <string>
#include <vector>

namespace darkscan {

/// A case-insensitive keyword or phrase with a positive weight.
///
/// Pattern forms:
///   "hurry"          single word, matched on word boundaries
///   "left in stock"  phrase, matched as a substring
///   "only * left"    '*' stands for one to three whitespace-separated words
class LexiconPattern {
public:
    LexiconPattern(std::string pattern, double weight);

    [[nodiscard]] const std::string& pattern() const noexcept { return pattern_; }
    [[nodiscard]] double weight() const noexcept { return weight_; }
    [[nodiscard]] bool found_in(const std::string& lowered_text) const;

private:
    std::string pattern_;
    double weight_;
    std::regex matcher_;
};

struct Lexicon {
    std::array<std::vector<LexiconPattern>, kNumCategories> patterns;  // canonical index
    double bias = 1.0;  // fixed NotDarkPattern score
    double temperature = 0.5;

    /// Throws InvalidArgument: a dark category without patterns, or a
    /// non-positive weight/temperature.
    void validate() const;

    [[nodiscard]] const std::vector<LexiconPattern>& of(Category c) const { return patterns[index_of(c)]; }
};

/// Built-in English lexicon for the seven dark categories.
[[nodiscard]] const Lexicon& default_lexicon();

/// Parses {"<display name>": [{"pattern": ..., "weight": ...}], "bias": b, "temperature": T}.
/// Missing bias/temperature keep their defaults. Throws InvalidArgument / UnknownLabel.
[[nodiscard]] Lexicon lexicon_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json lexicon_to_json(const Lexicon& lex);
[[nodiscard]] Lexicon load_lexicon(const std::filesystem::path& path);

/// Per-category evidence score before softmax: the summed weights of the
/// category's patterns present in `text`, plus `bias` for NotDarkPattern.
[[nodiscard]] std::array<double, kNumCategories> lexical_scores(const std::string& text, const Lexicon& lex);

[[nodiscard]] CategoryDistribution lexical_classify(const std::string& text, const Lexicon& lex);

class LexicalBackend final : public ClassifierBackend {
public:
    explicit LexicalBackend(Lexicon lex);

    [[nodiscard]] std::string name() const override { return "lexical"; }
    [[nodiscard]] std::vector<CategoryDistribution> classify_batch(std::span<const std::string> texts) const override;
    [[nodiscard]] const Lexicon& lexicon() const noexcept { return lex_; }

private:
    Lexicon lex_;
};

}  // namespace darkscan
