#include "darkscan/lexicon.hpp"

#include "darkscan/error.hpp"
#include "darkscan/text.hpp"

#include <cctype>
#include <fstream>

namespace darkscan {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::string escape_regex(std::string_view literal) {
    static constexpr std::string_view special = R"(\^$.|?*+()[]{}/)";
    std::string out;
    for (char c : literal) {
        if (special.find(c) != std::string_view::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

// Whitespace in a literal piece matches any whitespace run.
std::string piece_regex(std::string_view piece) {
    std::string out;
    bool in_space = false;
    for (char c : piece) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) out += R"(\s+)";
            in_space = true;
            continue;
        }
        in_space = false;
        out += escape_regex(std::string_view(&c, 1));
    }
    return out;
}

std::regex compile_pattern(const std::string& pattern) {
    std::vector<std::string> pieces;
    std::size_t start = 0;
    while (true) {
        std::size_t star = pattern.find('*', start);
        pieces.emplace_back(trim_ascii(std::string_view(pattern).substr(start, star - start)));
        if (star == std::string::npos) break;
        start = star + 1;
    }
    std::string expr;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i > 0) expr += R"((?:^|\s+)\S+(?:\s+\S+){0,2}(?:\s+|$))";
        expr += piece_regex(pieces[i]);
    }
    const std::string& first = pieces.front();
    const std::string& last = pieces.back();
    const bool single_word = pieces.size() == 1 && first.find(' ') == std::string::npos;
    const bool wildcard = pieces.size() > 1;
    // Word boundaries for single words and at the ends of wildcard patterns.
    if ((single_word || wildcard) && !first.empty() && is_word_char(first.front())) expr = R"(\b)" + expr;
    if ((single_word || wildcard) && !last.empty() && is_word_char(last.back())) expr += R"(\b)";
    return std::regex(expr, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
}

std::string prepare_text(const std::string& text) {
    std::string lowered = to_lower_utf8(text);
    // Typographic apostrophes match ASCII ones in patterns.
    std::string out;
    out.reserve(lowered.size());
    for (std::size_t i = 0; i < lowered.size(); ++i) {
        if (lowered.compare(i, 3, "\xE2\x80\x99") == 0) {
            out.push_back('\'');
            i += 2;
        } else {
            out.push_back(lowered[i]);
        }
    }
    return out;
}

}  // namespace

LexiconPattern::LexiconPattern(std::string pattern, double weight)
    : pattern_(to_lower_utf8(trim_ascii(pattern))), weight_(weight) {
    if (pattern_.empty() || pattern_ == "*") throw InvalidArgument("empty lexicon pattern");
    if (!(weight_ > 0.0)) throw InvalidArgument("lexicon weight must be positive: " + pattern_);
    matcher_ = compile_pattern(pattern_);
}

bool LexiconPattern::found_in(const std::string& lowered_text) const {
    return std::regex_search(lowered_text, matcher_);
}

void Lexicon::validate() const {
    if (!(temperature > 0.0)) throw InvalidArgument("lexicon temperature must be positive");
    if (!std::isfinite(bias)) throw InvalidArgument("lexicon bias must be finite");
    for (Category c : dark_categories()) {
        if (of(c).empty())
            throw InvalidArgument("lexicon has no patterns for " + std::string(display_name(c)));
    }
    for (const auto& list : patterns) {
        for (const auto& p : list) {
            if (!(p.weight() > 0.0)) throw InvalidArgument("lexicon weight must be positive: " + p.pattern());
        }
    }
}

const Lexicon& default_lexicon() {
    static const Lexicon lex = [] {
        Lexicon l;
        auto add = [&](Category c, std::initializer_list<std::pair<const char*, double>> entries) {
            for (const auto& [pattern, weight] : entries) l.patterns[index_of(c)].emplace_back(pattern, weight);
        };
        add(Category::Scarcity, {
            {"only * left", 3.0},       {"left in stock", 2.5},      {"low stock", 3.0},
            {"limited stock", 3.0},     {"selling fast", 3.0},       {"almost gone", 3.0},
            {"few left", 3.0},          {"high demand", 2.5},        {"limited quantity", 3.0},
            {"limited quantities", 3.0}, {"limited supply", 3.0},    {"while supplies last", 3.0},
            {"last one", 2.5},          {"running out", 2.5},        {"only a few", 2.5},
            {"items left", 2.5},        {"in stock soon", 1.0},      {"sold out soon", 3.0},
            {"remaining in stock", 3.0}, {"stock is limited", 3.0},
        });
        add(Category::Urgency, {
            {"hurry", 1.5},             {"ends soon", 3.0},          {"ends in", 3.0},
            {"ends tonight", 3.0},      {"ends today", 3.0},         {"limited time", 3.0},
            {"last chance", 3.0},       {"today only", 3.0},         {"offer expires", 3.0},
            {"expires in", 3.0},        {"deal ends", 3.0},          {"countdown", 2.5},
            {"act now", 3.0},           {"before it's gone", 2.5},   {"sale ends", 3.0},
            {"hours left", 3.0},        {"minutes left", 3.0},       {"time is running out", 3.5},
            {"flash sale", 2.5},        {"order within", 3.0},       {"for the next", 2.0},
            {"don't wait", 2.5},        {"expiring", 2.5},
        });
        add(Category::SocialProof, {
            {"people are viewing", 3.5}, {"people are looking", 3.5}, {"bought in the last", 3.5},
            {"customers bought", 3.0},  {"people bought", 3.5},      {"viewing this", 3.0},
            {"just bought", 3.5},       {"just purchased", 3.5},     {"recently purchased", 3.0},
            {"in their cart", 3.5},     {"in their basket", 3.5},    {"best seller", 2.5},
            {"bestseller", 2.5},        {"trending", 2.0},           {"popular choice", 3.0},
            {"sold in the last", 3.5},  {"people have this", 3.5},   {"shoppers", 2.0},
            {"customers are viewing", 3.5}, {"others are looking", 3.5},
        });
        add(Category::Misdirection, {
            {"no thanks", 3.0},         {"i don't want", 3.0},       {"full price", 2.5},
            {"i'll pass", 3.0},         {"don't like saving", 3.5},  {"regret", 3.5},
            {"subscribe now or", 3.5},  {"or you'll miss", 3.5},     {"you'll miss it", 3.5},
            {"miss out on", 2.5},       {"i prefer", 2.0},           {"i'd rather", 3.0},
            {"i don't care", 3.0},      {"no, i", 2.5},              {"pay more", 2.0},
            {"you'll be sorry", 3.5},
        });
        add(Category::Sneaking, {
            {"added to your cart", 3.5}, {"automatically added", 3.5}, {"protection plan", 3.0},
            {"added to your order", 3.5}, {"has been added", 3.0},     {"hidden fee", 3.5},
            {"service fee", 3.0},        {"handling fee", 3.0},        {"processing fee", 3.0},
            {"auto-renew", 3.5},         {"automatically renew", 3.5}, {"renews automatically", 3.5},
            {"recurring charge", 3.5},   {"billed monthly", 3.0},      {"free trial", 2.5},
            {"pre-selected", 3.0},       {"preselected", 3.0},         {"donation", 2.0},
            {"will be charged", 3.0},    {"insurance", 2.0},
        });
        add(Category::Obstruction, {
            {"call to cancel", 3.5},     {"to cancel, please call", 4.0}, {"cancellation fee", 3.0},
            {"cancel by phone", 3.5},    {"cannot be cancelled", 3.5},    {"cannot be canceled", 3.5},
            {"mail a letter", 3.5},      {"in writing to cancel", 3.5},   {"to unsubscribe", 2.5},
            {"contact customer service to", 3.5}, {"visit a store to", 3.5}, {"cancel in person", 3.5},
            {"non-refundable", 2.5},     {"no refunds", 2.5},             {"to cancel your", 2.5},
        });
        add(Category::ForcedAction, {
            {"create an account to", 3.5}, {"must create an account", 4.0}, {"sign up to continue", 4.0},
            {"register to continue", 4.0}, {"must sign up", 3.5},          {"login required", 3.0},
            {"sign in to view", 3.5},      {"you must agree", 3.5},        {"must accept", 3.0},
            {"download the app to", 3.5},  {"sign up to see", 3.5},        {"enter your email to", 3.0},
            {"required to register", 3.5}, {"account required", 3.5},      {"to continue, you must", 4.0},
            {"sign up", 1.0},              {"install our app", 3.0},
        });
        l.bias = 1.0;
        l.temperature = 0.5;
        l.validate();
        return l;
    }();
    return lex;
}

Lexicon lexicon_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw InvalidArgument("lexicon JSON must be an object");
    Lexicon lex;
    for (const auto& [key, value] : doc.items()) {
        if (key == "bias") {
            lex.bias = value.get<double>();
            continue;
        }
        if (key == "temperature") {
            lex.temperature = value.get<double>();
            continue;
        }
        Category c = parse_label(key);
        if (!value.is_array()) throw InvalidArgument("lexicon entry for '" + key + "' must be an array");
        for (const auto& entry : value) {
            lex.patterns[index_of(c)].emplace_back(entry.at("pattern").get<std::string>(),
                                                   entry.at("weight").get<double>());
        }
    }
    lex.validate();
    return lex;
}

nlohmann::json lexicon_to_json(const Lexicon& lex) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (Category c : canonical_order()) {
        if (lex.of(c).empty()) continue;
        auto& list = doc[std::string(display_name(c))];
        list = nlohmann::ordered_json::array();
        for (const auto& p : lex.of(c)) list.push_back({{"pattern", p.pattern()}, {"weight", p.weight()}});
    }
    doc["bias"] = lex.bias;
    doc["temperature"] = lex.temperature;
    return nlohmann::json::parse(doc.dump());
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileUnreadable("cannot read lexicon " + path.string());
    try {
        return lexicon_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("malformed lexicon " + path.string() + ": " + e.what());
    }
}

std::array<double, kNumCategories> lexical_scores(const std::string& text, const Lexicon& lex) {
    const std::string prepared = prepare_text(text);
    std::array<double, kNumCategories> scores{};
    for (Category c : canonical_order()) {
        double score = c == Category::NotDarkPattern ? lex.bias : 0.0;
        for (const auto& p : lex.of(c)) {
            if (!prepared.empty() && p.found_in(prepared)) score += p.weight();
        }
        scores[index_of(c)] = score;
    }
    return scores;
}

CategoryDistribution lexical_classify(const std::string& text, const Lexicon& lex) {
    const auto scores = lexical_scores(text, lex);
    return softmax(scores, lex.temperature);
}

LexicalBackend::LexicalBackend(Lexicon lex) : lex_(std::move(lex)) {
    lex_.validate();
}

std::vector<CategoryDistribution> LexicalBackend::classify_batch(std::span<const std::string> texts) const {
    std::vector<CategoryDistribution> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(lexical_classify(t, lex_));
    return out;
}

}  // namespace darkscan
