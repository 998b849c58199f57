#include "darkscan/taxonomy.hpp"

#include "darkscan/error.hpp"

#include <cctype>

namespace darkscan {

namespace {

constexpr std::array<std::string_view, kNumCategories> kDisplayNames = {
    "Forced Action", "Misdirection", "Not Dark Pattern", "Obstruction",
    "Scarcity",      "Sneaking",     "Social Proof",     "Urgency",
};

// Lowercase and drop separators so "Not_Dark pattern" and "notdarkpattern"
// compare equal.
std::string fold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        auto u = static_cast<unsigned char>(ch);
        if (std::isspace(u) || ch == '_' || ch == '-') continue;
        out.push_back(static_cast<char>(std::tolower(u)));
    }
    return out;
}

}  // namespace

const std::array<Category, kNumCategories>& canonical_order() noexcept {
    static constexpr std::array<Category, kNumCategories> order = {
        Category::ForcedAction, Category::Misdirection, Category::NotDarkPattern,
        Category::Obstruction,  Category::Scarcity,     Category::Sneaking,
        Category::SocialProof,  Category::Urgency,
    };
    return order;
}

const std::array<Category, kNumCategories - 1>& dark_categories() noexcept {
    static constexpr std::array<Category, kNumCategories - 1> dark = {
        Category::ForcedAction, Category::Misdirection, Category::Obstruction,
        Category::Scarcity,     Category::Sneaking,     Category::SocialProof,
        Category::Urgency,
    };
    return dark;
}

std::string_view display_name(Category c) noexcept {
    return kDisplayNames[index_of(c)];
}

Category parse_label(std::string_view raw) {
    const std::string key = fold(raw);
    if (!key.empty()) {
        for (Category c : canonical_order()) {
            if (fold(display_name(c)) == key) return c;
        }
    }
    throw UnknownLabel("unknown category label: '" + std::string(raw) + "'");
}

}  // namespace darkscan
