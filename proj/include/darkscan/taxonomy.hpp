#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace darkscan {

/// The eight-way label space. Enumerator values are the canonical
/// (alphabetical) positions and double as array indices everywhere.
enum class Category : std::size_t {
    ForcedAction = 0,
    Misdirection = 1,
    NotDarkPattern = 2,
    Obstruction = 3,
    Scarcity = 4,
    Sneaking = 5,
    SocialProof = 6,
    Urgency = 7,
};

inline constexpr std::size_t kNumCategories = 8;

/// Canonical order; also the argmax tie-break order.
[[nodiscard]] const std::array<Category, kNumCategories>& canonical_order() noexcept;

/// The seven categories that can be flagged (everything except NotDarkPattern).
[[nodiscard]] const std::array<Category, kNumCategories - 1>& dark_categories() noexcept;

[[nodiscard]] constexpr std::size_t index_of(Category c) noexcept {
    return static_cast<std::size_t>(c);
}

[[nodiscard]] constexpr bool is_dark(Category c) noexcept {
    return c != Category::NotDarkPattern;
}

/// Bit-exact display name ("Forced Action", "Not Dark Pattern", ...).
[[nodiscard]] std::string_view display_name(Category c) noexcept;

/// Case-insensitive match against the display names. Surrounding whitespace
/// is ignored and '_' / '-' / ' ' are interchangeable, as is their absence
/// ("NotDarkPattern", "not_dark_pattern").
/// Throws UnknownLabel when nothing matches.
[[nodiscard]] Category parse_label(std::string_view raw);

}  // namespace darkscan
