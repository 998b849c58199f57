#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace darkscan {

// robots.txt rules applicable to one user agent. Matching follows RFC 9309:
// groups naming our product token (case-insensitive) win over '*', rules
// from all matching groups are merged, the longest matching pattern decides
// and Allow wins ties. Patterns support '*' and a trailing '$'.
class RobotsRules {
public:
    struct Rule {
        bool allow = false;
        std::string pattern;
    };

    [[nodiscard]] static RobotsRules parse(std::string_view robots_txt, std::string_view user_agent);
    [[nodiscard]] static RobotsRules allow_all() { return {}; }
    [[nodiscard]] static RobotsRules disallow_all();

    /// path is the URL path plus query, starting with '/'.
    [[nodiscard]] bool allowed(std::string_view path) const;

    [[nodiscard]] const std::vector<Rule>& rules() const noexcept { return rules_; }

private:
    std::vector<Rule> rules_;
};

/// Product token of a User-Agent string: "darkscan/1.0 (+url)" -> "darkscan".
[[nodiscard]] std::string product_token(std::string_view user_agent);

/// True if `pattern` (robots syntax) matches a prefix of `path`.
[[nodiscard]] bool robots_pattern_matches(std::string_view pattern, std::string_view path);

}  // namespace darkscan
