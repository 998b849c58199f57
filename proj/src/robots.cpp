#include "darkscan/robots.hpp"

#include "darkscan/text.hpp"

namespace darkscan {

std::string product_token(std::string_view user_agent) {
    user_agent = trim_ascii(user_agent);
    std::size_t end = user_agent.find_first_of("/ \t");
    return ascii_lower(user_agent.substr(0, end));
}

bool robots_pattern_matches(std::string_view pattern, std::string_view path) {
    bool anchored = !pattern.empty() && pattern.back() == '$';
    if (anchored) pattern.remove_suffix(1);

    // Backtracking wildcard match; '*' matches any run of characters.
    std::size_t p = 0, s = 0;
    std::size_t star = std::string_view::npos, star_s = 0;
    while (true) {
        if (p == pattern.size()) {
            if (!anchored || s == path.size()) return true;
        } else if (pattern[p] == '*') {
            star = p++;
            star_s = s;
            continue;
        } else if (s < path.size() && pattern[p] == path[s]) {
            ++p;
            ++s;
            continue;
        }
        if (star == std::string_view::npos || star_s >= path.size()) return false;
        p = star + 1;
        s = ++star_s;
    }
}

RobotsRules RobotsRules::disallow_all() {
    RobotsRules r;
    r.rules_.push_back({false, "/"});
    return r;
}

RobotsRules RobotsRules::parse(std::string_view robots_txt, std::string_view user_agent) {
    struct Group {
        std::vector<std::string> agents;
        std::vector<Rule> rules;
    };
    std::vector<Group> groups;
    bool collecting_agents = false;

    std::size_t pos = 0;
    while (pos <= robots_txt.size()) {
        std::size_t eol = robots_txt.find_first_of("\r\n", pos);
        if (eol == std::string_view::npos) eol = robots_txt.size();
        std::string_view line = robots_txt.substr(pos, eol - pos);
        pos = eol + 1;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        std::string key = ascii_lower(trim_ascii(line.substr(0, colon)));
        std::string value(trim_ascii(line.substr(colon + 1)));

        if (key == "user-agent") {
            if (!collecting_agents) groups.emplace_back();
            groups.back().agents.push_back(ascii_lower(value));
            collecting_agents = true;
        } else if (key == "allow" || key == "disallow") {
            collecting_agents = false;
            if (groups.empty()) continue;
            if (value.empty()) continue;  // "Disallow:" with no path imposes nothing
            groups.back().rules.push_back({key == "allow", value});
        } else {
            // sitemap, crawl-delay, ... do not end the agent list for our purposes
        }
    }

    const std::string token = product_token(user_agent);
    RobotsRules out;
    bool matched = false;
    for (const auto& g : groups) {
        for (const auto& agent : g.agents) {
            if (!token.empty() && agent == token) {
                out.rules_.insert(out.rules_.end(), g.rules.begin(), g.rules.end());
                matched = true;
                break;
            }
        }
    }
    if (!matched) {
        for (const auto& g : groups) {
            for (const auto& agent : g.agents) {
                if (agent == "*") {
                    out.rules_.insert(out.rules_.end(), g.rules.begin(), g.rules.end());
                    break;
                }
            }
        }
    }
    return out;
}

bool RobotsRules::allowed(std::string_view path) const {
    if (path.empty()) path = "/";
    if (path == "/robots.txt") return true;
    long best_len = -1;
    bool best_allow = true;
    for (const auto& rule : rules_) {
        if (!robots_pattern_matches(rule.pattern, path)) continue;
        auto len = static_cast<long>(rule.pattern.size());
        if (len > best_len || (len == best_len && rule.allow)) {
            best_len = len;
            best_allow = rule.allow;
        }
    }
    return best_allow;
}

}  // namespace darkscan
