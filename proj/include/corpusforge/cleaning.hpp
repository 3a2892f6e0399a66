// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "corpusforge/errors.hpp"
#include "corpusforge/utf8.hpp"

namespace corpusforge {

/// Rule-based web-artifact removal. Rules run in the listed order; every rule
/// only deletes bytes. Codepoints inside `preserve_ranges` are never deleted,
/// even when they fall inside a matched span: the Hebrew block (including
/// niqqud and geresh/gershayim) always survives cleaning.
struct CleaningRuleSet {
    struct Rule {
        std::string id;
        bool enabled = true;
    };

    // Fixed application order, version-stamped.
    std::vector<Rule> rules = {
        {"strip_tags", true},      {"strip_urls", true},
        {"strip_emails", true},    {"strip_control", true},
        {"cap_punct_runs", true},  {"drop_boilerplate_lines", true},
    };
    int max_punct_run = 3;
    std::vector<std::string> boilerplate_line_patterns;  // lowercase substrings; default empty
    std::vector<std::pair<char32_t, char32_t>> preserve_ranges = {{0x0590, 0x05FF}};
    std::string version = "cf-clean-1";

    bool enabled(std::string_view id) const {
        for (const auto& r : rules)
            if (r.id == id) return r.enabled;
        return false;
    }

    bool preserved(char32_t cp) const {
        for (const auto& [lo, hi] : preserve_ranges)
            if (cp >= lo && cp <= hi) return true;
        return false;
    }
};

struct CleanOutcome {
    std::string text;
    std::vector<std::pair<std::string, std::int64_t>> applied;
    std::int64_t bytes_removed = 0;
};

namespace detail {

inline bool ascii_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
inline bool ascii_alnum(char c) { return ascii_alpha(c) || (c >= '0' && c <= '9'); }

inline bool ascii_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u) != 0;
}

/// Deletes s[lo, hi) but re-emits any preserved codepoints found inside.
inline void delete_span(std::string_view s, std::size_t lo, std::size_t hi,
                        const CleaningRuleSet& rules, std::string& out) {
    std::size_t pos = lo;
    while (pos < hi) {
        const auto d = utf8::decode(s, pos);
        if (rules.preserved(d.cp)) utf8::append(out, d.cp);
        pos += static_cast<std::size_t>(d.len);
    }
}

/// Angle-bracket element grammar: '<' then letter, '/', '!' or '?', then any
/// run without '<', closed by '>'. Not full HTML parsing on purpose.
inline std::int64_t strip_tags(std::string_view s, const CleaningRuleSet& rules,
                               std::string& out) {
    std::int64_t hits = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<' && i + 1 < s.size() &&
            (ascii_alpha(s[i + 1]) || s[i + 1] == '/' || s[i + 1] == '!' || s[i + 1] == '?')) {
            std::size_t j = i + 1;
            while (j < s.size() && s[j] != '>' && s[j] != '<') ++j;
            if (j < s.size() && s[j] == '>') {
                delete_span(s, i, j + 1, rules, out);
                ++hits;
                i = j + 1;
                continue;
            }
        }
        out.push_back(s[i]);
        ++i;
    }
    return hits;
}

inline bool url_body_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x80 || u <= 0x20 || u == 0x7F) return false;
    return c != '"' && c != '<' && c != '>' && c != '`' && c != '\'';
}

/// scheme://... and www.... spans, ended at whitespace/quotes/non-ASCII and
/// trimmed of trailing prose punctuation.
inline std::int64_t strip_urls(std::string_view s, const CleaningRuleSet& rules,
                               std::string& out) {
    std::int64_t hits = 0;
    std::size_t i = 0;
    std::size_t emitted_from = 0;

    auto flush_until = [&](std::size_t end) {
        out.append(s.substr(emitted_from, end - emitted_from));
        emitted_from = end;
    };

    while (i < s.size()) {
        std::size_t start = std::string_view::npos;
        // scheme://
        if (s[i] == ':' && i + 2 < s.size() && s[i + 1] == '/' && s[i + 2] == '/') {
            std::size_t b = i;
            while (b > emitted_from) {
                const char c = s[b - 1];
                if (ascii_alnum(c) || c == '+' || c == '-' || c == '.') --b;
                else break;
            }
            if (b < i && ascii_alpha(s[b])) start = b;
        }
        // www.
        if (start == std::string_view::npos && s[i] == 'w' && s.substr(i).starts_with("www.") &&
            i + 4 < s.size() && url_body_char(s[i + 4]) &&
            (i == emitted_from || !url_body_char(s[i - 1]))) {
            start = i;
        }

        if (start != std::string_view::npos) {
            std::size_t end = i;
            while (end < s.size() && url_body_char(s[end])) ++end;
            while (end > start) {
                const char t = s[end - 1];
                if (t == '.' || t == ',' || t == ';' || t == ':' || t == '!' || t == '?' ||
                    t == ')' || t == '\'' || t == '"')
                    --end;
                else
                    break;
            }
            if (end > start + 4) {  // shortest credible match, e.g. "a://b"
                flush_until(start);
                delete_span(s, start, end, rules, out);
                emitted_from = end;
                i = end;
                ++hits;
                continue;
            }
        }
        ++i;
    }
    flush_until(s.size());
    return hits;
}

inline bool email_local_char(char c) {
    return ascii_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}
inline bool email_domain_char(char c) { return ascii_alnum(c) || c == '.' || c == '-'; }

inline std::int64_t strip_emails(std::string_view s, const CleaningRuleSet& rules,
                                 std::string& out) {
    std::int64_t hits = 0;
    std::size_t i = 0;
    std::size_t emitted_from = 0;

    while (i < s.size()) {
        if (s[i] == '@') {
            std::size_t lo = i;
            while (lo > emitted_from && email_local_char(s[lo - 1])) --lo;
            std::size_t hi = i + 1;
            while (hi < s.size() && email_domain_char(s[hi])) ++hi;
            // Domain must end in an alphabetic TLD of length >= 2.
            std::size_t end = hi;
            while (end > i + 1 && !ascii_alpha(s[end - 1])) --end;
            std::size_t tld = end;
            while (tld > i + 1 && ascii_alpha(s[tld - 1])) --tld;
            const bool has_tld = tld > i + 1 && s[tld - 1] == '.' && end - tld >= 2;
            if (lo < i && has_tld) {
                out.append(s.substr(emitted_from, lo - emitted_from));
                delete_span(s, lo, end, rules, out);
                emitted_from = end;
                i = end;
                ++hits;
                continue;
            }
        }
        ++i;
    }
    out.append(s.substr(emitted_from));
    return hits;
}

/// C0 controls except \n and \t, DEL, and C1 (U+0080-U+009F).
inline std::int64_t strip_control(std::string_view s, const CleaningRuleSet& rules,
                                  std::string& out) {
    std::int64_t hits = 0;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto d = utf8::decode(s, pos);
        const bool c0 = d.cp < 0x20 && d.cp != '\n' && d.cp != '\t';
        const bool c1 = d.cp >= 0x80 && d.cp <= 0x9F;
        if ((c0 || d.cp == 0x7F || c1) && !rules.preserved(d.cp)) {
            ++hits;
        } else {
            utf8::append(out, d.cp);
        }
        pos += static_cast<std::size_t>(d.len);
    }
    return hits;
}

/// Runs of the same ASCII punctuation codepoint capped at max_punct_run.
inline std::int64_t cap_punct_runs(std::string_view s, const CleaningRuleSet& rules,
                                   std::string& out) {
    std::int64_t hits = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        if (ascii_punct(s[i])) {
            const char c = s[i];
            std::size_t j = i;
            while (j < s.size() && s[j] == c) ++j;
            const auto run = j - i;
            const auto keep = std::min<std::size_t>(run, static_cast<std::size_t>(
                                                             std::max(rules.max_punct_run, 0)));
            out.append(keep, c);
            if (run > keep) ++hits;
            i = j;
        } else {
            out.push_back(s[i]);
            ++i;
        }
    }
    return hits;
}

inline std::string ascii_lower(std::string_view s) {
    std::string r(s);
    for (char& c : r)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return r;
}

inline std::int64_t drop_boilerplate_lines(std::string_view s, const CleaningRuleSet& rules,
                                           std::string& out) {
    if (rules.boilerplate_line_patterns.empty()) {
        out.append(s);
        return 0;
    }
    std::int64_t hits = 0;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t nl = s.find('\n', start);
        const std::size_t end = nl == std::string_view::npos ? s.size() : nl;
        const std::string_view line = s.substr(start, end - start);
        const std::string lower = ascii_lower(line);
        bool drop = false;
        for (const auto& pat : rules.boilerplate_line_patterns) {
            if (!pat.empty() && lower.find(pat) != std::string::npos) {
                drop = true;
                break;
            }
        }
        if (drop) {
            delete_span(s, start, end, rules, out);
            ++hits;
        } else {
            out.append(line);
            if (nl != std::string_view::npos) out.push_back('\n');
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return hits;
}

using RuleFn = std::int64_t (*)(std::string_view, const CleaningRuleSet&, std::string&);

inline RuleFn rule_fn(std::string_view id) {
    if (id == "strip_tags") return &strip_tags;
    if (id == "strip_urls") return &strip_urls;
    if (id == "strip_emails") return &strip_emails;
    if (id == "strip_control") return &strip_control;
    if (id == "cap_punct_runs") return &cap_punct_runs;
    if (id == "drop_boilerplate_lines") return &drop_boilerplate_lines;
    throw ConfigError("unknown cleaning rule: " + std::string(id));
}

}  // namespace detail

/// Applies the rule set until a fixpoint: deletions can juxtapose bytes into a
/// fresh match, and every rule only shrinks the text, so re-running to
/// stability both terminates and makes clean_text idempotent by construction.
inline CleanOutcome clean_text(std::string_view raw, const CleaningRuleSet& rules = {}) {
    CleanOutcome outcome;
    for (const auto& r : rules.rules)
        if (r.enabled) outcome.applied.emplace_back(r.id, 0);

    std::string current(raw);
    for (;;) {
        bool changed = false;
        for (auto& [rule_id, hit_count] : outcome.applied) {
            std::string next;
            next.reserve(current.size());
            const std::int64_t hits = detail::rule_fn(rule_id)(current, rules, next);
            if (next != current) {
                hit_count += hits;
                current = std::move(next);
                changed = true;
            }
        }
        if (!changed) break;
    }

    outcome.bytes_removed =
        static_cast<std::int64_t>(raw.size()) - static_cast<std::int64_t>(current.size());
    outcome.text = std::move(current);
    return outcome;
}

/// Built-in whitespace normalizer: each maximal run of spaces/tabs/CRs/newlines
/// becomes a single space if it holds no newline, else min(newlines, 2)
/// newlines. Idempotent.
inline std::string normalize_whitespace_builtin(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            int newlines = 0;
            std::size_t j = i;
            while (j < text.size() &&
                   (text[j] == ' ' || text[j] == '\t' || text[j] == '\n' || text[j] == '\r')) {
                if (text[j] == '\n') ++newlines;
                ++j;
            }
            if (newlines == 0) out.push_back(' ');
            else out.append(static_cast<std::size_t>(std::min(newlines, 2)), '\n');
            i = j;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

inline nlohmann::json to_json(const CleaningRuleSet& r) {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& rule : r.rules)
        rules.push_back({{"id", rule.id}, {"enabled", rule.enabled}});
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& [lo, hi] : r.preserve_ranges)
        ranges.push_back({static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi)});
    return {{"version", r.version},
            {"rules", rules},
            {"max_punct_run", r.max_punct_run},
            {"boilerplate_line_patterns", r.boilerplate_line_patterns},
            {"preserve_ranges", ranges}};
}

inline CleaningRuleSet cleaning_rules_from_json(const nlohmann::json& j) {
    CleaningRuleSet r;
    if (j.contains("version")) r.version = j.at("version").get<std::string>();
    if (j.contains("rules")) {
        r.rules.clear();
        for (const auto& rule : j.at("rules"))
            r.rules.push_back({rule.at("id").get<std::string>(), rule.value("enabled", true)});
        for (const auto& rule : r.rules) detail::rule_fn(rule.id);  // reject unknown ids
    }
    r.max_punct_run = j.value("max_punct_run", r.max_punct_run);
    if (j.contains("boilerplate_line_patterns"))
        r.boilerplate_line_patterns =
            j.at("boilerplate_line_patterns").get<std::vector<std::string>>();
    if (j.contains("preserve_ranges")) {
        r.preserve_ranges.clear();
        for (const auto& range : j.at("preserve_ranges"))
            r.preserve_ranges.emplace_back(range.at(0).get<std::uint32_t>(),
                                           range.at(1).get<std::uint32_t>());
    }
    // The Hebrew block is always preserved, whatever the config says.
    bool has_hebrew = false;
    for (const auto& [lo, hi] : r.preserve_ranges)
        if (lo <= 0x0590 && hi >= 0x05FF) has_hebrew = true;
    if (!has_hebrew) r.preserve_ranges.emplace_back(0x0590, 0x05FF);
    return r;
}

}  // namespace corpusforge
