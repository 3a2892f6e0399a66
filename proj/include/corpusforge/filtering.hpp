// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "corpusforge/corpus.hpp"
#include "corpusforge/errors.hpp"
#include "corpusforge/hashing.hpp"
#include "corpusforge/utf8.hpp"

namespace corpusforge {

/// Document-level quality gates. The numeric defaults follow the published
/// ranges of the web-corpus filtering literature; every value is overridable
/// per run.
struct FilterThresholds {
    std::int64_t min_words = 50;
    std::int64_t max_words = 100000;
    double max_symbol_ratio = 0.10;
    double max_digit_ratio = 0.30;
    double max_dup_line_frac = 0.30;
    double max_dup_para_frac = 0.30;
    std::map<int, double> max_top_ngram_char_frac = {{2, 0.20}, {3, 0.18}, {4, 0.16}};

    void check() const {
        if (min_words >= max_words) throw ConfigError("min_words must be < max_words");
        auto frac = [](double v, const char* name) {
            if (v < 0.0 || v > 1.0)
                throw ConfigError(std::string(name) + " must be in [0,1]");
        };
        frac(max_symbol_ratio, "max_symbol_ratio");
        frac(max_digit_ratio, "max_digit_ratio");
        frac(max_dup_line_frac, "max_dup_line_frac");
        frac(max_dup_para_frac, "max_dup_para_frac");
        for (const auto& [n, v] : max_top_ngram_char_frac) {
            if (n < 1) throw ConfigError("ngram order must be >= 1");
            frac(v, "max_top_ngram_char_frac");
        }
    }
};

enum class RejectReason {
    TooShort,
    TooLong,
    SymbolRatio,
    DigitRatio,
    DupLines,
    DupParagraphs,
    NgramRepetition,
};

inline std::string to_string(RejectReason r) {
    switch (r) {
        case RejectReason::TooShort: return "TooShort";
        case RejectReason::TooLong: return "TooLong";
        case RejectReason::SymbolRatio: return "SymbolRatio";
        case RejectReason::DigitRatio: return "DigitRatio";
        case RejectReason::DupLines: return "DupLines";
        case RejectReason::DupParagraphs: return "DupParagraphs";
        case RejectReason::NgramRepetition: return "NgramRepetition";
    }
    return "TooShort";
}

struct FilterVerdict {
    bool keep = true;
    std::optional<RejectReason> reason;
    std::map<std::string, double> metrics;
};

namespace detail {

// Letters cover ASCII, Latin-1/Latin-Extended, and the full Hebrew block, so
// niqqud marks never count as symbols.
inline bool is_letter_cp(char32_t cp) {
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) return true;
    if (cp >= 0x00C0 && cp <= 0x024F) return true;
    if (utf8::is_hebrew_block(cp)) return true;
    return false;
}

inline bool is_ws_cp(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f';
}

/// Character mass (in codepoints) of duplicated units / total unit mass.
/// Every occurrence of a unit whose text appears more than once counts.
inline double dup_mass_fraction(const std::vector<std::string_view>& units) {
    std::unordered_map<std::uint64_t, int> counts;
    for (const auto u : units) counts[hash_bytes(u)] += 1;
    std::int64_t total = 0, dup = 0;
    for (const auto u : units) {
        const auto mass = static_cast<std::int64_t>(utf8::codepoint_count(u));
        total += mass;
        if (counts[hash_bytes(u)] > 1) dup += mass;
    }
    return total == 0 ? 0.0 : static_cast<double>(dup) / static_cast<double>(total);
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const auto end = nl == std::string_view::npos ? text.size() : nl;
        const auto line = text.substr(start, end - start);
        if (!line.empty()) lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

/// Paragraphs are blocks separated by one or more blank lines.
inline std::vector<std::string_view> split_paragraphs(std::string_view text) {
    std::vector<std::string_view> paras;
    std::size_t start = 0;
    while (start < text.size()) {
        auto sep = text.find("\n\n", start);
        if (sep == std::string_view::npos) sep = text.size();
        auto para = text.substr(start, sep - start);
        while (!para.empty() && para.front() == '\n') para.remove_prefix(1);
        while (!para.empty() && para.back() == '\n') para.remove_suffix(1);
        if (!para.empty()) paras.push_back(para);
        if (sep >= text.size()) break;
        start = sep + 2;
    }
    return paras;
}

inline std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' ||
                                   text[i] == '\r' || text[i] == '\v' || text[i] == '\f'))
            ++i;
        std::size_t j = i;
        while (j < text.size() && !(text[j] == ' ' || text[j] == '\t' || text[j] == '\n' ||
                                    text[j] == '\r' || text[j] == '\v' || text[j] == '\f'))
            ++j;
        if (j > i) words.push_back(text.substr(i, j - i));
        i = j;
    }
    return words;
}

/// Share of non-whitespace character mass claimed by the single most frequent
/// word n-gram. Occurrences overlap, so the raw mass can exceed the document;
/// the fraction is clamped to 1.
inline double top_ngram_char_frac(const std::vector<std::string_view>& words,
                                  std::int64_t non_ws_chars, int n) {
    if (static_cast<int>(words.size()) < n || non_ws_chars == 0) return 0.0;

    std::vector<std::int64_t> word_mass(words.size());
    for (std::size_t i = 0; i < words.size(); ++i)
        word_mass[i] = static_cast<std::int64_t>(utf8::codepoint_count(words[i]));

    struct Best {
        std::int64_t count = 0;
        std::int64_t mass = 0;
    };
    std::unordered_map<std::uint64_t, Best> grams;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= words.size(); ++i) {
        std::uint64_t h = 0x9E3779B97F4A7C15ULL;
        std::int64_t mass = 0;
        for (int k = 0; k < n; ++k) {
            h = mix64(h ^ hash_bytes(words[i + static_cast<std::size_t>(k)]));
            mass += word_mass[i + static_cast<std::size_t>(k)];
        }
        auto& b = grams[h];
        b.count += 1;
        b.mass = mass;
    }
    std::int64_t top = 0;
    for (const auto& [h, b] : grams) top = std::max(top, b.count * b.mass);
    return std::min(1.0, static_cast<double>(top) / static_cast<double>(non_ws_chars));
}

}  // namespace detail

/// Repetition metrics: dup_line_frac, dup_para_frac, and top_{2,3,4}gram_char_frac.
/// All values lie in [0,1]. Throws DataError on empty text.
inline std::map<std::string, double> repetition_metrics(std::string_view text) {
    if (text.empty()) throw DataError("repetition_metrics: empty text");

    std::map<std::string, double> m;
    m["dup_line_frac"] = detail::dup_mass_fraction(detail::split_lines(text));
    m["dup_para_frac"] = detail::dup_mass_fraction(detail::split_paragraphs(text));

    const auto words = detail::split_words(text);
    std::int64_t non_ws = 0;
    for (const auto w : words) non_ws += static_cast<std::int64_t>(utf8::codepoint_count(w));
    for (const int n : {2, 3, 4})
        m["top_" + std::to_string(n) + "gram_char_frac"] =
            detail::top_ngram_char_frac(words, non_ws, n);
    return m;
}

/// Runs the checks in fixed order (length, symbol ratio, digit ratio, then
/// repetition); the first failing check supplies the reason. The metrics map
/// is always fully populated for auditability.
inline FilterVerdict evaluate(const Document& doc, const FilterThresholds& t = {}) {
    t.check();
    FilterVerdict v;

    const std::int64_t words = count_words(doc.text);
    v.metrics["word_count"] = static_cast<double>(words);

    std::int64_t total_cp = 0, symbol_cp = 0, digit_cp = 0;
    std::size_t pos = 0;
    while (pos < doc.text.size()) {
        const auto d = utf8::decode(doc.text, pos);
        ++total_cp;
        if (d.cp >= '0' && d.cp <= '9') ++digit_cp;
        else if (!detail::is_letter_cp(d.cp) && !detail::is_ws_cp(d.cp)) ++symbol_cp;
        pos += static_cast<std::size_t>(d.len);
    }
    const double symbol_ratio =
        total_cp == 0 ? 0.0 : static_cast<double>(symbol_cp) / static_cast<double>(total_cp);
    const double digit_ratio =
        total_cp == 0 ? 0.0 : static_cast<double>(digit_cp) / static_cast<double>(total_cp);
    v.metrics["symbol_ratio"] = symbol_ratio;
    v.metrics["digit_ratio"] = digit_ratio;

    std::map<std::string, double> rep;
    if (!doc.text.empty()) rep = repetition_metrics(doc.text);
    else
        rep = {{"dup_line_frac", 0.0},   {"dup_para_frac", 0.0},
               {"top_2gram_char_frac", 0.0}, {"top_3gram_char_frac", 0.0},
               {"top_4gram_char_frac", 0.0}};
    for (const auto& [k, val] : rep) v.metrics[k] = val;

    auto reject = [&](RejectReason r) {
        if (v.keep) {
            v.keep = false;
            v.reason = r;
        }
    };

    if (words < t.min_words) reject(RejectReason::TooShort);
    if (words > t.max_words) reject(RejectReason::TooLong);
    if (symbol_ratio > t.max_symbol_ratio) reject(RejectReason::SymbolRatio);
    if (digit_ratio > t.max_digit_ratio) reject(RejectReason::DigitRatio);
    if (rep.at("dup_line_frac") > t.max_dup_line_frac) reject(RejectReason::DupLines);
    if (rep.at("dup_para_frac") > t.max_dup_para_frac) reject(RejectReason::DupParagraphs);
    for (const auto& [n, cap] : t.max_top_ngram_char_frac) {
        const auto key = "top_" + std::to_string(n) + "gram_char_frac";
        if (rep.count(key) && rep.at(key) > cap) reject(RejectReason::NgramRepetition);
    }
    return v;
}

inline FilterThresholds thresholds_from_json(const nlohmann::json& j) {
    FilterThresholds t;
    t.min_words = j.value("min_words", t.min_words);
    t.max_words = j.value("max_words", t.max_words);
    t.max_symbol_ratio = j.value("max_symbol_ratio", t.max_symbol_ratio);
    t.max_digit_ratio = j.value("max_digit_ratio", t.max_digit_ratio);
    t.max_dup_line_frac = j.value("max_dup_line_frac", t.max_dup_line_frac);
    t.max_dup_para_frac = j.value("max_dup_para_frac", t.max_dup_para_frac);
    if (j.contains("max_top_ngram_char_frac")) {
        t.max_top_ngram_char_frac.clear();
        for (const auto& [k, val] : j.at("max_top_ngram_char_frac").items())
            t.max_top_ngram_char_frac[std::stoi(k)] = val.get<double>();
    }
    t.check();
    return t;
}

inline nlohmann::json to_json(const FilterThresholds& t) {
    nlohmann::json ngrams = nlohmann::json::object();
    for (const auto& [n, v] : t.max_top_ngram_char_frac) ngrams[std::to_string(n)] = v;
    return {{"min_words", t.min_words},
            {"max_words", t.max_words},
            {"max_symbol_ratio", t.max_symbol_ratio},
            {"max_digit_ratio", t.max_digit_ratio},
            {"max_dup_line_frac", t.max_dup_line_frac},
            {"max_dup_para_frac", t.max_dup_para_frac},
            {"max_top_ngram_char_frac", ngrams}};
}

}  // namespace corpusforge
