// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "corpusforge/errors.hpp"
#include "corpusforge/utf8.hpp"

namespace corpusforge {

enum class Lang { HE, EN };

enum class Category {
    Web,
    CulturalAcademic,
    LegalGovernment,
    NewsMedia,
    NewsSocialMedia,
    SocialColloquial,
    StemReasoning,
};

inline constexpr Category kAllCategories[] = {
    Category::Web,           Category::CulturalAcademic, Category::LegalGovernment,
    Category::NewsMedia,     Category::NewsSocialMedia,  Category::SocialColloquial,
    Category::StemReasoning,
};

inline std::string to_string(Lang l) { return l == Lang::HE ? "HE" : "EN"; }

inline std::string to_string(Category c) {
    switch (c) {
        case Category::Web: return "Web";
        case Category::CulturalAcademic: return "CulturalAcademic";
        case Category::LegalGovernment: return "LegalGovernment";
        case Category::NewsMedia: return "NewsMedia";
        case Category::NewsSocialMedia: return "NewsSocialMedia";
        case Category::SocialColloquial: return "SocialColloquial";
        case Category::StemReasoning: return "StemReasoning";
    }
    return "Web";
}

inline Lang parse_lang(std::string_view s) {
    if (s == "HE") return Lang::HE;
    if (s == "EN") return Lang::EN;
    throw DataError("unknown lang: '" + std::string(s) + "' (expected HE or EN)");
}

/// Unknown categories are a load-time error: mixture planning is closed over
/// this enum, so there is no silent "other" bucket.
inline Category parse_category(std::string_view s) {
    for (const Category c : kAllCategories)
        if (to_string(c) == s) return c;
    throw DataError("unknown category: '" + std::string(s) + "'");
}

/// A (language, category) cell of the corpus composition tables.
struct CellKey {
    Lang lang;
    Category category;

    auto operator<=>(const CellKey&) const = default;

    std::string str() const { return to_string(lang) + "/" + to_string(category); }

    static CellKey parse(std::string_view s) {
        const auto slash = s.find('/');
        if (slash == std::string_view::npos)
            throw DataError("cell key must look like LANG/Category, got '" + std::string(s) + "'");
        return {parse_lang(s.substr(0, slash)), parse_category(s.substr(slash + 1))};
    }
};

/// One corpus record. Immutable after load; safe to share across threads.
struct Document {
    std::string id;
    std::string text;
    Lang lang = Lang::HE;
    Category category = Category::Web;
    std::string source;
    std::int64_t word_count = 0;
    std::int64_t token_count = 0;
};

/// Byte-ratio token estimator. Divisors are bytes-per-token, applied in
/// 1/1000th fixed-point so counts never depend on float rounding.
struct TokenCounterConfig {
    double en_bytes_per_token = 4.0;
    double he_bytes_per_token = 2.5;
};

/// Number of maximal non-whitespace runs in `text`.
inline std::int64_t count_words(std::string_view text) {
    std::int64_t words = 0;
    bool in_word = false;
    for (const char c : text) {
        const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
        if (ws) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

/// Estimated model tokens for `text`.
///
/// The divisor is picked by script majority: text with more Hebrew-block
/// codepoints than ASCII letters counts as Hebrew. ceil(bytes / divisor) is
/// evaluated in integer milli-units. Throws Utf8Error on invalid input.
inline std::int64_t count_tokens(std::string_view text, const TokenCounterConfig& cfg = {}) {
    if (text.empty()) return 0;

    std::int64_t hebrew = 0, ascii_letters = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto d = utf8::decode(text, pos);
        if (utf8::is_hebrew_block(d.cp)) ++hebrew;
        else if ((d.cp >= 'A' && d.cp <= 'Z') || (d.cp >= 'a' && d.cp <= 'z')) ++ascii_letters;
        pos += static_cast<std::size_t>(d.len);
    }

    const double divisor = hebrew > ascii_letters ? cfg.he_bytes_per_token : cfg.en_bytes_per_token;
    const std::int64_t milli = std::llround(divisor * 1000.0);
    if (milli <= 0) throw ConfigError("token divisor must be positive");
    const std::int64_t bytes = static_cast<std::int64_t>(text.size());
    return (bytes * 1000 + milli - 1) / milli;
}

struct ShardInfo {
    std::string path;
    std::int64_t doc_count = 0;
    std::int64_t token_total = 0;
};

struct CorpusManifest {
    std::vector<ShardInfo> shards;
    std::map<CellKey, std::int64_t> totals;
    std::string created_at;
    std::string pipeline_version;

    std::int64_t grand_total() const {
        std::int64_t sum = 0;
        for (const auto& [cell, tokens] : totals) sum += tokens;
        return sum;
    }

    /// Composition fraction of one cell (cell tokens / grand total).
    double composition(const CellKey& cell) const {
        const std::int64_t total = grand_total();
        if (total == 0) return 0.0;
        const auto it = totals.find(cell);
        return it == totals.end() ? 0.0
                                  : static_cast<double>(it->second) / static_cast<double>(total);
    }
};

/// Per-stage accounting. docs_out + sum(removed_by_reason) must equal docs_in.
struct PipelineStats {
    std::int64_t docs_in = 0;
    std::int64_t docs_out = 0;
    std::map<std::string, std::int64_t> removed_by_reason;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;

    bool balanced() const {
        std::int64_t removed = 0;
        for (const auto& [reason, n] : removed_by_reason) removed += n;
        return docs_out + removed == docs_in;
    }
};

}  // namespace corpusforge
