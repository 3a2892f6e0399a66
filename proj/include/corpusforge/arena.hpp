// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "corpusforge/errors.hpp"
#include "corpusforge/union_find.hpp"

namespace corpusforge {

enum class BattleVerdict { AWins, BWins, Tie };

inline std::string to_string(BattleVerdict v) {
    switch (v) {
        case BattleVerdict::AWins: return "a_wins";
        case BattleVerdict::BWins: return "b_wins";
        case BattleVerdict::Tie: return "tie";
    }
    return "tie";
}

inline BattleVerdict parse_verdict(std::string_view s) {
    if (s == "a_wins") return BattleVerdict::AWins;
    if (s == "b_wins") return BattleVerdict::BWins;
    if (s == "tie") return BattleVerdict::Tie;
    throw DataError("unknown verdict: '" + std::string(s) + "'");
}

/// One pairwise forced-choice vote, optionally with per-dimension labels
/// (Relevance, Completeness, Factuality, LanguageQuality).
struct Battle {
    std::string battle_id;
    std::string prompt_id;
    std::string model_a;
    std::string model_b;
    BattleVerdict verdict = BattleVerdict::Tie;
    std::string annotator_id;
    std::map<std::string, BattleVerdict> dimensions;

    void check() const {
        if (model_a == model_b)
            throw DataError("battle '" + battle_id + "': model_a equals model_b");
    }
};

struct StandingsRow {
    std::string model;
    std::int64_t battles = 0;
    std::int64_t wins = 0;
    std::int64_t ties = 0;
    std::int64_t losses = 0;

    // Percentages are derived, never stored.
    double win_pct() const { return battles == 0 ? 0.0 : 100.0 * double(wins) / double(battles); }
    double tie_pct() const { return battles == 0 ? 0.0 : 100.0 * double(ties) / double(battles); }
    double loss_pct() const {
        return battles == 0 ? 0.0 : 100.0 * double(losses) / double(battles);
    }
};

struct HeadToHead {
    std::string model_a;
    std::string model_b;
    std::int64_t a_wins = 0;
    std::int64_t b_wins = 0;
    std::int64_t ties = 0;
    std::int64_t n = 0;
    bool consistency_flag = true;  // a_wins + b_wins + ties == n

    // Decisive shares exclude ties.
    double decisive_a_pct() const {
        const auto d = a_wins + b_wins;
        return d == 0 ? 0.0 : 100.0 * double(a_wins) / double(d);
    }
    double decisive_b_pct() const {
        const auto d = a_wins + b_wins;
        return d == 0 ? 0.0 : 100.0 * double(b_wins) / double(d);
    }

    /// For externally reported counts, n comes from the source and may
    /// disagree with the components; the flag records that, nothing is fixed.
    static HeadToHead from_counts(std::string a, std::string b, std::int64_t a_wins,
                                  std::int64_t b_wins, std::int64_t ties, std::int64_t n) {
        HeadToHead h;
        h.model_a = std::move(a);
        h.model_b = std::move(b);
        h.a_wins = a_wins;
        h.b_wins = b_wins;
        h.ties = ties;
        h.n = n;
        h.consistency_flag = (a_wins + b_wins + ties == n);
        return h;
    }
};

/// One tally row per model, each battle contributing one outcome to each
/// participant. Sorted by win share descending (model name breaks ties).
inline std::vector<StandingsRow> standings(const std::vector<Battle>& battles) {
    std::map<std::string, StandingsRow> rows;
    for (const auto& b : battles) {
        b.check();
        auto& ra = rows[b.model_a];
        auto& rb = rows[b.model_b];
        ra.model = b.model_a;
        rb.model = b.model_b;
        ++ra.battles;
        ++rb.battles;
        switch (b.verdict) {
            case BattleVerdict::AWins: ++ra.wins, ++rb.losses; break;
            case BattleVerdict::BWins: ++ra.losses, ++rb.wins; break;
            case BattleVerdict::Tie: ++ra.ties, ++rb.ties; break;
        }
    }
    std::vector<StandingsRow> out;
    out.reserve(rows.size());
    for (auto& [model, row] : rows) out.push_back(row);
    std::sort(out.begin(), out.end(), [](const StandingsRow& a, const StandingsRow& b) {
        if (a.win_pct() != b.win_pct()) return a.win_pct() > b.win_pct();
        return a.model < b.model;
    });
    return out;
}

inline HeadToHead head_to_head(const std::vector<Battle>& battles, const std::string& a,
                               const std::string& b) {
    HeadToHead h;
    h.model_a = a;
    h.model_b = b;
    for (const auto& battle : battles) {
        int orient = 0;  // +1: (a,b) as given, -1: swapped
        if (battle.model_a == a && battle.model_b == b) orient = 1;
        else if (battle.model_a == b && battle.model_b == a) orient = -1;
        else continue;
        ++h.n;
        switch (battle.verdict) {
            case BattleVerdict::AWins: (orient > 0 ? h.a_wins : h.b_wins) += 1; break;
            case BattleVerdict::BWins: (orient > 0 ? h.b_wins : h.a_wins) += 1; break;
            case BattleVerdict::Tie: ++h.ties; break;
        }
    }
    h.consistency_flag = (h.a_wins + h.b_wins + h.ties == h.n);
    return h;
}

enum class TiePolicy { Drop, Half };

/// Decisive win counts per unordered model pair, after tie policy.
struct PairRecord {
    std::string a;
    std::string b;
    double a_wins = 0.0;
    double b_wins = 0.0;
};

namespace detail {

inline std::vector<PairRecord> pair_records(const std::vector<Battle>& battles,
                                            TiePolicy policy) {
    std::map<std::pair<std::string, std::string>, PairRecord> recs;
    for (const auto& battle : battles) {
        battle.check();
        const bool flip = battle.model_b < battle.model_a;
        const std::string& lo = flip ? battle.model_b : battle.model_a;
        const std::string& hi = flip ? battle.model_a : battle.model_b;
        auto& rec = recs[{lo, hi}];
        rec.a = lo;
        rec.b = hi;
        double a_add = 0.0, b_add = 0.0;
        switch (battle.verdict) {
            case BattleVerdict::AWins: (flip ? b_add : a_add) = 1.0; break;
            case BattleVerdict::BWins: (flip ? a_add : b_add) = 1.0; break;
            case BattleVerdict::Tie:
                if (policy == TiePolicy::Half) a_add = b_add = 0.5;
                break;
        }
        rec.a_wins += a_add;
        rec.b_wins += b_add;
    }
    std::vector<PairRecord> out;
    for (auto& [key, rec] : recs) out.push_back(rec);
    return out;
}

}  // namespace detail

/// Maximum-likelihood Bradley-Terry log-strengths from decisive pair records,
/// via the classic minorization-maximization fixed point:
///   s_i <- W_i / sum_j n_ij / (s_i + s_j)
/// iterated until the largest log-strength change is at most `tol`.
/// Strengths are normalized to sum to zero (the model is shift-invariant, so
/// only differences are identified). Requires a connected comparison graph and
/// at least one decisive outcome for every model.
inline std::map<std::string, double> bt_fit_records(const std::vector<PairRecord>& records,
                                                    double tol = 1e-8,
                                                    int max_iterations = 100000) {
    std::map<std::string, std::size_t> index;
    for (const auto& r : records) {
        index.emplace(r.a, index.size());
        index.emplace(r.b, index.size());
    }
    const std::size_t n = index.size();
    if (n < 2) throw DataError("bt_fit: need at least two models");

    std::vector<double> wins(n, 0.0);
    UnionFind uf(n);
    for (const auto& r : records) {
        if (r.a_wins + r.b_wins <= 0.0) continue;
        const auto ia = index[r.a], ib = index[r.b];
        wins[ia] += r.a_wins;
        wins[ib] += r.b_wins;
        uf.unite(ia, ib);
    }
    for (const auto& [model, i] : index) {
        if (wins[i] <= 0.0)
            throw DataError("bt_fit: model '" + model + "' has no decisive wins");
        if (!uf.connected(0, i))
            throw DataError("bt_fit: comparison graph is disconnected at '" + model + "'");
    }

    std::vector<double> s(n, 1.0);
    for (int it = 0; it < max_iterations; ++it) {
        std::vector<double> denom(n, 0.0);
        for (const auto& r : records) {
            const double games = r.a_wins + r.b_wins;
            if (games <= 0.0) continue;
            const auto ia = index[r.a], ib = index[r.b];
            const double d = games / (s[ia] + s[ib]);
            denom[ia] += d;
            denom[ib] += d;
        }
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = wins[i] / denom[i];

        // Fix the gauge: geometric mean 1, i.e. log-strengths sum to zero.
        double log_sum = 0.0;
        for (const double v : next) log_sum += std::log(v);
        const double shift = std::exp(log_sum / static_cast<double>(n));
        for (double& v : next) v /= shift;

        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            delta = std::max(delta, std::abs(std::log(next[i]) - std::log(s[i])));
        s = std::move(next);
        if (delta <= tol) break;
    }

    std::map<std::string, double> out;
    for (const auto& [model, i] : index) out[model] = std::log(s[i]);
    return out;
}

inline std::map<std::string, double> bt_fit(const std::vector<Battle>& battles,
                                            TiePolicy policy = TiePolicy::Drop) {
    return bt_fit_records(detail::pair_records(battles, policy));
}

/// P(i beats j) under fitted log-strengths.
inline double bt_win_probability(double log_strength_i, double log_strength_j) {
    return 1.0 / (1.0 + std::exp(log_strength_j - log_strength_i));
}

namespace detail {

inline double log_choose(std::int64_t n, std::int64_t k) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

/// P(X >= k) for X ~ Binomial(n, 1/2), exact summation.
inline double binom_upper_tail_half(std::int64_t n, std::int64_t k) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    const double log_half_n = double(n) * std::log(0.5);
    double tail = 0.0;
    for (std::int64_t i = k; i <= n; ++i) tail += std::exp(log_choose(n, i) + log_half_n);
    return std::min(1.0, tail);
}

}  // namespace detail

/// Two-sided exact binomial sign test on decisive votes against p = 1/2.
inline double pairwise_test(const HeadToHead& h) {
    const std::int64_t decisive = h.a_wins + h.b_wins;
    if (decisive < 1) throw DataError("pairwise_test: no decisive votes for " + h.model_a +
                                      " vs " + h.model_b);
    const std::int64_t hi = std::max(h.a_wins, h.b_wins);
    return std::min(1.0, 2.0 * detail::binom_upper_tail_half(decisive, hi));
}

/// Holm-Bonferroni step-down adjustment: sort p ascending, adjusted_i =
/// max_{j<=i} (m - j + 1) p_j, clipped to 1. Adjusted values dominate the raw
/// ones and are non-decreasing in the sorted order.
inline std::map<std::string, double> holm(const std::map<std::string, double>& pvals) {
    for (const auto& [key, p] : pvals)
        if (p < 0.0 || p > 1.0) throw ConfigError("holm: p-value outside [0,1] for " + key);

    std::vector<std::pair<std::string, double>> sorted(pvals.begin(), pvals.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });

    const auto m = static_cast<std::int64_t>(sorted.size());
    std::map<std::string, double> adjusted;
    double running_max = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
        const double scaled = double(m - i) * sorted[static_cast<std::size_t>(i)].second;
        running_max = std::max(running_max, scaled);
        adjusted[sorted[static_cast<std::size_t>(i)].first] = std::min(1.0, running_max);
    }
    return adjusted;
}

/// Win/tie/loss counts for one model under one preference dimension.
struct DimensionTally {
    std::int64_t wins = 0;
    std::int64_t ties = 0;
    std::int64_t losses = 0;
};

struct ArenaReport {
    std::string method;
    std::vector<StandingsRow> standings;
    std::vector<HeadToHead> head_to_heads;
    std::map<std::string, double> strengths;       // model -> log-strength
    std::map<std::string, double> pairwise_p;      // "A vs B" -> raw p
    std::map<std::string, double> holm_adjusted;   // "A vs B" -> adjusted p
    std::map<std::string, bool> significant;       // at alpha, after Holm
    // Descriptive only; no per-dimension model is fitted.
    std::map<std::string, std::map<std::string, DimensionTally>> dimension_tallies;
    double alpha = 0.05;

    bool all_consistent() const {
        for (const auto& h : head_to_heads)
            if (!h.consistency_flag) return false;
        return true;
    }
};

inline constexpr const char* kArenaMethodNote =
    "Ranking: Bradley-Terry maximum likelihood over decisive votes. Significance: exact "
    "two-sided binomial sign tests on decisive votes with Holm step-down correction. "
    "Annotator random effects are not modeled.";

namespace detail {

inline std::string pair_key(const std::string& a, const std::string& b) { return a + " vs " + b; }

inline void finish_report(ArenaReport& report) {
    report.method = kArenaMethodNote;
    for (const auto& h : report.head_to_heads) {
        if (h.a_wins + h.b_wins < 1) continue;
        report.pairwise_p[pair_key(h.model_a, h.model_b)] = pairwise_test(h);
    }
    report.holm_adjusted = holm(report.pairwise_p);
    for (const auto& [key, p] : report.holm_adjusted)
        report.significant[key] = p < report.alpha;
}

}  // namespace detail

/// Full analysis from a battle log.
inline ArenaReport analyze(const std::vector<Battle>& battles, double alpha = 0.05,
                           TiePolicy policy = TiePolicy::Drop) {
    ArenaReport report;
    report.alpha = alpha;
    report.standings = standings(battles);

    std::set<std::string> models;
    for (const auto& row : report.standings) models.insert(row.model);
    std::vector<std::string> sorted_models(models.begin(), models.end());
    for (std::size_t i = 0; i < sorted_models.size(); ++i)
        for (std::size_t j = i + 1; j < sorted_models.size(); ++j) {
            auto h = head_to_head(battles, sorted_models[i], sorted_models[j]);
            if (h.n > 0) report.head_to_heads.push_back(std::move(h));
        }

    for (const auto& b : battles) {
        for (const auto& [dim, verdict] : b.dimensions) {
            auto& ta = report.dimension_tallies[dim][b.model_a];
            auto& tb = report.dimension_tallies[dim][b.model_b];
            switch (verdict) {
                case BattleVerdict::AWins: ++ta.wins, ++tb.losses; break;
                case BattleVerdict::BWins: ++tb.wins, ++ta.losses; break;
                case BattleVerdict::Tie: ++ta.ties, ++tb.ties; break;
            }
        }
    }

    report.strengths = bt_fit(battles, policy);
    detail::finish_report(report);
    return report;
}

/// Analysis from externally reported counts (standings rows plus head-to-head
/// tallies). Inconsistent head-to-head rows keep their stated counts and the
/// flag; the Bradley-Terry fit uses the stated decisive counts.
inline ArenaReport analyze_counts(const std::vector<StandingsRow>& rows,
                                  const std::vector<HeadToHead>& h2hs, double alpha = 0.05) {
    ArenaReport report;
    report.alpha = alpha;
    report.standings = rows;
    std::sort(report.standings.begin(), report.standings.end(),
              [](const StandingsRow& a, const StandingsRow& b) {
                  if (a.win_pct() != b.win_pct()) return a.win_pct() > b.win_pct();
                  return a.model < b.model;
              });
    report.head_to_heads = h2hs;
    for (auto& h : report.head_to_heads)
        h.consistency_flag = (h.a_wins + h.b_wins + h.ties == h.n);

    std::vector<PairRecord> records;
    for (const auto& h : report.head_to_heads)
        records.push_back({h.model_a, h.model_b, double(h.a_wins), double(h.b_wins)});
    report.strengths = bt_fit_records(records);
    detail::finish_report(report);
    return report;
}

inline nlohmann::json to_json(const ArenaReport& r) {
    nlohmann::json standings_json = nlohmann::json::array();
    for (const auto& row : r.standings) {
        standings_json.push_back({{"model", row.model},
                                  {"battles", row.battles},
                                  {"wins", row.wins},
                                  {"ties", row.ties},
                                  {"losses", row.losses},
                                  {"win_pct", row.win_pct()},
                                  {"tie_pct", row.tie_pct()},
                                  {"loss_pct", row.loss_pct()}});
    }
    nlohmann::json h2h_json = nlohmann::json::array();
    for (const auto& h : r.head_to_heads) {
        h2h_json.push_back({{"model_a", h.model_a},
                            {"model_b", h.model_b},
                            {"a_wins", h.a_wins},
                            {"b_wins", h.b_wins},
                            {"ties", h.ties},
                            {"n", h.n},
                            {"decisive_a_pct", h.decisive_a_pct()},
                            {"decisive_b_pct", h.decisive_b_pct()},
                            {"consistency_flag", h.consistency_flag}});
    }
    nlohmann::json dims = nlohmann::json::object();
    for (const auto& [dim, models] : r.dimension_tallies) {
        nlohmann::json per_model = nlohmann::json::object();
        for (const auto& [model, t] : models)
            per_model[model] = {{"wins", t.wins}, {"ties", t.ties}, {"losses", t.losses}};
        dims[dim] = per_model;
    }
    return {{"method", r.method},
            {"alpha", r.alpha},
            {"standings", standings_json},
            {"head_to_heads", h2h_json},
            {"strengths", r.strengths},
            {"pairwise_p", r.pairwise_p},
            {"holm_adjusted", r.holm_adjusted},
            {"significant", r.significant},
            {"dimension_tallies", dims},
            {"all_consistent", r.all_consistent()}};
}

namespace detail {

inline std::string fixed1(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(1);
    os << v;
    return os.str();
}

}  // namespace detail

/// Plain-text rendering of the standings and head-to-head tables.
inline std::string render_tables(const ArenaReport& r) {
    std::ostringstream os;
    os << "# " << r.method << "\n\n";
    os << "Model | Battles | Wins | Ties | Losses\n";
    for (const auto& row : r.standings) {
        os << row.model << " | " << row.battles << " | " << row.wins << " ("
           << detail::fixed1(row.win_pct()) << "%) | " << row.ties << " ("
           << detail::fixed1(row.tie_pct()) << "%) | " << row.losses << " ("
           << detail::fixed1(row.loss_pct()) << "%)\n";
    }
    os << "\nMatchup | A wins | B wins | Ties | n | Decisive | Consistent | Holm-adjusted p\n";
    for (const auto& h : r.head_to_heads) {
        const auto key = detail::pair_key(h.model_a, h.model_b);
        os << h.model_a << " vs " << h.model_b << " | " << h.a_wins << " | " << h.b_wins << " | "
           << h.ties << " | " << h.n << " | " << detail::fixed1(h.decisive_a_pct()) << "% / "
           << detail::fixed1(h.decisive_b_pct()) << "% | " << (h.consistency_flag ? "yes" : "NO")
           << " | ";
        if (auto it = r.holm_adjusted.find(key); it != r.holm_adjusted.end())
            os << it->second << (r.significant.at(key) ? " (significant)" : "");
        else
            os << "n/a";
        os << "\n";
    }
    return os.str();
}

inline Battle battle_from_json(const nlohmann::json& j) {
    Battle b;
    b.battle_id = j.value("battle_id", std::string{});
    b.prompt_id = j.value("prompt_id", std::string{});
    b.model_a = j.at("model_a").get<std::string>();
    b.model_b = j.at("model_b").get<std::string>();
    b.verdict = parse_verdict(j.at("verdict").get<std::string>());
    b.annotator_id = j.value("annotator_id", std::string{});
    if (j.contains("dimensions"))
        for (const auto& [dim, v] : j.at("dimensions").items())
            b.dimensions[dim] = parse_verdict(v.get<std::string>());
    b.check();
    return b;
}

}  // namespace corpusforge
