// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "corpusforge/corpus.hpp"
#include "corpusforge/errors.hpp"
#include "corpusforge/rng.hpp"

namespace corpusforge {

enum class PhaseId { P1, P2, P3 };

inline std::string to_string(PhaseId p) {
    switch (p) {
        case PhaseId::P1: return "P1";
        case PhaseId::P2: return "P2";
        case PhaseId::P3: return "P3";
    }
    return "P1";
}

inline PhaseId parse_phase_id(std::string_view s) {
    if (s == "P1") return PhaseId::P1;
    if (s == "P2") return PhaseId::P2;
    if (s == "P3") return PhaseId::P3;
    throw ConfigError("unknown phase id: '" + std::string(s) + "'");
}

/// How documents are drawn within a cell: every document equally likely, or
/// with probability proportional to its token mass.
enum class SamplingWeight { Uniform, TokenMass };

/// Curriculum phase targets: a token budget spread over (language, category)
/// cells by weight. min_word_count is the long-document gate (documents must
/// strictly exceed it to qualify).
struct PhaseSpec {
    PhaseId phase_id = PhaseId::P1;
    std::int64_t context_length = 8192;
    std::int64_t token_budget = 0;
    std::map<CellKey, double> targets;
    std::optional<std::int64_t> min_word_count;
    std::uint64_t seed = 0;
    bool epoching_allowed = false;
    SamplingWeight weighting = SamplingWeight::Uniform;

    void check() const {
        if (token_budget <= 0) throw ConfigError("phase spec: token_budget must be > 0");
        if (context_length <= 0) throw ConfigError("phase spec: context_length must be > 0");
        if (targets.empty()) throw ConfigError("phase spec: no target cells");
        double sum = 0.0;
        for (const auto& [cell, w] : targets) {
            if (w < 0.0) throw ConfigError("phase spec: negative weight for " + cell.str());
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("phase spec: target weights sum to " + std::to_string(sum) +
                              ", expected 1.0");
    }
};

/// Per-cell pool measured after the phase's word-count filter.
struct PoolStats {
    std::int64_t tokens = 0;
    std::int64_t docs = 0;
    std::int64_t max_doc_tokens = 0;
};

struct CellPlan {
    double weight = 0.0;
    std::int64_t planned_tokens = 0;
    std::int64_t pool_tokens = 0;
    bool feasible = true;
    double epoch_factor = 1.0;   // >1 when with-replacement epoching is scheduled
    std::int64_t shortfall = 0;  // planned - pool when infeasible
};

struct MixturePlan {
    PhaseId phase_id = PhaseId::P1;
    std::int64_t token_budget = 0;
    std::optional<std::int64_t> min_word_count;
    std::uint64_t seed = 0;
    bool epoching_allowed = false;
    SamplingWeight weighting = SamplingWeight::Uniform;
    std::map<CellKey, CellPlan> cells;

    bool feasible() const {
        for (const auto& [cell, plan] : cells)
            if (!plan.feasible) return false;
        return true;
    }
};

/// Per-cell pool stats for documents passing the word-count gate.
inline std::map<CellKey, PoolStats> pool_stats(const std::vector<Document>& docs,
                                               std::optional<std::int64_t> min_word_count) {
    std::map<CellKey, PoolStats> pools;
    for (const auto& d : docs) {
        if (min_word_count && d.word_count <= *min_word_count) continue;
        auto& p = pools[CellKey{d.lang, d.category}];
        p.tokens += d.token_count;
        p.docs += 1;
        p.max_doc_tokens = std::max(p.max_doc_tokens, d.token_count);
    }
    return pools;
}

namespace detail {

inline std::int64_t round_half_even(double x) {
    // nearbyint under the default FE_TONEAREST mode rounds ties to even.
    return static_cast<std::int64_t>(std::nearbyint(x));
}

}  // namespace detail

/// Allocates the budget across cells: planned = round(weight * budget) with
/// half-to-even ties, then the largest cell absorbs the rounding residual so
/// plans sum exactly to the budget. Cells whose pool cannot cover the plan are
/// marked infeasible (with the shortfall) unless epoching is allowed, in which
/// case the with-replacement epoch factor is recorded.
inline MixturePlan plan(const PhaseSpec& spec, const std::map<CellKey, PoolStats>& pools) {
    spec.check();

    MixturePlan out;
    out.phase_id = spec.phase_id;
    out.token_budget = spec.token_budget;
    out.min_word_count = spec.min_word_count;
    out.seed = spec.seed;
    out.epoching_allowed = spec.epoching_allowed;
    out.weighting = spec.weighting;

    for (const auto& [cell, weight] : spec.targets) {
        if (pools.find(cell) == pools.end())
            throw ConfigError("plan: target cell " + cell.str() + " not present in pool");
        CellPlan cp;
        cp.weight = weight;
        cp.planned_tokens =
            detail::round_half_even(weight * static_cast<double>(spec.token_budget));
        out.cells[cell] = cp;
    }

    std::int64_t planned_sum = 0;
    for (const auto& [cell, cp] : out.cells) planned_sum += cp.planned_tokens;
    const std::int64_t residual = spec.token_budget - planned_sum;
    if (residual != 0) {
        auto largest = out.cells.begin();
        for (auto it = out.cells.begin(); it != out.cells.end(); ++it)
            if (it->second.planned_tokens > largest->second.planned_tokens) largest = it;
        largest->second.planned_tokens += residual;
    }

    for (auto& [cell, cp] : out.cells) {
        const auto& pool = pools.at(cell);
        cp.pool_tokens = pool.tokens;
        if (cp.planned_tokens <= cp.pool_tokens) continue;
        if (spec.epoching_allowed && cp.pool_tokens > 0) {
            cp.epoch_factor = static_cast<double>(cp.planned_tokens) /
                              static_cast<double>(cp.pool_tokens);
        } else {
            cp.feasible = false;
            cp.shortfall = cp.planned_tokens - cp.pool_tokens;
        }
    }
    return out;
}

/// Plan against manifest totals. Valid when the manifest describes a corpus
/// that already satisfies the phase's word-count gate.
inline MixturePlan plan(const PhaseSpec& spec, const CorpusManifest& manifest) {
    std::map<CellKey, PoolStats> pools;
    for (const auto& [cell, tokens] : manifest.totals) pools[cell] = PoolStats{tokens, 0, 0};
    for (const auto& [cell, w] : spec.targets)
        if (pools.find(cell) == pools.end()) pools[cell] = PoolStats{};
    return plan(spec, pools);
}

struct CellSample {
    std::vector<std::string> ids;
    std::int64_t achieved_tokens = 0;
    int epochs = 1;
};

struct SampleResult {
    std::vector<Document> stream;
    std::map<CellKey, CellSample> cells;

    std::map<CellKey, std::int64_t> achieved_tokens() const {
        std::map<CellKey, std::int64_t> m;
        for (const auto& [cell, s] : cells) m[cell] = s.achieved_tokens;
        return m;
    }
};

/// Draws documents per cell (seeded uniform, without replacement within an
/// epoch) until the cell's plan is met or exceeded by at most one document,
/// then interleaves cells by a seeded round-robin proportional to remaining
/// planned tokens. Pure function of (plan, pool contents, seed, excludes).
inline SampleResult sample(const MixturePlan& plan,
                           const std::map<CellKey, std::vector<Document>>& pools,
                           std::uint64_t seed,
                           const std::set<std::string>* exclude = nullptr) {
    SampleResult result;
    std::map<CellKey, std::deque<const Document*>> queues;

    for (const auto& [cell, cp] : plan.cells) {
        CellSample cs;
        if (!cp.feasible)
            throw InfeasiblePlanError("sample: cell " + cell.str() + " is infeasible (short by " +
                                      std::to_string(cp.shortfall) + " tokens)");

        std::vector<const Document*> pool;
        if (auto it = pools.find(cell); it != pools.end()) {
            for (const auto& d : it->second) {
                if (plan.min_word_count && d.word_count <= *plan.min_word_count) continue;
                if (exclude && exclude->count(d.id)) continue;
                pool.push_back(&d);
            }
        }
        std::sort(pool.begin(), pool.end(),
                  [](const Document* a, const Document* b) { return a->id < b->id; });

        Rng rng(mix64(seed ^ hash_bytes(cell.str(), 0x5A4D91EULL)));

        // One epoch's draw order: a uniform shuffle, or (token-mass mode) a
        // weighted without-replacement order via exponential sort keys.
        auto draw_order = [&](std::vector<const Document*> items) {
            if (plan.weighting == SamplingWeight::Uniform) {
                rng.shuffle(items);
                return items;
            }
            std::vector<std::pair<double, const Document*>> keyed;
            keyed.reserve(items.size());
            for (const Document* d : items) {
                const double w = std::max(static_cast<double>(d->token_count), 1e-9);
                const double u = std::max(rng.unit(), 1e-300);
                keyed.emplace_back(-std::log(u) / w, d);
            }
            std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first < b.first;
                return a.second->id < b.second->id;
            });
            for (std::size_t i = 0; i < items.size(); ++i) items[i] = keyed[i].second;
            return items;
        };

        auto& queue = queues[cell];
        if (cp.planned_tokens > 0) {
            std::int64_t pool_total = 0;
            for (const auto* d : pool) pool_total += d->token_count;

            std::vector<const Document*> order = draw_order(pool);
            std::size_t cursor = 0;
            while (cs.achieved_tokens < cp.planned_tokens) {
                if (cursor == order.size()) {
                    if (!plan.epoching_allowed || pool_total <= 0)
                        throw InfeasiblePlanError("sample: cell " + cell.str() +
                                                  " exhausted without epoching");
                    order = draw_order(pool);
                    cursor = 0;
                    ++cs.epochs;
                    continue;
                }
                const Document* d = order[cursor++];
                queue.push_back(d);
                cs.ids.push_back(d->id);
                cs.achieved_tokens += d->token_count;
            }
        }
        result.cells[cell] = std::move(cs);
    }

    // Proportional round-robin over remaining planned tokens.
    std::map<CellKey, std::int64_t> remaining;
    for (const auto& [cell, cp] : plan.cells) remaining[cell] = cp.planned_tokens;
    Rng rng(mix64(seed ^ hash_bytes("interleave", 0x5A4D91EULL)));
    for (;;) {
        std::int64_t total = 0;
        for (const auto& [cell, queue] : queues)
            if (!queue.empty()) total += std::max<std::int64_t>(remaining[cell], 1);
        if (total == 0) break;
        std::int64_t pick = static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(total)));
        for (auto& [cell, queue] : queues) {
            if (queue.empty()) continue;
            pick -= std::max<std::int64_t>(remaining[cell], 1);
            if (pick < 0) {
                const Document* d = queue.front();
                queue.pop_front();
                remaining[cell] -= d->token_count;
                result.stream.push_back(*d);
                break;
            }
        }
    }
    return result;
}

struct DeviationRow {
    CellKey cell;
    std::int64_t achieved_tokens = 0;
    double achieved_pct = 0.0;
    double target_pct = 0.0;
    double deviation_pp = 0.0;
    bool flagged = false;
};

struct DeviationReport {
    std::vector<DeviationRow> rows;
    double tolerance_pp = 0.25;
    bool any_flagged = false;
};

/// Compares achieved per-cell token shares against targets; |deviation| above
/// the tolerance (percentage points) is flagged.
inline DeviationReport validate(const std::map<CellKey, std::int64_t>& achieved,
                                const std::map<CellKey, double>& targets,
                                double tolerance_pp = 0.25) {
    DeviationReport report;
    report.tolerance_pp = tolerance_pp;

    std::int64_t total = 0;
    for (const auto& [cell, tokens] : achieved) total += tokens;

    std::set<CellKey> cells;
    for (const auto& [cell, tokens] : achieved) cells.insert(cell);
    for (const auto& [cell, w] : targets) cells.insert(cell);

    for (const auto& cell : cells) {
        DeviationRow row;
        row.cell = cell;
        if (auto it = achieved.find(cell); it != achieved.end()) row.achieved_tokens = it->second;
        row.achieved_pct = total == 0 ? 0.0
                                      : 100.0 * static_cast<double>(row.achieved_tokens) /
                                            static_cast<double>(total);
        if (auto it = targets.find(cell); it != targets.end()) row.target_pct = 100.0 * it->second;
        row.deviation_pp = row.achieved_pct - row.target_pct;
        row.flagged = std::abs(row.deviation_pp) > tolerance_pp;
        report.any_flagged = report.any_flagged || row.flagged;
        report.rows.push_back(row);
    }
    return report;
}

inline PhaseSpec phase_spec_from_json(const nlohmann::json& j) {
    PhaseSpec spec;
    spec.phase_id = parse_phase_id(j.at("phase_id").get<std::string>());
    spec.context_length = j.value("context_length", spec.context_length);
    spec.token_budget = j.at("token_budget").get<std::int64_t>();
    if (j.contains("targets")) {
        for (const auto& [key, w] : j.at("targets").items())
            spec.targets[CellKey::parse(key)] = w.get<double>();
    } else if (j.contains("target_tokens")) {
        // Absolute cells (e.g. a composition table); normalized to weights.
        std::map<CellKey, std::int64_t> cells;
        std::int64_t sum = 0;
        for (const auto& [key, t] : j.at("target_tokens").items()) {
            const auto v = t.get<std::int64_t>();
            cells[CellKey::parse(key)] = v;
            sum += v;
        }
        if (sum <= 0) throw ConfigError("phase spec: target_tokens sum to zero");
        double acc = 0.0;
        for (const auto& [cell, v] : cells) {
            spec.targets[cell] = static_cast<double>(v) / static_cast<double>(sum);
            acc += spec.targets[cell];
        }
        // Absorb float crumbs so the weights sum to exactly 1.
        spec.targets.rbegin()->second += 1.0 - acc;
    } else {
        throw ConfigError("phase spec: missing targets/target_tokens");
    }
    if (j.contains("min_word_count") && !j.at("min_word_count").is_null())
        spec.min_word_count = j.at("min_word_count").get<std::int64_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.epoching_allowed = j.value("epoching_allowed", false);
    const auto weighting = j.value("weighting", std::string{"uniform"});
    if (weighting == "uniform") spec.weighting = SamplingWeight::Uniform;
    else if (weighting == "token_mass") spec.weighting = SamplingWeight::TokenMass;
    else throw ConfigError("phase spec: unknown weighting '" + weighting + "'");
    spec.check();
    return spec;
}

inline nlohmann::json to_json(const MixturePlan& p) {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& [cell, cp] : p.cells) {
        cells[cell.str()] = {{"weight", cp.weight},
                             {"planned_tokens", cp.planned_tokens},
                             {"pool_tokens", cp.pool_tokens},
                             {"feasible", cp.feasible},
                             {"epoch_factor", cp.epoch_factor},
                             {"shortfall", cp.shortfall}};
    }
    return {{"phase_id", to_string(p.phase_id)},
            {"token_budget", p.token_budget},
            {"min_word_count", p.min_word_count ? nlohmann::json(*p.min_word_count)
                                                : nlohmann::json(nullptr)},
            {"seed", p.seed},
            {"epoching_allowed", p.epoching_allowed},
            {"weighting", p.weighting == SamplingWeight::Uniform ? "uniform" : "token_mass"},
            {"feasible", p.feasible()},
            {"cells", cells}};
}

inline nlohmann::json to_json(const DeviationReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"cell", row.cell.str()},
                        {"achieved_tokens", row.achieved_tokens},
                        {"achieved_pct", row.achieved_pct},
                        {"target_pct", row.target_pct},
                        {"deviation_pp", row.deviation_pp},
                        {"flagged", row.flagged}});
    }
    return {{"tolerance_pp", r.tolerance_pp}, {"any_flagged", r.any_flagged}, {"rows", rows}};
}

}  // namespace corpusforge
