// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one line per criterion, PASS/FAIL, with pinned tolerances.
// Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpusforge/corpusforge.hpp"

namespace fs = std::filesystem;
using namespace corpusforge;
using json = nlohmann::json;

namespace {

const std::string kBin = CORPUSFORGE_BIN;
const std::string kFixtures = CORPUSFORGE_FIXTURES_DIR;

struct Criterion {
    explicit Criterion(std::string name) : name_(std::move(name)) {}

    void expect(bool ok, const std::string& detail) {
        if (!ok) failures_.push_back(detail);
    }

    bool finish() {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
        if (failures_.empty()) {
            std::cout << "PASS " << name_ << " (" << ms << " ms)\n";
            return true;
        }
        std::cout << "FAIL " << name_ << " (" << ms << " ms)\n";
        for (const auto& f : failures_) std::cout << "     - " << f << "\n";
        return false;
    }

private:
    std::string name_;
    std::vector<std::string> failures_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json load_fixture(const std::string& name) {
    std::ifstream in(kFixtures + "/" + name);
    if (!in) throw DataError("missing fixture " + name);
    return json::parse(in);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

bool within_pp(double got, double want, double tol_pp) { return std::abs(got - want) <= tol_pp; }

bool within_rel(double got, double want, double rel) {
    return std::abs(got - want) <= rel * std::abs(want);
}

// --------------------------------------------------------------------------
// 1. Mixture arithmetic reproduces the composition tables.
// --------------------------------------------------------------------------
bool criterion_mixture_tables() {
    Criterion c("criterion 1: mixture composition tables (±0.05 pp)");

    const auto check_table = [&](const std::string& fixture,
                                 const std::map<std::string, double>& printed) {
        const auto spec_json = load_fixture(fixture);
        std::map<CellKey, std::int64_t> achieved;
        for (const auto& [key, tokens] : spec_json.at("target_tokens").items())
            achieved[CellKey::parse(key)] = tokens.get<std::int64_t>();
        const auto spec = phase_spec_from_json(spec_json);
        const auto report = validate(achieved, spec.targets);
        for (const auto& row : report.rows) {
            const auto it = printed.find(row.cell.str());
            c.expect(it != printed.end(), fixture + ": unexpected cell " + row.cell.str());
            if (it == printed.end()) continue;
            c.expect(within_pp(row.achieved_pct, it->second, 0.05),
                     fixture + " " + row.cell.str() + ": " + fmt(row.achieved_pct) + "% vs " +
                         fmt(it->second) + "%");
        }
    };

    check_table("phase1_spec.json", {{"EN/StemReasoning", 45.9},
                                     {"HE/Web", 36.8},
                                     {"HE/CulturalAcademic", 12.5},
                                     {"HE/LegalGovernment", 3.7},
                                     {"HE/NewsMedia", 1.0}});
    check_table("phase2_spec.json", {{"EN/StemReasoning", 31.5},
                                     {"HE/NewsSocialMedia", 27.2},
                                     {"HE/Web", 23.3},
                                     {"HE/CulturalAcademic", 15.5},
                                     {"HE/SocialColloquial", 1.2},
                                     {"HE/LegalGovernment", 1.3}});
    check_table("phase3_spec.json", {{"EN/StemReasoning", 30.63},
                                     {"HE/Web", 34.46},
                                     {"HE/CulturalAcademic", 26.42},
                                     {"HE/LegalGovernment", 4.95},
                                     {"HE/NewsSocialMedia", 3.46},
                                     {"HE/NewsMedia", 0.05}});
    return c.finish();
}

// --------------------------------------------------------------------------
// 2. Batch-size and step-count cross-checks.
// --------------------------------------------------------------------------
bool criterion_batch_arithmetic() {
    Criterion c("criterion 2: batch/step derivations");

    const auto g = derive_gbs(75500000000, 4500, 8192);
    c.expect(g.gbs == 2048, "derive_gbs(75.5B, 4500, 8192) = " + std::to_string(g.gbs));

    const double forward = 200.0 * 16777216.0;  // steps x tokens-per-batch
    c.expect(within_rel(forward, 3.36e9, 0.005),
             "200 x 16,777,216 = " + fmt(forward) + " not within 0.5% of 3.36B");

    const auto stage3 = train_config_from_json(load_fixture("table5_stage3.json"));
    const auto s = derive_steps(2350000000, stage3);
    c.expect(std::abs(s.steps - 140) <= 1,
             "derive_steps(2.35B, stage3) = " + std::to_string(s.steps) + ", want 140 ± 1");

    return c.finish();
}

// --------------------------------------------------------------------------
// 3. Throughput and cost projections (±2%).
// --------------------------------------------------------------------------
bool criterion_throughput_cost() {
    Criterion c("criterion 3: throughput and cost projections (±2%)");

    const auto h200 = hardware_profile_from_json(load_fixture("h200.json"));
    const auto p1 = project(100e9, h200);
    c.expect(within_rel(p1.tokens_per_sec_gpu, 2790.0, 0.02),
             "h200 per-gpu " + fmt(p1.tokens_per_sec_gpu));
    c.expect(within_rel(p1.days_for_budget, 6.48, 0.02), "h200 days " + fmt(p1.days_for_budget));
    c.expect(within_rel(p1.cost_for_budget, 51900.0, 0.02),
             "h200 cost " + fmt(p1.cost_for_budget));

    const auto b300 = hardware_profile_from_json(load_fixture("b300.json"));
    const auto p2 = project(100e9, b300);
    c.expect(within_rel(p2.tokens_per_sec_gpu, 11628.0, 0.02),
             "b300 per-gpu " + fmt(p2.tokens_per_sec_gpu));
    c.expect(within_rel(p2.days_for_budget, 12.44, 0.02), "b300 days " + fmt(p2.days_for_budget));
    c.expect(within_rel(p2.cost_for_budget, 26800.0, 0.02),
             "b300 cost " + fmt(p2.cost_for_budget));

    return c.finish();
}

// --------------------------------------------------------------------------
// 4. Arena reproduction from the raw-count fixture.
// --------------------------------------------------------------------------
bool criterion_arena() {
    Criterion c("criterion 4: arena standings, decisive shares, ranking, Holm");

    const auto fixture = load_fixture("arena_phase2_counts.json");
    std::vector<StandingsRow> rows;
    for (const auto& r : fixture.at("standings")) {
        StandingsRow row;
        row.model = r.at("model").get<std::string>();
        row.battles = r.at("battles").get<std::int64_t>();
        row.wins = r.at("wins").get<std::int64_t>();
        row.ties = r.at("ties").get<std::int64_t>();
        row.losses = r.at("losses").get<std::int64_t>();
        rows.push_back(row);
    }
    std::vector<HeadToHead> h2hs;
    for (const auto& h : fixture.at("head_to_heads"))
        h2hs.push_back(HeadToHead::from_counts(
            h.at("model_a").get<std::string>(), h.at("model_b").get<std::string>(),
            h.at("a_wins").get<std::int64_t>(), h.at("b_wins").get<std::int64_t>(),
            h.at("ties").get<std::int64_t>(), h.at("n").get<std::int64_t>()));
    const auto report = analyze_counts(rows, h2hs);

    // Standings percentages match to one decimal.
    const std::map<std::string, std::array<double, 3>> table8 = {
        {"gemma-3-27b-it", {61.0, 20.0, 19.0}},
        {"moe-30b-a3b", {39.1, 19.8, 41.1}},
        {"dictalm-3-24b", {22.4, 11.5, 66.1}},
    };
    for (const auto& row : report.standings) {
        const auto& want = table8.at(row.model);
        c.expect(within_pp(row.win_pct(), want[0], 0.05), row.model + " win% " + fmt(row.win_pct()));
        c.expect(within_pp(row.tie_pct(), want[1], 0.05), row.model + " tie% " + fmt(row.tie_pct()));
        c.expect(within_pp(row.loss_pct(), want[2], 0.05),
                 row.model + " loss% " + fmt(row.loss_pct()));
    }

    // Decisive shares and the planted inconsistency.
    for (const auto& h : report.head_to_heads) {
        if (h.model_a == "moe-30b-a3b" && h.model_b == "gemma-3-27b-it") {
            c.expect(within_pp(h.decisive_a_pct(), 28.2, 0.05), "decisive " + fmt(h.decisive_a_pct()));
            c.expect(within_pp(h.decisive_b_pct(), 71.8, 0.05), "decisive " + fmt(h.decisive_b_pct()));
            c.expect(h.consistency_flag, "ours-vs-gemma should be consistent");
        } else if (h.model_a == "gemma-3-27b-it" && h.model_b == "dictalm-3-24b") {
            c.expect(within_pp(h.decisive_a_pct(), 80.5, 0.05), "decisive " + fmt(h.decisive_a_pct()));
            c.expect(within_pp(h.decisive_b_pct(), 19.5, 0.05), "decisive " + fmt(h.decisive_b_pct()));
            c.expect(h.consistency_flag, "gemma-vs-dicta should be consistent");
        } else {
            c.expect(!h.consistency_flag,
                     "ours-vs-dicta components sum to 107 with n = 90 and must be flagged");
        }
    }

    // Bradley-Terry ordering over the decisive counts.
    c.expect(report.strengths.at("gemma-3-27b-it") > report.strengths.at("moe-30b-a3b") &&
                 report.strengths.at("moe-30b-a3b") > report.strengths.at("dictalm-3-24b"),
             "strength ordering");

    // Holm-adjusted significance for the two consistent pairs, evaluated under
    // both candidate readings of the flagged pair's counts: the stated row
    // (55/42/10) and the reading implied by its published decisive share
    // (55 wins of 80 decisive votes).
    for (const std::int64_t dicta_losses : {42, 25}) {
        std::map<std::string, double> pvals;
        pvals["ours_gemma"] = pairwise_test(HeadToHead::from_counts("o", "g", 22, 56, 29, 107));
        pvals["gemma_dicta"] = pairwise_test(HeadToHead::from_counts("g", "d", 66, 16, 11, 93));
        pvals["ours_dicta"] = pairwise_test(
            HeadToHead::from_counts("o", "d", 55, dicta_losses, 10, 55 + dicta_losses + 10));
        const auto adjusted = holm(pvals);
        c.expect(adjusted.at("ours_gemma") < 0.05,
                 "ours-vs-gemma adjusted p " + fmt(adjusted.at("ours_gemma")));
        c.expect(adjusted.at("gemma_dicta") < 0.05,
                 "gemma-vs-dicta adjusted p " + fmt(adjusted.at("gemma_dicta")));
        // The flagged pair is reported, not asserted.
        std::cout << "     note: flagged pair adjusted p = " << adjusted.at("ours_dicta")
                  << " under reading 55/" << dicta_losses << "\n";
    }

    return c.finish();
}

// --------------------------------------------------------------------------
// 5. Dedup oracle equivalence on a seeded synthetic corpus.
// --------------------------------------------------------------------------
double oracle_jaccard(const ShingleSet& a, const ShingleSet& b) {
    const std::set<std::uint64_t> sa(a.hashes.begin(), a.hashes.end());
    const std::set<std::uint64_t> sb(b.hashes.begin(), b.hashes.end());
    std::size_t inter = 0;
    for (const auto h : sa) inter += sb.count(h);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

bool criterion_dedup() {
    Criterion c("criterion 5: dedup vs brute-force partition; MinHash error");

    Rng rng(20260808);
    std::vector<std::string> vocab;
    for (int i = 0; i < 5000; ++i) {
        std::string w;
        const auto len = 4 + rng.bounded(6);
        for (std::uint64_t k = 0; k < len; ++k)
            w.push_back(static_cast<char>('a' + rng.bounded(26)));
        vocab.push_back(w);
    }
    auto random_words = [&](std::size_t count) {
        std::vector<std::string> words;
        for (std::size_t i = 0; i < count; ++i) words.push_back(vocab[rng.bounded(vocab.size())]);
        return words;
    };
    auto join = [](const std::vector<std::string>& words) {
        std::string out;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) out += ' ';
            out += words[i];
        }
        return out;
    };

    std::vector<Document> corpus;
    int next = 0;
    auto add = [&](const std::string& text) {
        Document d;
        char id[16];
        std::snprintf(id, sizeof(id), "doc%03d", next++);
        d.id = id;
        d.text = text;
        d.lang = Lang::HE;
        d.category = Category::Web;
        d.word_count = count_words(text);
        d.token_count = count_tokens(text);
        corpus.push_back(d);
    };

    // Planted clusters (small word swaps), moderate distractors, random noise.
    for (int cl = 0; cl < 40 && next < 190; ++cl) {
        const auto base = random_words(150);
        add(join(base));
        const auto members = 2 + rng.bounded(4);
        for (std::uint64_t m = 1; m < members; ++m) {
            auto mutated = base;
            const auto swaps = 1 + rng.bounded(3);
            for (std::uint64_t s = 0; s < swaps; ++s)
                mutated[rng.bounded(mutated.size())] = vocab[rng.bounded(vocab.size())];
            add(join(mutated));
        }
        if (rng.bounded(2) == 0) {
            auto distractor = base;
            for (std::size_t w = 0; w < distractor.size(); ++w)
                if (rng.bounded(10) < 4) distractor[w] = vocab[rng.bounded(vocab.size())];
            add(join(distractor));
        }
    }
    while (next < 200) add(join(random_words(120 + rng.bounded(60))));

    const DedupParams params{};  // k=5, H=128, b=16, r=8, tau=0.7
    std::vector<ShingleSet> sets;
    for (const auto& d : corpus) sets.push_back(shingles(d.text, params.k, params.seed, d.id));

    const std::size_t n = corpus.size();
    UnionFind oracle_uf(n);
    std::vector<std::vector<double>> jac(n, std::vector<double>(n, 0.0));
    int planted_high = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            jac[i][j] = oracle_jaccard(sets[i], sets[j]);
            if (jac[i][j] >= params.threshold) oracle_uf.unite(i, j);
            if (jac[i][j] >= 0.8) ++planted_high;
        }
    c.expect(planted_high > 60, "planted clusters missing from the construction");

    const auto result = dedup(corpus, params);
    std::map<std::string, std::string> rep;
    for (const auto& id : result.kept) rep[id] = id;
    for (const auto& [id, r] : result.removed) rep[id] = r;

    std::int64_t oracle_pos = 0, recalled = 0, outside_band_disagreements = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool oracle_same = oracle_uf.connected(i, j);
            const bool dedup_same = rep.at(corpus[i].id) == rep.at(corpus[j].id);
            if (oracle_same) {
                ++oracle_pos;
                if (dedup_same) ++recalled;
            }
            const bool in_band =
                jac[i][j] > params.threshold - 0.1 && jac[i][j] < params.threshold + 0.1;
            if (!in_band && oracle_same != dedup_same) ++outside_band_disagreements;
        }
    c.expect(oracle_pos > 0, "empty oracle partition");
    c.expect(static_cast<double>(recalled) >= 0.95 * static_cast<double>(oracle_pos),
             "pair recall " + fmt(double(recalled) / double(oracle_pos)));
    c.expect(outside_band_disagreements == 0,
             std::to_string(outside_band_disagreements) + " disagreements outside tau ± 0.1");
    c.expect(result.kept.size() + result.removed.size() == corpus.size(), "conservation");

    // MinHash mean absolute error over 1,000 random set pairs at H = 128.
    double err_sum = 0.0;
    for (int p = 0; p < 1000; ++p) {
        const auto common = 1 + rng.bounded(400);
        const auto ua = rng.bounded(400), ub = rng.bounded(400);
        ShingleSet a, b;
        a.k = b.k = 5;
        for (std::uint64_t i = 0; i < common; ++i) {
            const auto h = rng.next();
            a.hashes.push_back(h);
            b.hashes.push_back(h);
        }
        for (std::uint64_t i = 0; i < ua; ++i) a.hashes.push_back(rng.next());
        for (std::uint64_t i = 0; i < ub; ++i) b.hashes.push_back(rng.next());
        std::sort(a.hashes.begin(), a.hashes.end());
        std::sort(b.hashes.begin(), b.hashes.end());
        const double exact = oracle_jaccard(a, b);
        const double est = jaccard_estimate(signature(a, 128, 7), signature(b, 128, 7));
        err_sum += std::abs(est - exact);
    }
    c.expect(err_sum / 1000.0 <= 0.05, "MinHash MAE " + fmt(err_sum / 1000.0));

    return c.finish();
}

// --------------------------------------------------------------------------
// 6. Packing: FFD vs exhaustive optimum; concat conservation.
// --------------------------------------------------------------------------
int optimal_bins(const std::vector<std::int64_t>& lengths, std::int64_t capacity) {
    const std::size_t n = lengths.size();
    if (n == 0) return 0;
    struct State {
        int bins;
        std::int64_t used;
    };
    std::vector<State> dp(1u << n, {1 << 20, 0});
    dp[0] = {0, capacity};
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (dp[mask].bins >= (1 << 20)) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) continue;
            State nxt;
            if (dp[mask].used + lengths[i] <= capacity)
                nxt = {dp[mask].bins, dp[mask].used + lengths[i]};
            else
                nxt = {dp[mask].bins + 1, lengths[i]};
            const auto to = mask | (1u << i);
            if (nxt.bins < dp[to].bins || (nxt.bins == dp[to].bins && nxt.used < dp[to].used))
                dp[to] = nxt;
        }
    }
    return dp[(1u << n) - 1].bins;
}

bool criterion_packing() {
    Criterion c("criterion 6: packing vs exhaustive oracle; concat conservation");

    Rng rng(20260809);
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t capacity = 20 + static_cast<std::int64_t>(rng.bounded(108));
        std::vector<std::int64_t> lengths;
        const auto n = 1 + rng.bounded(trial % 10 == 0 ? 20 : 14);
        for (std::uint64_t i = 0; i < n; ++i)
            lengths.push_back(
                1 + static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(capacity))));

        const auto ffd = pack_bins(lengths, capacity);
        const int opt = optimal_bins(lengths, capacity);
        c.expect(ffd.report.sequences >= opt && ffd.report.sequences <= opt + 1,
                 "FFD " + std::to_string(ffd.report.sequences) + " vs optimal " +
                     std::to_string(opt));

        std::map<std::string, int> seen;
        for (const auto& seq : ffd.sequences)
            for (const auto& seg : seq.segments) {
                seen[seg.doc_id] += 1;
                c.expect(seg.start_offset == 0, "split sample in bin mode");
            }
        for (const auto& [id, count] : seen)
            c.expect(count == 1, "sample " + id + " appears " + std::to_string(count) + " times");
    }

    std::vector<Document> docs;
    std::int64_t mass = 0;
    for (int i = 0; i < 1000; ++i) {
        Document d;
        d.id = "c" + std::to_string(i);
        d.token_count = 1 + static_cast<std::int64_t>(rng.bounded(3000));
        mass += d.token_count;
        docs.push_back(d);
    }
    const auto concat = pack_concat(docs, 2048);
    std::int64_t non_pad = 0;
    for (const auto& seq : concat.sequences) non_pad += seq.filled();
    c.expect(non_pad == mass + 1000, "concat conservation: " + std::to_string(non_pad) + " vs " +
                                         std::to_string(mass + 1000));
    for (std::size_t i = 0; i + 1 < concat.sequences.size(); ++i)
        c.expect(concat.sequences[i].pad_tokens == 0, "padding before the final window");

    return c.finish();
}

// --------------------------------------------------------------------------
// 7. Determinism across worker counts, through the CLI.
// --------------------------------------------------------------------------
int run_cli(const std::string& args) {
    const int rc = std::system((kBin + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing " + path.string() + ">";
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

bool criterion_determinism() {
    Criterion c("criterion 7: byte-identical stage reports at workers 1, 2, 8");

    const auto dir = fs::temp_directory_path() / "cf_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);

    // A corpus big enough to exercise the parallel paths. Letter-only words
    // so the digit-ratio filter stays quiet.
    Rng rng(31337);
    auto word = [&rng] {
        std::string w;
        const auto len = 3 + rng.bounded(8);
        for (std::uint64_t c = 0; c < len; ++c)
            w.push_back(static_cast<char>('a' + rng.bounded(26)));
        return w;
    };
    std::vector<Document> docs;
    for (int i = 0; i < 400; ++i) {
        Document d;
        d.id = "d" + std::to_string(i);
        d.lang = i % 3 == 0 ? Lang::EN : Lang::HE;
        d.category = i % 2 == 0 ? Category::Web : Category::NewsSocialMedia;
        d.source = "gen";
        std::string text = "<p>";
        const auto words = 30 + rng.bounded(80);
        for (std::uint64_t w = 0; w < words; ++w) text += word() + " ";
        if (i % 7 == 0) text += " http://remove.me/path ";
        text += "</p>";
        d.text = text;
        d.word_count = count_words(text);
        d.token_count = count_tokens(text);
        docs.push_back(d);
    }
    // Plant some exact duplicates for the dedup stage.
    for (int i = 0; i < 20; ++i) {
        auto d = docs[static_cast<std::size_t>(i * 7 % 400)];
        d.id = "dup" + std::to_string(i);
        docs.push_back(d);
    }
    const auto shard = dir / "raw.jsonl";
    write_shard(shard.string(), docs);

    const json cfg{
        {"stages", json::array({"clean", "filter", "dedup", "plan", "sample", "pack"})},
        {"inputs", json::array({json{{"path", shard.string()}, {"web_scraped", true}}})},
        {"filter_thresholds", json{{"min_words", 10}}},
        {"phase_spec", json{{"phase_id", "P1"},
                            {"token_budget", 2000},
                            {"targets", json{{"HE/Web", 0.3},
                                             {"HE/NewsSocialMedia", 0.4},
                                             {"EN/Web", 0.2},
                                             {"EN/NewsSocialMedia", 0.1}}},
                            {"seed", 21},
                            {"epoching_allowed", true}}},
        {"packing", json{{"mode", "concat"}, {"context_length", 512}}},
        {"seed", 77}};
    write_file(dir / "cfg.json", cfg.dump());

    const std::vector<std::string> artifacts = {
        "clean/shard_000.jsonl",  "clean/clean_report.json", "filter/shard_000.jsonl",
        "filter/filter_report.json", "dedup/shard_000.jsonl", "dedup/dedup_report.json",
        "dedup/manifest.json",    "plan/plan_report.json",   "plan/deviations.json",
        "sample/sampled.jsonl",   "sample/sample_report.json", "sample/manifest.json",
        "pack/packed.jsonl",      "pack/pack_report.json",
    };

    std::map<int, std::map<std::string, std::string>> by_workers;
    for (const int workers : {1, 2, 8}) {
        const auto out = dir / ("w" + std::to_string(workers));
        const int rc = run_cli("pipeline --config " + (dir / "cfg.json").string() + " --out " +
                               out.string() + " --workers " + std::to_string(workers));
        c.expect(rc == 0, "pipeline failed at workers " + std::to_string(workers));
        for (const auto& rel : artifacts) by_workers[workers][rel] = slurp(out / rel);
    }
    for (const auto& rel : artifacts) {
        c.expect(by_workers[1][rel] == by_workers[2][rel], rel + " differs between 1 and 2 workers");
        c.expect(by_workers[1][rel] == by_workers[8][rel], rel + " differs between 1 and 8 workers");
    }

    // Arena and calc reports rerun byte-identically too.
    const json arena_cfg{{"counts", kFixtures + "/arena_phase2_counts.json"}};
    write_file(dir / "arena.json", arena_cfg.dump());
    for (const char* tag : {"r1", "r2"}) {
        const int rc = run_cli("arena report --config " + (dir / "arena.json").string() +
                               " --out " + (dir / tag).string());
        c.expect(rc == 0, "arena report failed");
    }
    c.expect(slurp(dir / "r1" / "arena" / "arena_report.json") ==
                 slurp(dir / "r2" / "arena" / "arena_report.json"),
             "arena reports differ between reruns");

    fs::remove_all(dir);
    return c.finish();
}

// --------------------------------------------------------------------------
// 8. Model-scale results are out of scope; property suites substitute.
// --------------------------------------------------------------------------
bool criterion_exclusions() {
    Criterion c("criterion 8: model-scale results excluded; property suites substitute");
    // Training-dependent numbers (curriculum ablation aggregates, benchmark
    // scores, serving throughput ratios) cannot be reproduced at desk scale.
    // Coverage substitutes are the per-module invariant suites plus the oracle
    // equivalences exercised by criteria 1-7; nothing to assert here beyond
    // their presence in the test tree.
    c.expect(true, "");
    return c.finish();
}

}  // namespace

int main() {
    bool ok = true;
    try {
        ok &= criterion_mixture_tables();
        ok &= criterion_batch_arithmetic();
        ok &= criterion_throughput_cost();
        ok &= criterion_arena();
        ok &= criterion_dedup();
        ok &= criterion_packing();
        ok &= criterion_determinism();
        ok &= criterion_exclusions();
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance suite aborted: " << e.what() << "\n";
        return 1;
    }
    std::cout << (ok ? "acceptance: all criteria passed\n" : "acceptance: FAILURES\n");
    return ok ? 0 : 1;
}
