// SPDX-License-Identifier: Apache-2.0
//
// corpusforge: corpus curation and curriculum planning CLI.
//
// Subcommands: clean, filter, dedup, plan, sample, pack,
//              calc {batch|steps|noise|wsd|throughput|project|validate},
//              arena {standings|h2h|rank|report}, pipeline.
//
// Exit codes: 0 ok, 1 config error, 2 data error, 3 infeasible plan,
//             4 arena consistency failure under --strict.

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "corpusforge/corpusforge.hpp"

namespace fs = std::filesystem;
namespace cf = corpusforge;
using json = nlohmann::json;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::string out = ".";
    bool strict = false;
};

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cf::ConfigError("cannot open config file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw cf::ConfigError("malformed JSON in " + path);
    return j;
}

json load_config(const GlobalOpts& opts) {
    if (opts.config_path.empty()) return json::object();
    return load_json_file(opts.config_path);
}

/// Sub-config values may be inline objects or paths to JSON files.
json resolve_subconfig(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) return json();
    const auto& v = cfg.at(key);
    if (v.is_string()) return load_json_file(v.get<std::string>());
    return v;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cf::DataError("cannot write " + path.string());
    out << text;
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cf::DataError("cannot open input for digest: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex64(cf::fnv1a64(ss.str()));
}

/// SOURCE_DATE_EPOCH (the reproducible-build convention) or empty; reports
/// never embed wall-clock time, so reruns stay byte-identical.
std::string created_at_stamp() {
    const char* env = std::getenv("SOURCE_DATE_EPOCH");
    if (!env) return "";
    const auto epoch = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    std::tm tm{};
    gmtime_r(&epoch, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct InputShard {
    std::string path;
    bool web_scraped = false;
};

std::vector<InputShard> read_input_list(const json& cfg) {
    std::vector<InputShard> inputs;
    if (!cfg.contains("inputs")) return inputs;
    for (const auto& item : cfg.at("inputs")) {
        if (item.is_string()) {
            inputs.push_back({item.get<std::string>(), false});
        } else {
            inputs.push_back(
                {item.at("path").get<std::string>(), item.value("web_scraped", false)});
        }
    }
    return inputs;
}

std::uint64_t run_seed(const GlobalOpts& opts, const json& cfg) {
    if (opts.seed) return *opts.seed;
    if (cfg.contains("seed")) return cfg.at("seed").get<std::uint64_t>();
    return 0;
}

void write_run_manifest(const fs::path& stage_dir, const std::string& command,
                        const json& effective_config, std::uint64_t seed,
                        const std::vector<InputShard>& inputs) {
    json digests = json::object();
    for (const auto& in : inputs) digests[in.path] = file_digest(in.path);
    write_json_file(stage_dir / "run_manifest.json",
                    json{{"command", command},
                         {"config_hash", hex64(cf::fnv1a64(effective_config.dump()))},
                         {"seed", seed},
                         {"tool_version", cf::kVersion},
                         {"created_at", created_at_stamp()},
                         {"input_digests", digests}});
}

std::string shard_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "shard_%03zu.jsonl", index);
    return buf;
}

/// Manifest for a freshly written shard. Shard paths are relative to the
/// manifest's own directory so reruns into different out dirs stay identical.
void write_stage_manifest(const fs::path& stage_dir, const std::string& shard_file,
                          const std::vector<cf::Document>& docs) {
    cf::CorpusManifest m;
    m.pipeline_version = std::string("corpusforge-") + cf::kVersion;
    m.created_at = created_at_stamp();
    cf::ShardInfo info;
    info.path = shard_file;
    for (const auto& d : docs) {
        ++info.doc_count;
        info.token_total += d.token_count;
        m.totals[cf::CellKey{d.lang, d.category}] += d.token_count;
    }
    m.shards.push_back(std::move(info));
    write_json_file(stage_dir / "manifest.json", cf::to_json(m));
}

// ---------------------------------------------------------------------------
// Pipeline stages. Each returns the list of shards it produced so `pipeline`
// can chain them. Running a stage individually with a config whose inputs
// point at the previous stage's shards produces identical reports and shards.
// ---------------------------------------------------------------------------

std::vector<InputShard> stage_clean(const json& cfg, const GlobalOpts& opts) {
    const auto inputs = read_input_list(cfg);
    const auto rules_json = resolve_subconfig(cfg, "cleaning_rules");
    const cf::CleaningRuleSet rules =
        rules_json.is_null() ? cf::CleaningRuleSet{} : cf::cleaning_rules_from_json(rules_json);
    const auto norm_json = resolve_subconfig(cfg, "normalizer");
    const cf::NormalizerConfig normalizer =
        norm_json.is_null() ? cf::NormalizerConfig{} : cf::normalizer_config_from_json(norm_json);

    const fs::path stage_dir = fs::path(opts.out) / "clean";
    fs::create_directories(stage_dir);

    cf::PipelineStats stats;
    std::map<std::string, std::int64_t> rule_hits;
    std::int64_t bytes_removed = 0, normalized_docs = 0, malformed_lines = 0;
    std::vector<InputShard> outputs;

    for (std::size_t s = 0; s < inputs.size(); ++s) {
        auto shard = cf::read_shard(inputs[s].path);
        malformed_lines += static_cast<std::int64_t>(shard.errors.size());
        for (const auto& err : shard.errors)
            cf::log_warn(inputs[s].path + ":" + std::to_string(err.line_number) + ": " +
                         err.message);

        auto cleaned = cf::parallel_map(
            shard.documents,
            [&](const cf::Document& d) {
                auto outcome = cf::clean_text(d.text, rules);
                return std::make_shared<cf::CleanOutcome>(std::move(outcome));
            },
            opts.workers);

        std::vector<std::string> texts;
        texts.reserve(cleaned.size());
        for (const auto& c : cleaned) texts.push_back(c->text);
        if (inputs[s].web_scraped) {
            if (normalizer.mode == cf::NormalizerConfig::Mode::External) {
                texts = cf::normalize_external(texts, normalizer.external_command);
            } else {
                for (auto& t : texts) t = cf::normalize_whitespace_builtin(t);
            }
            normalized_docs += static_cast<std::int64_t>(texts.size());
        }

        std::vector<cf::Document> out_docs;
        out_docs.reserve(shard.documents.size());
        for (std::size_t i = 0; i < shard.documents.size(); ++i) {
            cf::Document d = shard.documents[i];
            stats.docs_in += 1;
            stats.tokens_in += d.token_count;
            for (const auto& [rule, hits] : cleaned[i]->applied) rule_hits[rule] += hits;
            bytes_removed += cleaned[i]->bytes_removed;
            d.text = texts[i];
            d.word_count = cf::count_words(d.text);
            d.token_count = cf::count_tokens(d.text);
            stats.docs_out += 1;
            stats.tokens_out += d.token_count;
            out_docs.push_back(std::move(d));
        }

        const fs::path out_path = stage_dir / shard_name(s);
        cf::write_shard(out_path.string(), out_docs);
        outputs.push_back({out_path.string(), false});
    }

    json hits = json::object();
    for (const auto& [rule, n] : rule_hits) hits[rule] = n;
    json report = cf::to_json(stats);
    report["rule_hits"] = hits;
    report["bytes_removed"] = bytes_removed;
    report["normalized_docs"] = normalized_docs;
    report["malformed_lines"] = malformed_lines;
    report["ruleset_version"] = rules.version;
    write_json_file(stage_dir / "clean_report.json", report);
    write_run_manifest(stage_dir, "clean", cfg, run_seed(opts, cfg), inputs);
    return outputs;
}

std::vector<InputShard> stage_filter(const json& cfg, const GlobalOpts& opts) {
    const auto inputs = read_input_list(cfg);
    const auto thr_json = resolve_subconfig(cfg, "filter_thresholds");
    const cf::FilterThresholds thresholds =
        thr_json.is_null() ? cf::FilterThresholds{} : cf::thresholds_from_json(thr_json);
    const bool quarantine = cfg.value("quarantine", false);

    const fs::path stage_dir = fs::path(opts.out) / "filter";
    fs::create_directories(stage_dir);

    cf::PipelineStats stats;
    std::vector<InputShard> outputs;

    for (std::size_t s = 0; s < inputs.size(); ++s) {
        auto shard = cf::read_shard(inputs[s].path);
        auto verdicts = cf::parallel_map(
            shard.documents,
            [&](const cf::Document& d) {
                return std::make_shared<cf::FilterVerdict>(cf::evaluate(d, thresholds));
            },
            opts.workers);

        std::vector<cf::Document> kept;
        std::ofstream quarantine_out;
        if (quarantine) {
            quarantine_out.open(stage_dir / ("quarantine_" + shard_name(s)), std::ios::binary);
        }
        for (std::size_t i = 0; i < shard.documents.size(); ++i) {
            const auto& d = shard.documents[i];
            const auto& v = *verdicts[i];
            stats.docs_in += 1;
            stats.tokens_in += d.token_count;
            if (v.keep) {
                stats.docs_out += 1;
                stats.tokens_out += d.token_count;
                kept.push_back(d);
            } else {
                stats.removed_by_reason[cf::to_string(*v.reason)] += 1;
                if (quarantine) {
                    json rec = cf::to_json(d);
                    rec["reject_reason"] = cf::to_string(*v.reason);
                    rec["metrics"] = v.metrics;
                    quarantine_out << rec.dump() << '\n';
                }
            }
        }
        const fs::path out_path = stage_dir / shard_name(s);
        cf::write_shard(out_path.string(), kept);
        outputs.push_back({out_path.string(), false});
    }

    json report = cf::to_json(stats);
    report["thresholds"] = cf::to_json(thresholds);
    write_json_file(stage_dir / "filter_report.json", report);
    write_run_manifest(stage_dir, "filter", cfg, run_seed(opts, cfg), inputs);
    return outputs;
}

std::vector<InputShard> stage_dedup(const json& cfg, const GlobalOpts& opts) {
    const auto inputs = read_input_list(cfg);
    const auto params_json = resolve_subconfig(cfg, "dedup_params");
    cf::DedupParams params =
        params_json.is_null() ? cf::DedupParams{} : cf::dedup_params_from_json(params_json);
    if (params_json.is_null() || !params_json.contains("seed"))
        params.seed = cf::stage_seed(run_seed(opts, cfg), "dedup");

    const fs::path stage_dir = fs::path(opts.out) / "dedup";
    fs::create_directories(stage_dir);

    std::vector<cf::Document> docs;
    for (const auto& in : inputs) {
        auto shard = cf::read_shard(in.path);
        for (auto& d : shard.documents) docs.push_back(std::move(d));
    }

    const auto result = cf::dedup(docs, params, opts.workers);

    std::vector<cf::Document> kept;
    kept.reserve(result.kept.size());
    for (const auto& d : docs)
        if (result.kept.count(d.id)) kept.push_back(d);
    const fs::path out_path = stage_dir / shard_name(0);
    cf::write_shard(out_path.string(), kept);

    if (cfg.value("removed_sidecar", false)) {
        std::ofstream sidecar(stage_dir / "removed.jsonl", std::ios::binary);
        for (const auto& [id, rep] : result.removed)
            sidecar << json{{"id", id}, {"kept", rep}}.dump() << '\n';
    }

    write_stage_manifest(stage_dir, shard_name(0), kept);
    write_json_file(stage_dir / "dedup_report.json", cf::dedup_report_json(result, params));
    write_run_manifest(stage_dir, "dedup", cfg, run_seed(opts, cfg), inputs);
    return {{out_path.string(), false}};
}

std::optional<cf::PhaseSpec> phase_spec_from_config(const json& cfg, const GlobalOpts& opts,
                                                    const char* stage) {
    const auto spec_json = resolve_subconfig(cfg, "phase_spec");
    if (spec_json.is_null()) return std::nullopt;
    cf::PhaseSpec spec = cf::phase_spec_from_json(spec_json);
    if (!spec_json.contains("seed")) spec.seed = cf::stage_seed(run_seed(opts, cfg), stage);
    return spec;
}

std::vector<InputShard> stage_plan(const json& cfg, const GlobalOpts& opts) {
    const auto inputs = read_input_list(cfg);
    const fs::path stage_dir = fs::path(opts.out) / "plan";
    fs::create_directories(stage_dir);

    const auto spec = phase_spec_from_config(cfg, opts, "plan");
    if (!spec) {
        write_json_file(stage_dir / "plan_report.json",
                        json{{"skipped", true}, {"reason", "no phase_spec configured"}});
        write_run_manifest(stage_dir, "plan", cfg, run_seed(opts, cfg), inputs);
        return inputs;
    }

    cf::MixturePlan plan;
    if (!inputs.empty()) {
        std::vector<cf::Document> docs;
        for (const auto& in : inputs) {
            auto shard = cf::read_shard(in.path);
            for (auto& d : shard.documents) docs.push_back(std::move(d));
        }
        plan = cf::plan(*spec, cf::pool_stats(docs, spec->min_word_count));
    } else if (cfg.contains("manifest")) {
        plan = cf::plan(*spec, cf::manifest_from_json(
                                   load_json_file(cfg.at("manifest").get<std::string>())));
    } else {
        throw cf::ConfigError("plan: need inputs or a manifest");
    }

    std::map<cf::CellKey, std::int64_t> planned;
    for (const auto& [cell, cp] : plan.cells) planned[cell] = cp.planned_tokens;
    const auto deviations = cf::validate(planned, spec->targets);

    write_json_file(stage_dir / "plan_report.json", cf::to_json(plan));
    write_json_file(stage_dir / "deviations.json", cf::to_json(deviations));
    write_run_manifest(stage_dir, "plan", cfg, run_seed(opts, cfg), inputs);
    if (!plan.feasible())
        throw cf::InfeasiblePlanError("plan has infeasible cells (see " +
                                      (stage_dir / "plan_report.json").string() + ")");
    return inputs;
}

std::vector<InputShard> stage_sample(const json& cfg, const GlobalOpts& opts) {
    const auto inputs = read_input_list(cfg);
    const fs::path stage_dir = fs::path(opts.out) / "sample";
    fs::create_directories(stage_dir);

    const auto spec = phase_spec_from_config(cfg, opts, "sample");
    if (!spec) {
        write_json_file(stage_dir / "sample_report.json",
                        json{{"skipped", true}, {"reason", "no phase_spec configured"}});
        write_run_manifest(stage_dir, "sample", cfg, run_seed(opts, cfg), inputs);
        return inputs;
    }

    std::vector<cf::Document> docs;
    for (const auto& in : inputs) {
        auto shard = cf::read_shard(in.path);
        for (auto& d : shard.documents) docs.push_back(std::move(d));
    }

    std::set<std::string> exclude;
    if (cfg.contains("exclude_ids"))
        for (const auto& id : cfg.at("exclude_ids")) exclude.insert(id.get<std::string>());

    const auto plan = cf::plan(*spec, cf::pool_stats(docs, spec->min_word_count));
    if (!plan.feasible())
        throw cf::InfeasiblePlanError("sample: plan has infeasible cells");

    std::map<cf::CellKey, std::vector<cf::Document>> pools;
    for (const auto& d : docs) pools[cf::CellKey{d.lang, d.category}].push_back(d);

    const auto result = cf::sample(plan, pools, spec->seed, exclude.empty() ? nullptr : &exclude);

    const fs::path out_path = stage_dir / "sampled.jsonl";
    cf::write_shard(out_path.string(), result.stream);
    write_stage_manifest(stage_dir, "sampled.jsonl", result.stream);

    const auto deviations = cf::validate(result.achieved_tokens(), spec->targets);
    json cells = json::object();
    for (const auto& [cell, cs] : result.cells)
        cells[cell.str()] = {{"selected_docs", cs.ids.size()},
                             {"achieved_tokens", cs.achieved_tokens},
                             {"epochs", cs.epochs}};
    write_json_file(stage_dir / "sample_report.json",
                    json{{"phase_id", cf::to_string(spec->phase_id)},
                         {"seed", spec->seed},
                         {"cells", cells},
                         {"deviations", cf::to_json(deviations)}});
    write_run_manifest(stage_dir, "sample", cfg, run_seed(opts, cfg), inputs);
    return {{out_path.string(), false}};
}

std::vector<InputShard> stage_pack(const json& cfg, const GlobalOpts& opts) {
    const auto inputs = read_input_list(cfg);
    json pack_json = resolve_subconfig(cfg, "packing");
    if (pack_json.is_null()) pack_json = json::object();
    const std::string mode = pack_json.value("mode", std::string{"concat"});
    const std::int64_t context_length = pack_json.value("context_length", std::int64_t{8192});

    const fs::path stage_dir = fs::path(opts.out) / "pack";
    fs::create_directories(stage_dir);

    std::vector<cf::Document> docs;
    for (const auto& in : inputs) {
        auto shard = cf::read_shard(in.path);
        for (auto& d : shard.documents) docs.push_back(std::move(d));
    }

    std::vector<cf::PackedSequence> sequences;
    cf::PackingReport report;
    json extra = json::object();
    if (mode == "concat") {
        cf::ConcatOptions copts;
        copts.boundary_tokens = pack_json.value("boundary_tokens", std::int64_t{1});
        auto result = cf::pack_concat(docs, context_length, copts);
        sequences = std::move(result.sequences);
        report = result.report;
    } else if (mode == "bins") {
        std::vector<cf::BinSample> samples;
        samples.reserve(docs.size());
        for (const auto& d : docs)
            if (d.token_count > 0) samples.push_back({d.id, d.token_count});
        auto result = cf::pack_bins(samples, context_length);
        sequences = std::move(result.sequences);
        report = result.report;
        extra["oversize_ids"] = result.oversize_ids;
    } else {
        throw cf::ConfigError("pack: unknown mode '" + mode + "' (concat|bins)");
    }

    std::ofstream packed(stage_dir / "packed.jsonl", std::ios::binary);
    for (const auto& seq : sequences) packed << cf::to_json(seq).dump() << '\n';

    json report_json = cf::to_json(report);
    report_json["mode"] = mode;
    report_json["context_length"] = context_length;
    for (const auto& [k, v] : extra.items()) report_json[k] = v;
    write_json_file(stage_dir / "pack_report.json", report_json);
    write_run_manifest(stage_dir, "pack", cfg, run_seed(opts, cfg), inputs);
    return {};
}

// ---------------------------------------------------------------------------
// calc and arena
// ---------------------------------------------------------------------------

void emit_report(const GlobalOpts& opts, const std::string& name, const json& j) {
    const fs::path dir = fs::path(opts.out) / name;
    write_json_file(dir / (name + "_report.json"), j);
    std::cout << j.dump(2) << "\n";
}

int run_arena(const std::string& sub, const GlobalOpts& opts) {
    const json cfg = load_config(opts);

    cf::ArenaReport report;
    if (cfg.contains("counts") || cfg.contains("standings")) {
        const json counts = cfg.contains("counts") ? resolve_subconfig(cfg, "counts") : cfg;
        std::vector<cf::StandingsRow> rows;
        for (const auto& r : counts.at("standings")) {
            cf::StandingsRow row;
            row.model = r.at("model").get<std::string>();
            row.battles = r.at("battles").get<std::int64_t>();
            row.wins = r.at("wins").get<std::int64_t>();
            row.ties = r.at("ties").get<std::int64_t>();
            row.losses = r.at("losses").get<std::int64_t>();
            rows.push_back(row);
        }
        std::vector<cf::HeadToHead> h2hs;
        for (const auto& h : counts.at("head_to_heads")) {
            h2hs.push_back(cf::HeadToHead::from_counts(
                h.at("model_a").get<std::string>(), h.at("model_b").get<std::string>(),
                h.at("a_wins").get<std::int64_t>(), h.at("b_wins").get<std::int64_t>(),
                h.at("ties").get<std::int64_t>(), h.at("n").get<std::int64_t>()));
        }
        report = cf::analyze_counts(rows, h2hs, cfg.value("alpha", 0.05));
    } else if (cfg.contains("battles")) {
        std::vector<cf::Battle> battles;
        std::ifstream in(cfg.at("battles").get<std::string>());
        if (!in) throw cf::DataError("cannot open battle log");
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded())
                throw cf::DataError("malformed battle at line " + std::to_string(line_no));
            battles.push_back(cf::battle_from_json(j));
        }
        const auto policy = cfg.value("tie_policy", std::string{"drop"}) == "half"
                                ? cf::TiePolicy::Half
                                : cf::TiePolicy::Drop;
        report = cf::analyze(battles, cfg.value("alpha", 0.05), policy);
    } else {
        throw cf::ConfigError("arena: config needs 'battles' (JSONL path) or 'counts'");
    }

    const json report_json = cf::to_json(report);
    json out;
    if (sub == "standings") {
        out = report_json.at("standings");
    } else if (sub == "h2h") {
        const auto a = cfg.at("model_a").get<std::string>();
        const auto b = cfg.at("model_b").get<std::string>();
        json matches = json::array();
        for (const auto& hh : report_json.at("head_to_heads")) {
            if ((hh["model_a"] == a && hh["model_b"] == b) ||
                (hh["model_a"] == b && hh["model_b"] == a))
                matches.push_back(hh);
        }
        if (matches.empty())
            throw cf::DataError("arena h2h: no battles between the given models");
        out = matches;
    } else if (sub == "rank") {
        out = json{{"strengths", report.strengths}, {"method", report.method}};
    } else {
        out = report_json;
    }

    const fs::path dir = fs::path(opts.out) / "arena";
    write_json_file(dir / "arena_report.json", report_json);
    write_text(dir / "arena_tables.txt", cf::render_tables(report));
    std::cout << out.dump(2) << "\n";
    if (sub == "report") std::cout << "\n" << cf::render_tables(report);

    if (opts.strict && !report.all_consistent()) {
        cf::log_error("arena: inconsistent head-to-head counts under --strict");
        return 4;
    }
    return 0;
}

// ---------------------------------------------------------------------------

int dispatch(CLI::App& app, const GlobalOpts& opts) {
    auto as_inputs = [](const std::vector<InputShard>& shards) -> json {
        json inputs = json::array();
        for (const auto& s : shards)
            inputs.push_back(json{{"path", s.path}, {"web_scraped", s.web_scraped}});
        return inputs;
    };

    if (app.got_subcommand("clean")) {
        stage_clean(load_config(opts), opts);
    } else if (app.got_subcommand("filter")) {
        stage_filter(load_config(opts), opts);
    } else if (app.got_subcommand("dedup")) {
        stage_dedup(load_config(opts), opts);
    } else if (app.got_subcommand("plan")) {
        stage_plan(load_config(opts), opts);
    } else if (app.got_subcommand("sample")) {
        stage_sample(load_config(opts), opts);
    } else if (app.got_subcommand("pack")) {
        stage_pack(load_config(opts), opts);
    } else if (app.got_subcommand("pipeline")) {
        json cfg = load_config(opts);
        std::vector<std::string> stages =
            cfg.contains("stages") ? cfg.at("stages").get<std::vector<std::string>>()
                                   : std::vector<std::string>{"clean", "filter", "dedup",
                                                              "plan", "sample", "pack"};
        const std::vector<std::string> order{"clean", "filter", "dedup", "plan", "sample", "pack"};
        json stage_cfg = cfg;
        for (const auto& stage : order) {  // pipeline order, whatever the flag order
            if (std::find(stages.begin(), stages.end(), stage) == stages.end()) continue;
            std::vector<InputShard> produced;
            if (stage == "clean") produced = stage_clean(stage_cfg, opts);
            else if (stage == "filter") produced = stage_filter(stage_cfg, opts);
            else if (stage == "dedup") produced = stage_dedup(stage_cfg, opts);
            else if (stage == "plan") produced = stage_plan(stage_cfg, opts);
            else if (stage == "sample") produced = stage_sample(stage_cfg, opts);
            else if (stage == "pack") {
                stage_pack(stage_cfg, opts);
                continue;
            }
            stage_cfg["inputs"] = as_inputs(produced);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corpusforge: corpus curation and curriculum planning toolkit"};
    app.require_subcommand(1);

    GlobalOpts opts;
    std::uint64_t seed_value = 0;
    app.add_option("--config", opts.config_path, "JSON config file");
    app.add_option("--seed", seed_value, "run seed (all stage randomness derives from it)");
    app.add_option("--workers", opts.workers, "worker threads (output is identical at any count)");
    app.add_option("--out", opts.out, "output directory");
    app.add_flag("--strict", opts.strict, "arena: exit 4 on inconsistent counts");

    for (const char* name : {"clean", "filter", "dedup", "plan", "sample", "pack", "pipeline"})
        app.add_subcommand(name)->fallthrough();

    auto* calc = app.add_subcommand("calc", "training-schedule calculators");
    calc->fallthrough();
    calc->require_subcommand(1);
    std::string hw_path, reference, shape_name = "cosine";
    double budget = 0.0, lr = 0.0;
    std::int64_t batch = 0, steps = 0, context = 0, stable = -1, decay = -1, step = -1,
                 points = 100;
    auto* calc_batch = calc->add_subcommand("batch", "tokens per optimizer step / derive GBS");
    calc_batch->fallthrough();
    calc_batch->add_option("--budget", budget);
    calc_batch->add_option("--steps", steps);
    calc_batch->add_option("--context", context);
    auto* calc_steps = calc->add_subcommand("steps", "steps for a token budget");
    calc_steps->fallthrough();
    calc_steps->add_option("--budget", budget)->required();
    auto* calc_noise = calc->add_subcommand("noise", "optimization noise scale");
    calc_noise->fallthrough();
    calc_noise->add_option("--lr", lr)->required();
    calc_noise->add_option("--batch", batch)->required();
    auto* calc_wsd = calc->add_subcommand("wsd", "warmup-stable-decay schedule");
    calc_wsd->fallthrough();
    calc_wsd->add_option("--stable", stable)->required();
    calc_wsd->add_option("--decay", decay)->required();
    calc_wsd->add_option("--step", step);
    calc_wsd->add_option("--points", points);
    calc_wsd->add_option("--shape", shape_name)->check(CLI::IsMember({"cosine", "linear"}));
    auto* calc_tp = calc->add_subcommand("throughput", "token rates from a hardware profile");
    calc_tp->fallthrough();
    calc_tp->add_option("--hw", hw_path)->required();
    auto* calc_project = calc->add_subcommand("project", "runtime/cost for a token budget");
    calc_project->fallthrough();
    calc_project->add_option("--hw", hw_path)->required();
    calc_project->add_option("--budget", budget)->required();
    auto* calc_validate = calc->add_subcommand("validate", "cross-check a training config");
    calc_validate->fallthrough();
    calc_validate->add_option("--reference", reference);

    auto* arena = app.add_subcommand("arena", "preference-arena analysis");
    arena->fallthrough();
    arena->require_subcommand(1);
    for (const char* name : {"standings", "h2h", "rank", "report"})
        arena->add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
        if (app.count("--seed")) opts.seed = seed_value;

        if (app.got_subcommand("calc")) {
            auto train_config = [&]() -> cf::TrainConfig {
                const json cfg = load_config(opts);
                if (cfg.empty()) throw cf::ConfigError("calc: --config with a train config needed");
                return cf::train_config_from_json(cfg);
            };
            json out;
            if (calc->got_subcommand("batch")) {
                if (budget > 0.0 && steps > 0 && context > 0) {
                    const auto d = cf::derive_gbs(static_cast<std::int64_t>(budget), steps, context);
                    out = {{"gbs", d.gbs},
                           {"gb_tokens", d.gb_tokens},
                           {"residual_tokens", d.residual_tokens}};
                } else {
                    out = {{"global_batch_tokens", cf::global_batch_tokens(train_config())}};
                }
            } else if (calc->got_subcommand("steps")) {
                const auto d =
                    cf::derive_steps(static_cast<std::int64_t>(budget), train_config());
                out = {{"steps", d.steps}, {"in_stable_regime", d.in_stable_regime}};
            } else if (calc->got_subcommand("noise")) {
                out = {{"noise_scale", cf::noise_scale(lr, batch)}};
            } else if (calc->got_subcommand("wsd")) {
                const auto cfg = train_config();
                const auto shape = shape_name == "linear" ? cf::DecayShape::Linear
                                                          : cf::DecayShape::Cosine;
                if (step >= 0) {
                    out = {{"step", step}, {"lr", cf::wsd_lr(step, cfg, stable, decay, shape)}};
                } else {
                    json schedule = json::array();
                    const std::int64_t n = std::min<std::int64_t>(points, cfg.total_iters);
                    for (std::int64_t i = 0; i <= n; ++i) {
                        const std::int64_t s = cfg.total_iters * i / std::max<std::int64_t>(n, 1);
                        schedule.push_back(
                            {{"step", s}, {"lr", cf::wsd_lr(s, cfg, stable, decay, shape)}});
                    }
                    out = {{"schedule", schedule}};
                }
            } else if (calc->got_subcommand("throughput")) {
                out = cf::to_json(cf::throughput(
                    cf::hardware_profile_from_json(load_json_file(hw_path))));
            } else if (calc->got_subcommand("project")) {
                out = cf::to_json(cf::project(
                    budget, cf::hardware_profile_from_json(load_json_file(hw_path))));
            } else if (calc->got_subcommand("validate")) {
                out = cf::to_json(cf::validate_config(train_config(), reference));
            }
            emit_report(opts, "calc", out);
            return 0;
        }
        if (app.got_subcommand("arena")) {
            for (const char* name : {"standings", "h2h", "rank", "report"})
                if (arena->got_subcommand(name)) return run_arena(name, opts);
            return 1;
        }
        return dispatch(app, opts);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const cf::InfeasiblePlanError& e) {
        cf::log_error(e.what());
        return 3;
    } catch (const cf::ConfigError& e) {
        cf::log_error(e.what());
        return 1;
    } catch (const cf::DataError& e) {
        cf::log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        cf::log_error(e.what());
        return 2;
    }
}
