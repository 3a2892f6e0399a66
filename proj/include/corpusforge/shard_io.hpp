// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "corpusforge/corpus.hpp"
#include "corpusforge/errors.hpp"
#include "corpusforge/parallel.hpp"

namespace corpusforge {

using json = nlohmann::json;

inline json to_json(const Document& d) {
    return json{{"id", d.id},
                {"text", d.text},
                {"lang", to_string(d.lang)},
                {"category", to_string(d.category)},
                {"source", d.source},
                {"word_count", d.word_count},
                {"token_count", d.token_count}};
}

/// Parses one shard record. Missing counts are computed; counts present in the
/// record win, which is how externally tokenized corpora plug in.
inline Document document_from_json(const json& j, const TokenCounterConfig& counter = {}) {
    Document d;
    d.id = j.at("id").get<std::string>();
    d.text = j.at("text").get<std::string>();
    d.lang = parse_lang(j.at("lang").get<std::string>());
    d.category = parse_category(j.at("category").get<std::string>());
    d.source = j.value("source", std::string{});
    d.word_count = j.contains("word_count") ? j.at("word_count").get<std::int64_t>()
                                            : count_words(d.text);
    d.token_count = j.contains("token_count") ? j.at("token_count").get<std::int64_t>()
                                              : count_tokens(d.text, counter);
    if (d.word_count < 0 || d.token_count < 0)
        throw DataError("negative count on document '" + d.id + "'");
    return d;
}

struct LineError {
    std::size_t line_number = 0;  // 1-based
    std::string message;
};

struct ShardReadResult {
    std::vector<Document> documents;
    std::vector<LineError> errors;
};

/// Streams documents out of a JSON Lines shard.
///
/// Malformed lines are recorded (with line numbers) and skipped; a duplicate
/// id within the shard throws DataError.
class ShardReader {
public:
    explicit ShardReader(const std::string& path, TokenCounterConfig counter = {})
        : path_(path), in_(path), counter_(counter) {
        if (!in_) throw DataError("cannot open shard: " + path);
    }

    std::optional<Document> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_number_;
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                errors_.push_back({line_number_, "malformed JSON"});
                continue;
            }
            Document d;
            try {
                d = document_from_json(j, counter_);
            } catch (const DataError& e) {
                errors_.push_back({line_number_, e.what()});
                continue;
            }
            if (!seen_ids_.insert(d.id).second)
                throw DataError("duplicate id '" + d.id + "' in shard " + path_ + " at line " +
                                std::to_string(line_number_));
            return d;
        }
        return std::nullopt;
    }

    const std::vector<LineError>& errors() const { return errors_; }

private:
    std::string path_;
    std::ifstream in_;
    TokenCounterConfig counter_;
    std::size_t line_number_ = 0;
    std::vector<LineError> errors_;
    std::unordered_set<std::string> seen_ids_;
};

inline ShardReadResult read_shard(const std::string& path, const TokenCounterConfig& counter = {}) {
    ShardReader reader(path, counter);
    ShardReadResult result;
    while (auto d = reader.next()) result.documents.push_back(std::move(*d));
    result.errors = reader.errors();
    return result;
}

template <typename Range>
inline void write_shard(const std::string& path, const Range& documents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open shard for writing: " + path);
    for (const Document& d : documents) {
        out << to_json(d).dump() << '\n';
    }
    if (!out) throw DataError("short write to shard: " + path);
}

namespace detail {

struct ManifestAccum {
    std::vector<ShardInfo> shards;
    std::map<CellKey, std::int64_t> totals;
    std::set<std::string> ids;

    /// Associative merge; parallel and sequential builds agree because shards
    /// are merged in input order.
    void merge(ManifestAccum&& other) {
        for (auto& s : other.shards) shards.push_back(std::move(s));
        for (const auto& [cell, tokens] : other.totals) totals[cell] += tokens;
        for (const auto& id : other.ids) {
            if (!ids.insert(id).second)
                throw DataError("duplicate id '" + id + "' across shards");
        }
    }
};

inline ManifestAccum scan_shard(const std::string& path, const TokenCounterConfig& counter) {
    ManifestAccum acc;
    ShardInfo info;
    info.path = path;
    ShardReader reader(path, counter);
    while (auto d = reader.next()) {
        ++info.doc_count;
        info.token_total += d->token_count;
        acc.totals[CellKey{d->lang, d->category}] += d->token_count;
        acc.ids.insert(d->id);
    }
    acc.shards.push_back(std::move(info));
    return acc;
}

}  // namespace detail

/// Scans shards (possibly in parallel) and aggregates per-cell token totals.
/// Duplicate ids across shards are fatal. Totals are independent of shard
/// order and worker count.
inline CorpusManifest build_manifest(const std::vector<std::string>& shard_paths,
                                     const TokenCounterConfig& counter = {},
                                     const std::string& pipeline_version = "corpusforge-0.1.0",
                                     const std::string& created_at = "",
                                     int workers = 1) {
    auto partials = parallel_map(
        shard_paths,
        [&](const std::string& path) {
            return std::make_shared<detail::ManifestAccum>(detail::scan_shard(path, counter));
        },
        workers);

    detail::ManifestAccum acc;
    for (auto& p : partials) acc.merge(std::move(*p));

    CorpusManifest m;
    m.shards = std::move(acc.shards);
    m.totals = std::move(acc.totals);
    m.created_at = created_at;
    m.pipeline_version = pipeline_version;
    return m;
}

inline json to_json(const CorpusManifest& m) {
    json shards = json::array();
    for (const auto& s : m.shards)
        shards.push_back(json{{"path", s.path}, {"doc_count", s.doc_count},
                              {"token_total", s.token_total}});
    json totals = json::object();
    for (const auto& [cell, tokens] : m.totals) totals[cell.str()] = tokens;
    return json{{"pipeline_version", m.pipeline_version},
                {"created_at", m.created_at},
                {"shards", shards},
                {"totals", totals},
                {"grand_total", m.grand_total()}};
}

inline CorpusManifest manifest_from_json(const json& j) {
    CorpusManifest m;
    m.pipeline_version = j.value("pipeline_version", std::string{});
    m.created_at = j.value("created_at", std::string{});
    if (j.contains("shards")) {
        for (const auto& s : j.at("shards")) {
            m.shards.push_back(ShardInfo{s.at("path").get<std::string>(),
                                         s.at("doc_count").get<std::int64_t>(),
                                         s.at("token_total").get<std::int64_t>()});
        }
    }
    for (const auto& [key, tokens] : j.at("totals").items())
        m.totals[CellKey::parse(key)] = tokens.get<std::int64_t>();
    return m;
}

inline json to_json(const PipelineStats& s) {
    json removed = json::object();
    for (const auto& [reason, n] : s.removed_by_reason) removed[reason] = n;
    return json{{"docs_in", s.docs_in},
                {"docs_out", s.docs_out},
                {"removed_by_reason", removed},
                {"tokens_in", s.tokens_in},
                {"tokens_out", s.tokens_out}};
}

}  // namespace corpusforge
