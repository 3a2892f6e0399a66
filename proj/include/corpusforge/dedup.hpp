// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "corpusforge/corpus.hpp"
#include "corpusforge/errors.hpp"
#include "corpusforge/minhash.hpp"
#include "corpusforge/parallel.hpp"
#include "corpusforge/union_find.hpp"

namespace corpusforge {

struct DedupParams {
    int k = 5;
    int num_hashes = 128;  // H
    int bands = 16;        // b
    int rows = 8;          // r
    double threshold = 0.7;
    std::uint64_t seed = 0;
    bool per_category = false;  // default: global across (lang, category) cells

    void check() const {
        if (k < 1) throw ConfigError("dedup: k must be >= 1");
        if (bands < 1 || rows < 1) throw ConfigError("dedup: bands and rows must be >= 1");
        if (bands * rows != num_hashes)
            throw ConfigError("dedup: bands * rows must equal H (" + std::to_string(bands) + "*" +
                              std::to_string(rows) + " != " + std::to_string(num_hashes) + ")");
        if (!(threshold > 0.0 && threshold <= 1.0))
            throw ConfigError("dedup: threshold must be in (0,1]");
    }
};

struct DedupResult {
    std::set<std::string> kept;
    std::map<std::string, std::string> removed;            // doc_id -> representative
    std::vector<std::vector<std::string>> clusters;        // size >= 2, members sorted
};

/// Banding index: signatures are split into `bands` bands of `rows` positions;
/// each band hashes into a bucket keyed by (band index, band hash).
class LSHIndex {
public:
    LSHIndex(int bands, int rows) : bands_(bands), rows_(rows) {
        if (bands < 1 || rows < 1) throw ConfigError("LSHIndex: bands and rows must be >= 1");
    }

    void insert(std::size_t doc_index, const MinHashSignature& sig) {
        if (sig.mins.size() != static_cast<std::size_t>(bands_ * rows_))
            throw ConfigError("LSHIndex: signature length does not match bands * rows");
        for (int band = 0; band < bands_; ++band) {
            buckets_[{band, band_hash(sig, band)}].push_back(doc_index);
        }
    }

    /// All unordered index pairs sharing at least one bucket, sorted, unique.
    std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs() const {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& [key, members] : buckets_) {
            for (std::size_t i = 0; i < members.size(); ++i)
                for (std::size_t j = i + 1; j < members.size(); ++j)
                    pairs.emplace_back(std::min(members[i], members[j]),
                                       std::max(members[i], members[j]));
        }
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        return pairs;
    }

    const std::map<std::pair<int, std::uint64_t>, std::vector<std::size_t>>& buckets() const {
        return buckets_;
    }

private:
    std::uint64_t band_hash(const MinHashSignature& sig, int band) const {
        std::uint64_t h = mix64(0xBA5EBA11ULL ^ static_cast<std::uint64_t>(band) * 0x9E3779B97F4A7C15ULL);
        for (int r = 0; r < rows_; ++r)
            h = mix64(h ^ sig.mins[static_cast<std::size_t>(band * rows_ + r)]);
        return h;
    }

    int bands_;
    int rows_;
    std::map<std::pair<int, std::uint64_t>, std::vector<std::size_t>> buckets_;
};

namespace detail {

/// Core single-group dedup over documents sorted by id.
inline void dedup_group(const std::vector<const Document*>& docs, const DedupParams& params,
                        int workers, UnionFind& uf,
                        const std::vector<std::size_t>& global_index) {
    // Shingle and sign in parallel; indexing and clustering stay sequential so
    // the result is bit-identical for any worker count.
    struct Prepared {
        std::string canon;
        ShingleSet set;
        bool has_signature = false;
        MinHashSignature sig;
    };
    auto prepared = parallel_map(
        docs,
        [&](const Document* d) {
            auto p = std::make_shared<Prepared>();
            p->canon = canonicalize_for_shingles(d->text);
            p->set = shingles(d->text, params.k, params.seed, d->id);
            if (!p->set.hashes.empty()) {
                p->sig = signature(p->set, params.num_hashes, params.seed);
                p->has_signature = true;
            }
            return p;
        },
        workers);

    // Exact duplicates (including shingle-less short documents) collapse by
    // canonical text equality.
    std::map<std::string_view, std::vector<std::size_t>> exact_groups;
    for (std::size_t i = 0; i < docs.size(); ++i)
        exact_groups[prepared[i]->canon].push_back(i);
    for (const auto& [canon, members] : exact_groups)
        for (std::size_t m = 1; m < members.size(); ++m)
            uf.unite(global_index[members[0]], global_index[members[m]]);

    LSHIndex index(params.bands, params.rows);
    for (std::size_t i = 0; i < docs.size(); ++i)
        if (prepared[i]->has_signature) index.insert(i, prepared[i]->sig);

    for (const auto& [i, j] : index.candidate_pairs()) {
        if (jaccard_estimate(prepared[i]->sig, prepared[j]->sig) >= params.threshold)
            uf.unite(global_index[i], global_index[j]);
    }
}

}  // namespace detail

/// MinHash/LSH near-duplicate removal.
///
/// Candidate pairs share at least one LSH bucket; a pair is confirmed when the
/// signature-estimated Jaccard reaches the threshold. Confirmed pairs (plus
/// exact canonical-text matches) are clustered by connected components, and
/// the lexicographically smallest id in each cluster survives. Input order
/// does not affect the result.
inline DedupResult dedup(const std::vector<Document>& corpus, const DedupParams& params,
                         int workers = 1) {
    params.check();

    std::vector<const Document*> sorted;
    sorted.reserve(corpus.size());
    for (const auto& d : corpus) sorted.push_back(&d);
    std::sort(sorted.begin(), sorted.end(),
              [](const Document* a, const Document* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i]->id == sorted[i - 1]->id)
            throw DataError("dedup: duplicate doc id '" + sorted[i]->id + "'");

    UnionFind uf(sorted.size());
    if (!params.per_category) {
        std::vector<std::size_t> identity(sorted.size());
        for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
        detail::dedup_group(sorted, params, workers, uf, identity);
    } else {
        std::map<CellKey, std::pair<std::vector<const Document*>, std::vector<std::size_t>>> cells;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            auto& cell = cells[CellKey{sorted[i]->lang, sorted[i]->category}];
            cell.first.push_back(sorted[i]);
            cell.second.push_back(i);
        }
        for (auto& [key, cell] : cells)
            detail::dedup_group(cell.first, params, workers, uf, cell.second);
    }

    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t i = 0; i < sorted.size(); ++i) components[uf.find(i)].push_back(i);

    DedupResult result;
    for (const auto& [root, members] : components) {
        // Members are in index order, which is id order.
        const std::string& rep = sorted[members.front()]->id;
        result.kept.insert(rep);
        if (members.size() > 1) {
            std::vector<std::string> cluster;
            cluster.reserve(members.size());
            for (const auto m : members) cluster.push_back(sorted[m]->id);
            for (std::size_t m = 1; m < members.size(); ++m)
                result.removed[sorted[members[m]]->id] = rep;
            result.clusters.push_back(std::move(cluster));
        }
    }
    std::sort(result.clusters.begin(), result.clusters.end());
    return result;
}

inline nlohmann::json to_json(const DedupParams& p) {
    return {{"k", p.k},       {"H", p.num_hashes},      {"bands", p.bands},
            {"rows", p.rows}, {"threshold", p.threshold}, {"seed", p.seed},
            {"per_category", p.per_category}};
}

inline DedupParams dedup_params_from_json(const nlohmann::json& j) {
    DedupParams p;
    p.k = j.value("k", p.k);
    p.num_hashes = j.value("H", p.num_hashes);
    p.bands = j.value("bands", p.bands);
    p.rows = j.value("rows", p.rows);
    p.threshold = j.value("threshold", p.threshold);
    p.seed = j.value("seed", p.seed);
    p.per_category = j.value("per_category", p.per_category);
    p.check();
    return p;
}

/// Dedup report: parameters, counts, a capped cluster sample, and the removed
/// map (full map optionally spilled to a JSONL sidecar by the CLI).
inline nlohmann::json dedup_report_json(const DedupResult& r, const DedupParams& p,
                                        std::size_t cluster_sample_cap = 32) {
    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t i = 0; i < r.clusters.size() && i < cluster_sample_cap; ++i)
        clusters.push_back(r.clusters[i]);
    nlohmann::json removed = nlohmann::json::object();
    for (const auto& [id, rep] : r.removed) removed[id] = rep;
    return {{"params", to_json(p)},
            {"kept_count", r.kept.size()},
            {"removed_count", r.removed.size()},
            {"cluster_count", r.clusters.size()},
            {"clusters", clusters},
            {"removed", removed}};
}

}  // namespace corpusforge
