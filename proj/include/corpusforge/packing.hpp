// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "corpusforge/corpus.hpp"
#include "corpusforge/errors.hpp"

namespace corpusforge {

/// One piece of a context window. doc_id "" marks a boundary filler between
/// documents in concat mode.
struct Segment {
    std::string doc_id;
    std::int64_t start_offset = 0;  // tokens into the source document
    std::int64_t length = 0;
};

struct PackedSequence {
    std::int64_t context_length = 0;
    std::vector<Segment> segments;
    std::int64_t pad_tokens = 0;

    std::int64_t filled() const {
        std::int64_t sum = 0;
        for (const auto& s : segments) sum += s.length;
        return sum;
    }
};

struct PackingReport {
    std::int64_t sequences = 0;
    double utilization = 1.0;  // non-pad tokens / total tokens
    std::int64_t docs_packed = 0;
    std::int64_t docs_oversize = 0;
};

struct ConcatOptions {
    std::int64_t boundary_tokens = 1;  // separator cost between adjacent documents
};

struct ConcatResult {
    std::vector<PackedSequence> sequences;
    PackingReport report;
};

/// Concatenation packing for pretraining streams: documents run back to back
/// in stream order, each followed by a boundary marker, chunked into
/// context-length windows. Documents may split across windows; only the final
/// window carries padding.
inline ConcatResult pack_concat(const std::vector<Document>& docs, std::int64_t context_length,
                                const ConcatOptions& opts = {}) {
    if (context_length < 1) throw ConfigError("pack_concat: context_length must be >= 1");
    if (opts.boundary_tokens < 0) throw ConfigError("pack_concat: boundary_tokens must be >= 0");

    ConcatResult out;
    PackedSequence current;
    current.context_length = context_length;
    std::int64_t room = context_length;

    auto flush = [&](std::int64_t pad) {
        current.pad_tokens = pad;
        out.sequences.push_back(std::move(current));
        current = PackedSequence{};
        current.context_length = context_length;
        room = context_length;
    };

    auto emit = [&](const std::string& doc_id, std::int64_t total) {
        std::int64_t offset = 0;
        while (offset < total) {
            const std::int64_t take = std::min(total - offset, room);
            current.segments.push_back({doc_id, offset, take});
            offset += take;
            room -= take;
            if (room == 0) flush(0);
        }
    };

    for (const auto& d : docs) {
        emit(d.id, d.token_count);
        if (opts.boundary_tokens > 0) emit("", opts.boundary_tokens);
        ++out.report.docs_packed;
    }
    if (room < context_length) flush(room);

    std::int64_t non_pad = 0, total = 0;
    for (const auto& s : out.sequences) {
        non_pad += s.filled();
        total += s.context_length;
    }
    out.report.sequences = static_cast<std::int64_t>(out.sequences.size());
    out.report.utilization =
        total == 0 ? 1.0 : static_cast<double>(non_pad) / static_cast<double>(total);
    return out;
}

struct BinSample {
    std::string id;
    std::int64_t length = 0;
};

struct BinPackResult {
    std::vector<PackedSequence> sequences;
    PackingReport report;
    std::vector<std::string> oversize_ids;
};

/// First-fit-decreasing bin packing for SFT samples: no sample is ever split,
/// and samples longer than the context are excluded and reported rather than
/// truncated. Deterministic: ties in length keep input order.
inline BinPackResult pack_bins(const std::vector<BinSample>& samples,
                               std::int64_t context_length) {
    if (context_length < 1) throw ConfigError("pack_bins: context_length must be >= 1");
    for (const auto& s : samples)
        if (s.length < 1)
            throw ConfigError("pack_bins: sample '" + s.id + "' has non-positive length");

    BinPackResult out;
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return samples[a].length > samples[b].length;
    });

    std::vector<std::int64_t> room;
    for (const std::size_t idx : order) {
        const auto& s = samples[idx];
        if (s.length > context_length) {
            out.oversize_ids.push_back(s.id);
            ++out.report.docs_oversize;
            continue;
        }
        std::size_t bin = room.size();
        for (std::size_t b = 0; b < room.size(); ++b) {
            if (room[b] >= s.length) {
                bin = b;
                break;
            }
        }
        if (bin == room.size()) {
            room.push_back(context_length);
            PackedSequence seq;
            seq.context_length = context_length;
            out.sequences.push_back(std::move(seq));
        }
        out.sequences[bin].segments.push_back({s.id, 0, s.length});
        room[bin] -= s.length;
        ++out.report.docs_packed;
    }

    std::int64_t non_pad = 0, total = 0;
    for (std::size_t b = 0; b < out.sequences.size(); ++b) {
        out.sequences[b].pad_tokens = room[b];
        non_pad += out.sequences[b].filled();
        total += context_length;
    }
    out.report.sequences = static_cast<std::int64_t>(out.sequences.size());
    out.report.utilization =
        total == 0 ? 1.0 : static_cast<double>(non_pad) / static_cast<double>(total);
    return out;
}

/// Convenience overload over raw token lengths; ids are synthesized s0, s1, ...
inline BinPackResult pack_bins(const std::vector<std::int64_t>& lengths,
                               std::int64_t context_length) {
    std::vector<BinSample> samples;
    samples.reserve(lengths.size());
    for (std::size_t i = 0; i < lengths.size(); ++i)
        samples.push_back({"s" + std::to_string(i), lengths[i]});
    return pack_bins(samples, context_length);
}

inline nlohmann::json to_json(const PackedSequence& seq) {
    nlohmann::json segments = nlohmann::json::array();
    for (const auto& s : seq.segments)
        segments.push_back(
            {{"doc_id", s.doc_id}, {"start_offset", s.start_offset}, {"length", s.length}});
    return {{"context_length", seq.context_length},
            {"segments", segments},
            {"pad_tokens", seq.pad_tokens}};
}

inline nlohmann::json to_json(const PackingReport& r) {
    return {{"sequences", r.sequences},
            {"utilization", r.utilization},
            {"docs_packed", r.docs_packed},
            {"docs_oversize", r.docs_oversize}};
}

}  // namespace corpusforge
