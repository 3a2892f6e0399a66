// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"

#include "corpusforge/errors.hpp"

namespace corpusforge {

struct TrainConfig {
    std::int64_t context_length = 8192;
    std::int64_t global_batch_sequences = 2048;  // GBS
    std::int64_t micro_batch_sequences = 4;      // MBS
    double peak_lr = 5e-5;
    double min_lr = 5e-6;
    std::int64_t warmup_iters = 0;
    std::int64_t total_iters = 0;
    double moe_aux_loss_coeff = 0.0;
    int tp = 1;
    int pp = 1;
    int ep = 1;

    void check() const {
        if (context_length < 1 || global_batch_sequences < 1 || micro_batch_sequences < 1)
            throw ConfigError("train config: context/GBS/MBS must be >= 1");
        if (min_lr > peak_lr) throw ConfigError("train config: min_lr must be <= peak_lr");
        if (warmup_iters > total_iters)
            throw ConfigError("train config: warmup_iters must be <= total_iters");
        if (global_batch_sequences % micro_batch_sequences != 0)
            throw ConfigError("train config: GBS must be divisible by MBS");
    }
};

struct HardwareProfile {
    std::string name;
    int gpus = 1;
    double tokens_per_step = 0.0;
    double step_time_seconds = 0.0;
    double cost_per_day = 0.0;

    void check() const {
        if (gpus < 1 || tokens_per_step <= 0.0 || step_time_seconds <= 0.0 || cost_per_day < 0.0)
            throw ConfigError("hardware profile: gpus/tokens_per_step/step_time must be positive");
    }
};

struct Projection {
    double tokens_per_sec_gpu = 0.0;
    double tokens_per_sec_total = 0.0;
    double days_for_budget = 0.0;
    double cost_for_budget = 0.0;
};

/// Tokens consumed per optimizer step: GBS * context length.
inline std::int64_t global_batch_tokens(const TrainConfig& cfg) {
    cfg.check();
    return cfg.global_batch_sequences * cfg.context_length;
}

struct GbsDerivation {
    std::int64_t gbs = 0;
    double gb_tokens = 0.0;          // token budget per optimizer step
    std::int64_t residual_tokens = 0;  // D - gbs * context * steps
};

/// Batch-size derivation from a token budget and a desired step count:
/// per-step tokens = D / n_steps, then GBS = round(per-step tokens / context).
inline GbsDerivation derive_gbs(std::int64_t total_tokens, std::int64_t n_steps,
                                std::int64_t context_length) {
    if (total_tokens < 1 || context_length < 1)
        throw ConfigError("derive_gbs: tokens and context must be positive");
    if (n_steps < 1) throw ConfigError("derive_gbs: n_steps must be >= 1");
    GbsDerivation d;
    d.gb_tokens = static_cast<double>(total_tokens) / static_cast<double>(n_steps);
    d.gbs = std::llround(d.gb_tokens / static_cast<double>(context_length));
    d.residual_tokens = total_tokens - d.gbs * context_length * n_steps;
    return d;
}

struct StepsDerivation {
    std::int64_t steps = 0;
    bool in_stable_regime = false;
};

/// Steps needed for a token budget at the config's batch geometry.
/// The stable-regime band is 25k-100k steps anchored to a 250B-token stage,
/// scaled linearly with the budget.
inline StepsDerivation derive_steps(std::int64_t total_tokens, const TrainConfig& cfg) {
    if (total_tokens < 0) throw ConfigError("derive_steps: negative token budget");
    const std::int64_t gbt = global_batch_tokens(cfg);
    StepsDerivation d;
    d.steps = (total_tokens + gbt - 1) / gbt;
    const double scale = static_cast<double>(total_tokens) / 250e9;
    d.in_stable_regime = static_cast<double>(d.steps) >= 25000.0 * scale &&
                         static_cast<double>(d.steps) <= 100000.0 * scale;
    return d;
}

/// Effective optimization noise eta / sqrt(B).
inline double noise_scale(double lr, std::int64_t batch) {
    if (lr < 0.0) throw ConfigError("noise_scale: negative learning rate");
    if (batch < 1) throw ConfigError("noise_scale: batch must be >= 1");
    return lr / std::sqrt(static_cast<double>(batch));
}

enum class DecayShape { Cosine, Linear };

/// Warmup-Stable-Decay schedule value at `step`.
///
/// Linear ramp 0 -> peak over [0, warmup], constant peak over the stable
/// window, then peak -> min over the decay window (cosine by default, linear
/// by flag). Continuous at both joins; step == total_iters lands on min_lr.
inline double wsd_lr(std::int64_t step, const TrainConfig& cfg, std::int64_t stable_iters,
                     std::int64_t decay_iters, DecayShape shape = DecayShape::Cosine) {
    cfg.check();
    if (stable_iters < 0 || decay_iters < 0)
        throw ConfigError("wsd_lr: stable/decay iterations must be >= 0");
    if (cfg.warmup_iters + stable_iters + decay_iters != cfg.total_iters)
        throw ConfigError("wsd_lr: warmup + stable + decay must equal total_iters");
    if (step < 0 || step > cfg.total_iters)
        throw ConfigError("wsd_lr: step " + std::to_string(step) + " outside [0, " +
                          std::to_string(cfg.total_iters) + "]");

    if (step < cfg.warmup_iters) {
        return cfg.peak_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_iters);
    }
    if (step <= cfg.warmup_iters + stable_iters) return cfg.peak_lr;

    const double progress = static_cast<double>(step - cfg.warmup_iters - stable_iters) /
                            static_cast<double>(decay_iters);
    if (shape == DecayShape::Linear) return cfg.peak_lr + (cfg.min_lr - cfg.peak_lr) * progress;
    return cfg.min_lr +
           (cfg.peak_lr - cfg.min_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

/// Cluster and per-GPU token rates from a measured step time.
inline Projection throughput(const HardwareProfile& hw) {
    hw.check();
    Projection p;
    p.tokens_per_sec_total = hw.tokens_per_step / hw.step_time_seconds;
    p.tokens_per_sec_gpu = p.tokens_per_sec_total / static_cast<double>(hw.gpus);
    return p;
}

/// Runtime and cost projection for a token budget on the given hardware.
inline Projection project(double budget_tokens, const HardwareProfile& hw) {
    if (budget_tokens < 0.0) throw ConfigError("project: negative budget");
    Projection p = throughput(hw);
    p.days_for_budget = budget_tokens / (p.tokens_per_sec_total * 86400.0);
    p.cost_for_budget = p.days_for_budget * hw.cost_per_day;
    return p;
}

struct Finding {
    std::string id;
    std::string severity;  // "ok" | "note" | "mismatch"
    std::string message;
};

namespace detail {

struct ReferenceConfig {
    std::int64_t context_length;
    std::int64_t gbs;
    std::int64_t mbs;
    std::int64_t iterations;
    double table_lr;       // as printed in the hyperparameter table
    double text_peak_lr;   // as stated in the running text
    double text_min_lr;
    double moe_aux_loss_coeff;
    int tp, pp, ep;
    int devices;  // total GPUs in the reference setup; 0 when not specified
};

/// Shipped reference configs (mirrored by the fixtures/ JSON files).
inline const ReferenceConfig* reference_config(const std::string& id) {
    static const ReferenceConfig stage12{8192, 2048, 4, 4700, 1e-4, 5e-5, 5e-6, 0.002, 1, 2, 4, 0};
    static const ReferenceConfig stage3{65536, 256, 4, 140, 1e-4, 5e-5, 5e-6, 0.002, 1, 2, 4, 0};
    static const ReferenceConfig sft{65536, 256, 8, 1150, 5e-5, 5e-5, 5e-6, 0.0, 4, 2, 2, 32};
    if (id == "table5_stage12") return &stage12;
    if (id == "table5_stage3") return &stage3;
    if (id == "table6_sft") return &sft;
    return nullptr;
}

inline std::string fmt_tokens(std::int64_t v) {
    std::string s = std::to_string(v);
    for (int pos = static_cast<int>(s.size()) - 3; pos > 0; pos -= 3)
        s.insert(static_cast<std::size_t>(pos), ",");
    return s;
}

}  // namespace detail

/// Cross-checks a config against one of the shipped reference tables and its
/// own internal consistency. Emits one finding per check; mismatches and the
/// reference tables' known internal learning-rate discrepancy are surfaced,
/// never resolved silently.
inline std::vector<Finding> validate_config(const TrainConfig& cfg,
                                            const std::string& reference = "") {
    std::vector<Finding> findings;

    if (cfg.global_batch_sequences % cfg.micro_batch_sequences != 0) {
        findings.push_back({"gbs_mbs_divisibility", "mismatch",
                            "GBS " + std::to_string(cfg.global_batch_sequences) +
                                " is not divisible by MBS " +
                                std::to_string(cfg.micro_batch_sequences)});
    } else {
        findings.push_back({"gbs_mbs_divisibility", "ok",
                            "GBS/MBS = " + std::to_string(cfg.global_batch_sequences /
                                                          cfg.micro_batch_sequences) +
                                " micro-steps per optimizer step"});
    }

    const std::int64_t gbt = cfg.global_batch_sequences * cfg.context_length;
    {
        const double mtok = static_cast<double>(gbt) / 1e6;
        const bool near = std::abs(mtok - 16.7) < 0.2;
        findings.push_back({"tokens_per_batch", near ? "ok" : "note",
                            detail::fmt_tokens(gbt) + " tokens per batch (" +
                                std::to_string(mtok).substr(0, 5) + "M)" +
                                (near ? " ~= 16.7M, consistent across stages" : "")});
    }

    if (const auto* ref = detail::reference_config(reference)) {
        auto check_int = [&](const char* id, std::int64_t got, std::int64_t want) {
            if (got == want)
                findings.push_back({id, "ok", std::string(id) + " matches reference (" +
                                                  std::to_string(want) + ")"});
            else
                findings.push_back({id, "mismatch", std::string(id) + " = " + std::to_string(got) +
                                                        ", reference has " +
                                                        std::to_string(want)});
        };
        check_int("context_length", cfg.context_length, ref->context_length);
        check_int("global_batch_sequences", cfg.global_batch_sequences, ref->gbs);
        check_int("micro_batch_sequences", cfg.micro_batch_sequences, ref->mbs);
        if (cfg.total_iters > 0) check_int("total_iters", cfg.total_iters, ref->iterations);
        check_int("tensor_parallel", cfg.tp, ref->tp);
        check_int("pipeline_parallel", cfg.pp, ref->pp);
        check_int("expert_parallel", cfg.ep, ref->ep);

        if (ref->table_lr != ref->text_peak_lr) {
            findings.push_back(
                {"lr_discrepancy", "note",
                 "reference table lists learning rate " + std::to_string(ref->table_lr) +
                     " while the accompanying text specifies peak " +
                     std::to_string(ref->text_peak_lr) + " / min " +
                     std::to_string(ref->text_min_lr) +
                     "; the sources disagree and this tool does not arbitrate"});
        }

        const int parallel_product = ref->tp * ref->pp * ref->ep;
        if (ref->devices > 0) {
            const int dp = ref->devices / parallel_product;
            findings.push_back(
                {"parallelism", dp * parallel_product == ref->devices ? "ok" : "mismatch",
                 "TPxPPxEP = " + std::to_string(parallel_product) + " over " +
                     std::to_string(ref->devices) + " devices -> data-parallel degree " +
                     std::to_string(dp)});
        } else {
            findings.push_back({"parallelism", "note",
                                "TPxPPxEP = " + std::to_string(parallel_product) +
                                    "; reference does not state the device count"});
        }
    } else if (!reference.empty()) {
        findings.push_back({"reference", "mismatch", "unknown reference table: " + reference});
    }

    return findings;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.context_length = j.value("context_length", cfg.context_length);
    cfg.global_batch_sequences = j.value("global_batch_sequences", cfg.global_batch_sequences);
    cfg.micro_batch_sequences = j.value("micro_batch_sequences", cfg.micro_batch_sequences);
    cfg.peak_lr = j.value("peak_lr", cfg.peak_lr);
    cfg.min_lr = j.value("min_lr", cfg.min_lr);
    cfg.warmup_iters = j.value("warmup_iters", cfg.warmup_iters);
    cfg.total_iters = j.value("total_iters", cfg.total_iters);
    cfg.moe_aux_loss_coeff = j.value("moe_aux_loss_coeff", cfg.moe_aux_loss_coeff);
    cfg.tp = j.value("tp", cfg.tp);
    cfg.pp = j.value("pp", cfg.pp);
    cfg.ep = j.value("ep", cfg.ep);
    cfg.check();
    return cfg;
}

inline HardwareProfile hardware_profile_from_json(const nlohmann::json& j) {
    HardwareProfile hw;
    hw.name = j.value("name", std::string{});
    hw.gpus = j.value("gpus", hw.gpus);
    hw.tokens_per_step = j.value("tokens_per_step", hw.tokens_per_step);
    hw.step_time_seconds = j.value("step_time_seconds", hw.step_time_seconds);
    hw.cost_per_day = j.value("cost_per_day", hw.cost_per_day);
    hw.check();
    return hw;
}

/// Rounds to `digits` significant figures; used for report display only.
inline double round_sig(double v, int digits) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    const double magnitude = std::pow(10.0, digits - 1 - std::floor(std::log10(std::abs(v))));
    return std::round(v * magnitude) / magnitude;
}

/// Raw doubles plus a 3-significant-figure display block to match how such
/// projections are normally quoted.
inline nlohmann::json to_json(const Projection& p) {
    return {{"tokens_per_sec_gpu", p.tokens_per_sec_gpu},
            {"tokens_per_sec_total", p.tokens_per_sec_total},
            {"days_for_budget", p.days_for_budget},
            {"cost_for_budget", p.cost_for_budget},
            {"display",
             {{"tokens_per_sec_gpu", round_sig(p.tokens_per_sec_gpu, 3)},
              {"tokens_per_sec_total", round_sig(p.tokens_per_sec_total, 3)},
              {"days_for_budget", round_sig(p.days_for_budget, 3)},
              {"cost_for_budget", round_sig(p.cost_for_budget, 3)}}}};
}

inline nlohmann::json to_json(const std::vector<Finding>& findings) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : findings)
        arr.push_back({{"id", f.id}, {"severity", f.severity}, {"message", f.message}});
    return arr;
}

}  // namespace corpusforge
