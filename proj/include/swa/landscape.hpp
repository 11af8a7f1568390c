// SPDX-License-Identifier: Apache-2.0
//
// Loss-landscape probes over checkpoints: linear interpolation between two
// weight sets, and a sharpness proxy measuring mean loss increase under
// fixed-radius random perturbations. Probes are generic over a loss
// callback, so tests can hand in analytic losses instead of a model.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swa/average.hpp"
#include "swa/dataset.hpp"
#include "swa/error.hpp"
#include "swa/io.hpp"
#include "swa/model.hpp"
#include "swa/rng.hpp"
#include "swa/tensor_store.hpp"

namespace swa {

enum class ProbeKind { Interpolation, Sharpness };

inline const char* to_string(ProbeKind kind) {
    return kind == ProbeKind::Interpolation ? "interpolation" : "sharpness";
}

struct ProbeSummary {
    double loss_at_start = 0.0;
    double loss_at_end = 0.0;
    // Interpolation: loss at the middle grid point. Sharpness: loss at the
    // unperturbed weights.
    double loss_at_mid = 0.0;
    // Interpolation: mean loss minus the endpoint average (barrier height).
    // Sharpness: mean probe loss minus the base loss.
    double mean_loss_increase = 0.0;
};

/// One scan. For interpolation the grid holds the alpha values; for
/// sharpness it holds probe indices 0..2n-1, where direction k occupies 2k
/// (-radius) and 2k+1 (+radius), so both signs are always recorded.
struct ProbeResult {
    ProbeKind kind = ProbeKind::Interpolation;
    std::vector<double> grid;
    std::vector<double> losses;
    ProbeSummary summary;
};

/// Maps a candidate weight set to a scalar loss. The trainer adapter below
/// evaluates a model; tests can supply closed-form losses.
using CheckpointLoss = std::function<double(const Checkpoint&)>;

namespace detail {

inline Checkpoint blend_checkpoints(const Checkpoint& a, const Checkpoint& b, double alpha,
                                    const SkipPredicate& skip) {
    // Endpoints are verbatim copies so endpoint losses are bit-exact; with a
    // skip predicate the general path runs (skipped tensors stay w_a's).
    if (alpha == 0.0) return a;
    if (alpha == 1.0 && !skip) {
        Checkpoint out = b;
        out.metadata = a.metadata;
        return out;
    }
    Checkpoint out = a;
    for (auto& [name, tensor] : out.tensors) {
        if (skip && skip(name)) continue;
        const NamedTensor& tb = *b.find(name);
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            tensor.set(i, (1.0 - alpha) * tensor.at(i) + alpha * tb.at(i));
        }
    }
    return out;
}

} // namespace detail

/// Evaluate the loss along the segment (1 - alpha) * w_a + alpha * w_b for
/// each alpha. Skipped tensors are carried from w_a at every point. Alpha 0
/// and 1 reuse the inputs verbatim, so endpoint losses match direct
/// evaluation.
inline ProbeResult interpolate_loss(const Checkpoint& w_a, const Checkpoint& w_b, const std::vector<double>& alphas,
                                    const CheckpointLoss& loss, const SkipPredicate& skip = {}) {
    require_compatible(w_a, w_b, "interpolate_loss");
    if (alphas.empty()) {
        throw RangeError("interpolate_loss: alphas must be non-empty");
    }
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (alphas[i] < 0.0 || alphas[i] > 1.0) {
            throw RangeError("interpolate_loss: alpha " + format_g17(alphas[i]) + " outside [0, 1]");
        }
        if (i > 0 && alphas[i] <= alphas[i - 1]) {
            throw RangeError("interpolate_loss: alphas must be strictly increasing");
        }
    }

    ProbeResult result;
    result.kind = ProbeKind::Interpolation;
    result.grid = alphas;
    double sum = 0.0;
    for (double alpha : alphas) {
        const double l = loss(detail::blend_checkpoints(w_a, w_b, alpha, skip));
        result.losses.push_back(l);
        sum += l;
    }
    result.summary.loss_at_start = result.losses.front();
    result.summary.loss_at_end = result.losses.back();
    result.summary.loss_at_mid = result.losses[result.losses.size() / 2];
    result.summary.mean_loss_increase =
        sum / result.losses.size() - 0.5 * (result.summary.loss_at_start + result.summary.loss_at_end);
    return result;
}

/// Perturb w along n_dirs random unit directions at a fixed global L2
/// radius (measured over non-skipped tensors, concatenated in name order)
/// and evaluate both signs of every direction. The summary's
/// mean_loss_increase is the flatness proxy: mean probe loss minus the
/// loss at w. Fully deterministic in (w, radius, n_dirs, seed).
inline ProbeResult perturbation_sharpness(const Checkpoint& w, double radius, int n_dirs, const CheckpointLoss& loss,
                                          std::uint64_t seed, const SkipPredicate& skip = {}) {
    if (radius < 0.0) throw RangeError("perturbation_sharpness: radius must be non-negative");
    if (n_dirs < 1) throw RangeError("perturbation_sharpness: n_dirs must be positive");

    std::vector<const NamedTensor*> eligible;
    std::size_t total = 0;
    for (const auto& [name, tensor] : w.tensors) {
        if (skip && skip(name)) continue;
        eligible.push_back(&tensor);
        total += tensor.size();
    }
    if (total == 0) {
        throw ConfigError("perturbation_sharpness: no eligible elements to perturb");
    }

    ProbeResult result;
    result.kind = ProbeKind::Sharpness;
    const double base = loss(w);
    DetRng rng(mix_seed(seed, 0x5ca1e));

    double sum = 0.0;
    for (int k = 0; k < n_dirs; ++k) {
        std::vector<double> dir(total);
        double norm_sq = 0.0;
        for (double& x : dir) {
            x = rng.normal();
            norm_sq += x * x;
        }
        const double norm = std::sqrt(norm_sq);
        if (norm == 0.0) {
            throw NumericError("perturbation_sharpness: degenerate zero direction");
        }
        const double scale = radius / norm;

        for (double sign : {-1.0, 1.0}) {
            Checkpoint probe = w;
            std::size_t off = 0;
            for (const NamedTensor* src : eligible) {
                NamedTensor& dst = probe.tensors.find(src->name())->second;
                for (std::size_t i = 0; i < src->size(); ++i) {
                    dst.set(i, src->at(i) + sign * scale * dir[off + i]);
                }
                off += src->size();
            }
            const double l = loss(probe);
            result.grid.push_back(static_cast<double>(result.losses.size()));
            result.losses.push_back(l);
            sum += l;
        }
    }
    result.summary.loss_at_start = result.losses.front();
    result.summary.loss_at_end = result.losses.back();
    result.summary.loss_at_mid = base;
    result.summary.mean_loss_increase = sum / result.losses.size() - base;
    return result;
}

/// Loss adapter for real models: rebuilds parameters from each candidate
/// checkpoint and reports eval-mode loss on the given dataset.
inline CheckpointLoss make_validation_loss(const ModelSpec& spec, const Dataset& data) {
    return [spec, data](const Checkpoint& ckpt) {
        const Parameters params = params_from_checkpoint(spec, ckpt);
        return evaluate(params, data).loss;
    };
}

inline std::string probe_csv_text(const ProbeResult& result) {
    std::string out = "coord,loss\n";
    for (std::size_t i = 0; i < result.grid.size(); ++i) {
        out += format_g17(result.grid[i]) + "," + format_g17(result.losses[i]) + "\n";
    }
    return out;
}

inline void write_probe_csv(const std::filesystem::path& path, const ProbeResult& result) {
    atomic_write_file(path, probe_csv_text(result));
}

inline std::string probe_summary_json(const ProbeResult& result) {
    nlohmann::json j;
    j["kind"] = to_string(result.kind);
    j["n_points"] = result.losses.size();
    j["loss_at_start"] = result.summary.loss_at_start;
    j["loss_at_end"] = result.summary.loss_at_end;
    j["loss_at_mid"] = result.summary.loss_at_mid;
    j["mean_loss_increase"] = result.summary.mean_loss_increase;
    return j.dump(2) + "\n";
}

inline void write_probe_summary(const std::filesystem::path& path, const ProbeResult& result) {
    atomic_write_file(path, probe_summary_json(result));
}

} // namespace swa
