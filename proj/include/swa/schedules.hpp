// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "swa/error.hpp"
#include "swa/io.hpp"

namespace swa {

/// Step-decay policy: the base rate is multiplied by decay_factor at each
/// listed epoch and stays constant within an epoch. An empty decay_epochs
/// list gives a fixed learning rate. Epochs are 1-indexed; the decayed rate
/// applies from the named epoch onward.
struct StepScheduleSpec {
    double base_lr = 0.0;
    std::vector<int> decay_epochs;
    double decay_factor = 0.1;
    int total_epochs = 0;
    int iters_per_epoch = 1;
};

inline void validate(const StepScheduleSpec& spec) {
    if (spec.base_lr <= 0.0) throw ConfigError("step schedule: base_lr must be positive");
    if (spec.decay_factor <= 0.0) throw ConfigError("step schedule: decay_factor must be positive");
    if (spec.total_epochs <= 0) throw ConfigError("step schedule: total_epochs must be positive");
    if (spec.iters_per_epoch <= 0) throw ConfigError("step schedule: iters_per_epoch must be positive");
    int prev = 0;
    for (int e : spec.decay_epochs) {
        if (e < 1 || e > spec.total_epochs) {
            throw ConfigError("step schedule: decay epoch " + std::to_string(e) + " outside [1, " +
                              std::to_string(spec.total_epochs) + "]");
        }
        if (e <= prev) throw ConfigError("step schedule: decay_epochs must be strictly ascending");
        prev = e;
    }
}

/// Learning rate for a 1-indexed epoch under a step schedule.
inline double step_lr(const StepScheduleSpec& spec, int epoch) {
    validate(spec);
    if (epoch < 1 || epoch > spec.total_epochs) {
        throw RangeError("step_lr: epoch " + std::to_string(epoch) + " outside [1, " +
                         std::to_string(spec.total_epochs) + "]");
    }
    double lr = spec.base_lr;
    for (int e : spec.decay_epochs) {
        if (e <= epoch) lr *= spec.decay_factor;
    }
    return lr;
}

/// Cyclical cosine annealing: within each cycle of cycle_len_iters
/// iterations the rate decays per-iteration from lr_max down to lr_min along
/// a cosine curve, then jumps back to lr_max at the next cycle.
struct CosineCycleSpec {
    double lr_max = 0.0;
    double lr_min = 0.0;
    int cycle_len_iters = 0;
    int num_cycles = 1;
};

inline void validate(const CosineCycleSpec& spec) {
    if (spec.lr_max <= 0.0) throw ConfigError("cosine schedule: lr_max must be positive");
    if (spec.lr_min <= 0.0) throw ConfigError("cosine schedule: lr_min must be positive");
    if (spec.lr_min > spec.lr_max) throw ConfigError("cosine schedule: lr_min must not exceed lr_max");
    if (spec.cycle_len_iters < 1) throw ConfigError("cosine schedule: cycle_len_iters must be at least 1");
    if (spec.num_cycles < 1) throw ConfigError("cosine schedule: num_cycles must be at least 1");
}

/// Learning rate at a 0-indexed global iteration. With t = iter mod T the
/// value is lr_min + (lr_max - lr_min) * (1 + cos(pi * t / (T - 1))) / 2,
/// endpoint-inclusive: t = 0 yields lr_max and t = T-1 yields lr_min. A
/// one-iteration cycle has no room to decay and returns lr_max.
inline double cyclical_cosine_lr(const CosineCycleSpec& spec, std::int64_t global_iter) {
    validate(spec);
    const std::int64_t total = static_cast<std::int64_t>(spec.cycle_len_iters) * spec.num_cycles;
    if (global_iter < 0 || global_iter >= total) {
        throw RangeError("cyclical_cosine_lr: iteration " + std::to_string(global_iter) + " outside [0, " +
                         std::to_string(total) + ")");
    }
    const std::int64_t t = global_iter % spec.cycle_len_iters;
    const std::int64_t T = spec.cycle_len_iters;
    if (T == 1 || t == 0) {
        return spec.lr_max;  // cos(0) analytically; exact even when lr_min + delta would round
    }
    if (t == T - 1) {
        return spec.lr_min;
    }
    const double cosine = std::cos(3.14159265358979323846 * static_cast<double>(t) / static_cast<double>(T - 1));
    return spec.lr_min + 0.5 * (spec.lr_max - spec.lr_min) * (1.0 + cosine);
}

struct SchedulePoint {
    std::int64_t iter = 0;
    double lr = 0.0;
};

/// Materialize the per-iteration curve of a step schedule. Iteration i
/// belongs to epoch i / iters_per_epoch + 1.
inline std::vector<SchedulePoint> emit_schedule(const StepScheduleSpec& spec, std::int64_t total_iters) {
    validate(spec);
    if (total_iters < 1) throw RangeError("emit_schedule: total_iters must be at least 1");
    std::vector<SchedulePoint> out;
    out.reserve(static_cast<std::size_t>(total_iters));
    for (std::int64_t i = 0; i < total_iters; ++i) {
        const int epoch = static_cast<int>(i / spec.iters_per_epoch) + 1;
        out.push_back({i, step_lr(spec, epoch)});
    }
    return out;
}

inline std::vector<SchedulePoint> emit_schedule(const CosineCycleSpec& spec, std::int64_t total_iters) {
    validate(spec);
    if (total_iters < 1) throw RangeError("emit_schedule: total_iters must be at least 1");
    std::vector<SchedulePoint> out;
    out.reserve(static_cast<std::size_t>(total_iters));
    for (std::int64_t i = 0; i < total_iters; ++i) {
        out.push_back({i, cyclical_cosine_lr(spec, i)});
    }
    return out;
}

/// CSV with header `iter,lr`, rates printed with 17 significant digits so a
/// reader recovers the exact doubles.
inline std::string schedule_csv(const std::vector<SchedulePoint>& points) {
    std::string out = "iter,lr\n";
    for (const auto& p : points) {
        out += std::to_string(p.iter);
        out += ',';
        out += format_g17(p.lr);
        out += '\n';
    }
    return out;
}

inline void write_schedule_csv(const std::vector<SchedulePoint>& points, const std::filesystem::path& path) {
    atomic_write_file(path, schedule_csv(points));
}

} // namespace swa
