// SPDX-License-Identifier: Apache-2.0
//
// Deterministic training harness: a step-decay pretraining phase followed by
// a cyclical-lr phase that snapshots one checkpoint per cycle, plus the
// protocol driver that averages checkpoint windows and writes a report.
// Identical configs on the same platform produce byte-identical outputs;
// every random stream is derived from (seed, phase, epoch).
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "swa/average.hpp"
#include "swa/dataset.hpp"
#include "swa/error.hpp"
#include "swa/io.hpp"
#include "swa/model.hpp"
#include "swa/rng.hpp"
#include "swa/schedules.hpp"
#include "swa/tensor_store.hpp"

namespace swa {

struct OptimizerConfig {
    double momentum = 0.9;
    double weight_decay = 1e-4;
};

/// Everything a run needs. swa_cycles.lr_max/lr_min of 0 mean "derive from
/// the pretrain schedule" (its initial and final learning rates), and
/// cycle_len_iters of 0 means one cycle per epoch; both are resolved by
/// resolve_config once the dataset size is known.
struct TrainConfig {
    ModelSpec model;
    DatasetSpec dataset;
    std::uint64_t seed = 0;
    int batch_size = 32;
    OptimizerConfig optimizer;
    StepScheduleSpec pretrain;
    CosineCycleSpec swa_cycles{0.0, 0.0, 0, 0};
    int swa_epochs = 12;
    std::filesystem::path checkpoint_dir;
    bool save_pretrain_checkpoints = false;
    bool recompute_bn = false;
};

struct MetricsRow {
    int epoch = 0;
    std::string phase;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double lr = 0.0;  // learning rate at the first iteration of the epoch
};

struct RunArtifacts {
    std::vector<std::filesystem::path> pretrain_checkpoints;
    std::vector<std::filesystem::path> swa_checkpoints;
    std::vector<MetricsRow> metrics;
    std::filesystem::path metrics_csv;
    Parameters final_params;
    DataSplits splits;
};

namespace detail {

// Stream tags so init, pretrain shuffles and cycling shuffles never collide.
inline constexpr std::uint64_t kStreamInit = 0x1;
inline constexpr std::uint64_t kStreamPretrain = 0x2;
inline constexpr std::uint64_t kStreamSwa = 0x3;

inline std::string zero_pad3(int n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", n);
    return buf;
}

} // namespace detail

/// Validate and fill the derived fields (iterations per epoch, cycle
/// geometry, defaulted cyclical lr range). Returns the resolved copy.
inline TrainConfig resolve_config(const TrainConfig& cfg, int n_train) {
    TrainConfig r = cfg;
    validate(r.model);
    if (r.batch_size < 1) throw ConfigError("train: batch_size must be positive");
    if (r.model.use_batchnorm && r.batch_size < 2) {
        throw ConfigError("train: batch norm needs batch_size >= 2");
    }
    const int iters = n_train / r.batch_size;  // drop-last
    if (iters < 1) {
        throw ConfigError("train: batch_size " + std::to_string(r.batch_size) + " exceeds train split size " +
                          std::to_string(n_train));
    }
    r.pretrain.iters_per_epoch = iters;
    validate(r.pretrain);

    if (r.swa_epochs < 1) throw ConfigError("train: swa_epochs must be positive");
    if (r.swa_cycles.cycle_len_iters == 0) {
        r.swa_cycles.cycle_len_iters = iters;
    } else if (r.swa_cycles.cycle_len_iters != iters) {
        throw ConfigError("train: swa cycle length " + std::to_string(r.swa_cycles.cycle_len_iters) +
                          " must match iterations per epoch " + std::to_string(iters));
    }
    r.swa_cycles.num_cycles = r.swa_epochs;
    if (r.swa_cycles.lr_max == 0.0) r.swa_cycles.lr_max = r.pretrain.base_lr;
    if (r.swa_cycles.lr_min == 0.0) {
        double lr = r.pretrain.base_lr;
        for (std::size_t i = 0; i < r.pretrain.decay_epochs.size(); ++i) lr *= r.pretrain.decay_factor;
        r.swa_cycles.lr_min = lr;
    }
    validate(r.swa_cycles);
    if (r.checkpoint_dir.empty()) throw ConfigError("train: checkpoint_dir is required");
    return r;
}

namespace detail {

inline Matrix gather_batch(const Dataset& data, const std::vector<int>& order, int start, int count) {
    Matrix batch(count, data.dim);
    for (int i = 0; i < count; ++i) {
        const double* src = data.row(order[start + i]);
        std::copy(src, src + data.dim, batch.row(i));
    }
    return batch;
}

inline std::vector<int> gather_labels(const Dataset& data, const std::vector<int>& order, int start, int count) {
    std::vector<int> labels(count);
    for (int i = 0; i < count; ++i) labels[i] = data.y[order[start + i]];
    return labels;
}

// One epoch of minibatch SGD; lr_for_iter maps the 0-based iteration index
// within this epoch to a learning rate. Returns the mean minibatch loss.
template <typename LrFn>
double run_epoch(Parameters& params, const Dataset& train, const TrainConfig& cfg, std::uint64_t shuffle_seed,
                 LrFn&& lr_for_iter) {
    const int iters = cfg.pretrain.iters_per_epoch;
    std::vector<int> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    DetRng rng(shuffle_seed);
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (int it = 0; it < iters; ++it) {
        const Matrix batch = gather_batch(train, order, it * cfg.batch_size, cfg.batch_size);
        const std::vector<int> labels = gather_labels(train, order, it * cfg.batch_size, cfg.batch_size);
        LossAndGrad lg = loss_and_grad(params, batch, labels);
        sgd_step(params, lg.grad, lr_for_iter(it), cfg.optimizer.momentum, cfg.optimizer.weight_decay);
        if (cfg.model.use_batchnorm) update_running_stats(params, lg.bn_stats);
        loss_sum += lg.loss;
    }
    return loss_sum / iters;
}

inline std::filesystem::path save_epoch_checkpoint(const Parameters& params, const TrainConfig& cfg,
                                                   const std::string& phase, int epoch) {
    Checkpoint ckpt = to_checkpoint(params);
    ckpt.metadata["epoch"] = std::to_string(epoch);
    ckpt.metadata["phase"] = phase;
    ckpt.metadata["seed"] = std::to_string(cfg.seed);
    const std::filesystem::path path = cfg.checkpoint_dir / (phase + "_epoch_" + zero_pad3(epoch) + ".ckpt");
    write_checkpoint(ckpt, path);
    return path;
}

} // namespace detail

inline std::string metrics_csv_text(const std::vector<MetricsRow>& rows) {
    std::string out = "epoch,phase,train_loss,val_loss,val_acc,lr\n";
    for (const MetricsRow& r : rows) {
        out += std::to_string(r.epoch) + "," + r.phase + "," + format_g17(r.train_loss) + "," +
               format_g17(r.val_loss) + "," + format_g17(r.val_acc) + "," + format_g17(r.lr) + "\n";
    }
    return out;
}

/// Run both phases. Epoch numbering restarts per phase and matches the
/// checkpoint file names (swa_epoch_001.ckpt holds the weights after the
/// first cycle). The cycling phase writes one checkpoint per epoch; the
/// pretraining phase writes them only when save_pretrain_checkpoints is set.
inline RunArtifacts train(const TrainConfig& raw_cfg) {
    RunArtifacts out;
    out.splits = make_dataset(raw_cfg.dataset, raw_cfg.model.input_dim, raw_cfg.model.output_dim);
    const TrainConfig cfg = resolve_config(raw_cfg, out.splits.train.size());
    std::filesystem::create_directories(cfg.checkpoint_dir);

    Parameters params = init_parameters(cfg.model, mix_seed(cfg.seed, detail::kStreamInit));

    for (int epoch = 1; epoch <= cfg.pretrain.total_epochs; ++epoch) {
        const double lr = step_lr(cfg.pretrain, epoch);
        const double train_loss =
            detail::run_epoch(params, out.splits.train, cfg, mix_seed(cfg.seed, detail::kStreamPretrain, epoch),
                              [&](int) { return lr; });
        const EvalResult ev = evaluate(params, out.splits.val);
        out.metrics.push_back({epoch, "pretrain", train_loss, ev.loss, ev.accuracy, lr});
        if (cfg.save_pretrain_checkpoints) {
            out.pretrain_checkpoints.push_back(detail::save_epoch_checkpoint(params, cfg, "pretrain", epoch));
        }
    }

    const int iters = cfg.swa_cycles.cycle_len_iters;
    for (int epoch = 1; epoch <= cfg.swa_epochs; ++epoch) {
        const std::int64_t epoch_base = static_cast<std::int64_t>(epoch - 1) * iters;
        const double train_loss =
            detail::run_epoch(params, out.splits.train, cfg, mix_seed(cfg.seed, detail::kStreamSwa, epoch),
                              [&](int it) { return cyclical_cosine_lr(cfg.swa_cycles, epoch_base + it); });
        const EvalResult ev = evaluate(params, out.splits.val);
        out.metrics.push_back(
            {epoch, "swa", train_loss, ev.loss, ev.accuracy, cyclical_cosine_lr(cfg.swa_cycles, epoch_base)});
        out.swa_checkpoints.push_back(detail::save_epoch_checkpoint(params, cfg, "swa", epoch));
    }

    out.metrics_csv = cfg.checkpoint_dir / "metrics.csv";
    atomic_write_file(out.metrics_csv, metrics_csv_text(out.metrics));
    out.final_params = std::move(params);
    return out;
}

struct ReportRow {
    std::string entry;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct ProtocolReport {
    RunArtifacts run;
    std::vector<ReportRow> rows;
    std::filesystem::path report_csv;
    // Window label ("1-6") -> averaged checkpoint path, for later probing.
    std::map<std::string, std::filesystem::path> swa_paths;
};

inline std::string report_csv_text(const std::vector<ReportRow>& rows) {
    std::string out = "entry,val_loss,val_acc\n";
    for (const ReportRow& r : rows) {
        out += r.entry + "," + format_g17(r.val_loss) + "," + format_g17(r.val_acc) + "\n";
    }
    return out;
}

/// Full protocol: train, evaluate every cycling-phase checkpoint from disk,
/// average the 1-6 window and the full window, optionally refresh BN
/// statistics of the averaged models over the train split, and write
/// report.csv next to the checkpoints.
inline ProtocolReport run_protocol(const TrainConfig& raw_cfg) {
    ProtocolReport report;
    report.run = train(raw_cfg);
    const TrainConfig cfg = resolve_config(raw_cfg, report.run.splits.train.size());

    for (int epoch = 1; epoch <= cfg.swa_epochs; ++epoch) {
        const Checkpoint ckpt = read_checkpoint(report.run.swa_checkpoints[epoch - 1]);
        const Parameters params = params_from_checkpoint(cfg.model, ckpt);
        const EvalResult ev = evaluate(params, report.run.splits.val);
        report.rows.push_back({"epoch_" + std::to_string(epoch), ev.loss, ev.accuracy});
    }

    std::vector<std::pair<int, int>> windows;
    if (cfg.swa_epochs >= 6) windows.emplace_back(1, 6);
    if (cfg.swa_epochs != 6) windows.emplace_back(1, cfg.swa_epochs);

    for (const auto& [m, n] : windows) {
        const std::string label = std::to_string(m) + "-" + std::to_string(n);
        AveragingWindow window;
        window.m = m;
        window.n = n;
        window.paths.assign(report.run.swa_checkpoints.begin() + (m - 1), report.run.swa_checkpoints.begin() + n);
        const std::filesystem::path avg_path =
            average_window(window, nullptr, cfg.checkpoint_dir / ("swa_" + label + ".ckpt"));
        report.swa_paths["swa_" + label] = avg_path;

        Parameters avg = params_from_checkpoint(cfg.model, read_checkpoint(avg_path));
        const EvalResult ev = evaluate(avg, report.run.splits.val);
        report.rows.push_back({"swa_" + label, ev.loss, ev.accuracy});

        if (cfg.recompute_bn && cfg.model.use_batchnorm) {
            recompute_bn_statistics(avg, report.run.splits.train);
            Checkpoint fixed = to_checkpoint(avg);
            fixed.metadata["swa_window"] = label;
            fixed.metadata["bn_recomputed"] = "true";
            const std::filesystem::path bn_path = cfg.checkpoint_dir / ("swa_" + label + "_bn.ckpt");
            write_checkpoint(fixed, bn_path);
            report.swa_paths["swa_" + label + "_bn"] = bn_path;
            const EvalResult ev_bn = evaluate(avg, report.run.splits.val);
            report.rows.push_back({"swa_" + label + "_bn_recomputed", ev_bn.loss, ev_bn.accuracy});
        }
    }

    report.report_csv = cfg.checkpoint_dir / "report.csv";
    atomic_write_file(report.report_csv, report_csv_text(report.rows));
    return report;
}

} // namespace swa
