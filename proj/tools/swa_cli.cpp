// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: training, protocol runs, checkpoint averaging,
// schedule dumps, landscape probes, BN recomputation and evaluation.
// Exit codes: 0 success, 1 usage error, 2 data/numeric error. All file
// outputs are written to a temp file and renamed, so a failed invocation
// leaves no partial outputs behind.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swa/swa.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string rest = text;
    while (!rest.empty()) {
        const std::size_t comma = rest.find(',');
        const std::string cell = rest.substr(0, comma);
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != cell.size()) {
            throw swa::ConfigError("not a number: '" + cell + "'");
        }
        out.push_back(v);
        if (comma == std::string::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

std::optional<swa::DType> parse_dtype_flag(const std::string& flag) {
    if (flag.empty()) return std::nullopt;
    if (flag == "f32") return swa::DType::F32;
    if (flag == "f64") return swa::DType::F64;
    throw CLI::ValidationError("--out-dtype must be f32 or f64");
}

void setup_average(CLI::App& app) {
    auto* cmd = app.add_subcommand("average", "Average checkpoints into one (uniform window mean)");
    auto inputs = std::make_shared<std::vector<std::string>>();
    auto output = std::make_shared<std::string>();
    auto skip = std::make_shared<std::string>();
    auto dtype = std::make_shared<std::string>();
    cmd->add_option("--inputs", *inputs, "Input checkpoint paths, window order")->required()->expected(1, -1);
    cmd->add_option("--output", *output, "Output checkpoint path")->required();
    cmd->add_option("--skip", *skip, "Glob of tensor names to carry from the first input instead of averaging");
    cmd->add_option("--out-dtype", *dtype, "Force output dtype: f32 or f64");
    cmd->callback([=]() {
        swa::AveragingWindow window;
        window.m = 1;
        window.n = static_cast<int>(inputs->size());
        window.paths.assign(inputs->begin(), inputs->end());
        swa::SkipPredicate pred;
        if (!skip->empty()) pred = swa::name_glob(*skip);
        swa::average_window(window, pred, *output, parse_dtype_flag(*dtype));
        std::printf("averaged %zu checkpoints -> %s\n", inputs->size(), output->c_str());
    });
}

void setup_schedule(CLI::App& app) {
    auto* cmd = app.add_subcommand("schedule", "Write a learning-rate schedule as CSV (iter,lr)");
    auto kind = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto lr_max = std::make_shared<double>(0.0);
    auto lr_min = std::make_shared<double>(0.0);
    auto cycle_iters = std::make_shared<int>(0);
    auto cycles = std::make_shared<int>(1);
    auto base_lr = std::make_shared<double>(0.0);
    auto decay_epochs = std::make_shared<std::string>();
    auto decay_factor = std::make_shared<double>(0.1);
    auto epochs = std::make_shared<int>(0);
    auto iters_per_epoch = std::make_shared<int>(1);
    cmd->add_option("--kind", *kind, "cosine or step")->required()->check(CLI::IsMember({"cosine", "step"}));
    cmd->add_option("--out", *out, "Output CSV path")->required();
    cmd->add_option("--lr-max", *lr_max, "Cycle start lr (cosine)");
    cmd->add_option("--lr-min", *lr_min, "Cycle end lr (cosine)");
    cmd->add_option("--cycle-iters", *cycle_iters, "Iterations per cycle (cosine)");
    cmd->add_option("--cycles", *cycles, "Number of cycles (cosine)");
    cmd->add_option("--base-lr", *base_lr, "Initial lr (step)");
    cmd->add_option("--decay-epochs", *decay_epochs, "Comma-separated decay epochs (step)");
    cmd->add_option("--decay-factor", *decay_factor, "Multiplier at each decay (step)");
    cmd->add_option("--epochs", *epochs, "Total epochs (step)");
    cmd->add_option("--iters-per-epoch", *iters_per_epoch, "Iterations per epoch (step)");
    cmd->callback([=]() {
        std::vector<swa::SchedulePoint> points;
        if (*kind == "cosine") {
            if (*lr_max <= 0.0 || *lr_min <= 0.0 || *cycle_iters < 1 || *cycles < 1) {
                throw CLI::ValidationError("cosine schedule needs --lr-max, --lr-min, --cycle-iters, --cycles");
            }
            swa::CosineCycleSpec spec{*lr_max, *lr_min, *cycle_iters, *cycles};
            points = swa::emit_schedule(spec, static_cast<std::int64_t>(*cycle_iters) * *cycles);
        } else {
            if (*base_lr <= 0.0 || *epochs < 1 || *iters_per_epoch < 1) {
                throw CLI::ValidationError("step schedule needs --base-lr, --epochs, --iters-per-epoch");
            }
            swa::StepScheduleSpec spec;
            spec.base_lr = *base_lr;
            if (!decay_epochs->empty()) {
                for (double e : parse_double_list(*decay_epochs)) {
                    spec.decay_epochs.push_back(static_cast<int>(e));
                }
            }
            spec.decay_factor = *decay_factor;
            spec.total_epochs = *epochs;
            spec.iters_per_epoch = *iters_per_epoch;
            points = swa::emit_schedule(spec, static_cast<std::int64_t>(*epochs) * *iters_per_epoch);
        }
        swa::write_schedule_csv(points, *out);
        std::printf("wrote %zu schedule points -> %s\n", points.size(), out->c_str());
    });
}

void setup_train(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "Run the two-phase training protocol without averaging");
    auto config = std::make_shared<std::string>();
    cmd->add_option("--config", *config, "Config file (flat key = value)")->required();
    cmd->callback([=]() {
        const swa::TrainConfig cfg = swa::load_train_config(*config);
        const swa::RunArtifacts run = swa::train(cfg);
        std::printf("trained %d pretrain + %d swa epochs, %zu swa checkpoints, metrics -> %s\n",
                    cfg.pretrain.total_epochs, cfg.swa_epochs, run.swa_checkpoints.size(),
                    run.metrics_csv.string().c_str());
    });
}

void setup_run_protocol(CLI::App& app) {
    auto* cmd = app.add_subcommand("run-protocol", "Train, average checkpoint windows, evaluate, write report.csv");
    auto config = std::make_shared<std::string>();
    auto seeds = std::make_shared<int>(0);
    cmd->add_option("--config", *config, "Config file (flat key = value)")->required();
    cmd->add_option("--seeds", *seeds, "Run N seeds (base seed + k) into per-seed subdirectories");
    cmd->callback([=]() {
        const swa::TrainConfig base = swa::load_train_config(*config);
        if (*seeds <= 0) {
            const swa::ProtocolReport report = swa::run_protocol(base);
            std::printf("protocol report (%zu entries) -> %s\n", report.rows.size(),
                        report.report_csv.string().c_str());
            return;
        }
        std::string aggregate = "seed,entry,val_loss,val_acc\n";
        for (int k = 0; k < *seeds; ++k) {
            swa::TrainConfig cfg = base;
            cfg.seed = base.seed + static_cast<std::uint64_t>(k);
            cfg.dataset.seed = base.dataset.seed + static_cast<std::uint64_t>(k);
            cfg.checkpoint_dir = base.checkpoint_dir / ("seed_" + std::to_string(cfg.seed));
            const swa::ProtocolReport report = swa::run_protocol(cfg);
            for (const swa::ReportRow& row : report.rows) {
                aggregate += std::to_string(cfg.seed) + "," + row.entry + "," + swa::format_g17(row.val_loss) + "," +
                             swa::format_g17(row.val_acc) + "\n";
            }
        }
        std::filesystem::create_directories(base.checkpoint_dir);
        const std::filesystem::path out = base.checkpoint_dir / "aggregate.csv";
        swa::atomic_write_file(out, aggregate);
        std::printf("aggregate over %d seeds -> %s\n", *seeds, out.string().c_str());
    });
}

void setup_probe(CLI::App& app) {
    auto* cmd = app.add_subcommand("probe", "Loss-landscape probes (interpolation or sharpness)");
    auto kind = std::make_shared<std::string>();
    auto config = std::make_shared<std::string>();
    auto a_path = std::make_shared<std::string>();
    auto b_path = std::make_shared<std::string>();
    auto model_path = std::make_shared<std::string>();
    auto alphas_text = std::make_shared<std::string>();
    auto steps = std::make_shared<int>(11);
    auto radius = std::make_shared<double>(0.05);
    auto dirs = std::make_shared<int>(32);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto skip = std::make_shared<std::string>();
    auto out_csv = std::make_shared<std::string>();
    auto out_summary = std::make_shared<std::string>();
    cmd->add_option("--kind", *kind, "interpolate or sharpness")
        ->required()
        ->check(CLI::IsMember({"interpolate", "sharpness"}));
    cmd->add_option("--config", *config, "Config file; the probe evaluates loss on its validation split")->required();
    cmd->add_option("--a", *a_path, "First checkpoint (interpolate)");
    cmd->add_option("--b", *b_path, "Second checkpoint (interpolate)");
    cmd->add_option("--model", *model_path, "Checkpoint to perturb (sharpness)");
    cmd->add_option("--alphas", *alphas_text, "Comma-separated alphas in [0,1]; overrides --steps");
    cmd->add_option("--steps", *steps, "Uniform alpha count from 0 to 1 (interpolate)");
    cmd->add_option("--radius", *radius, "Perturbation L2 radius (sharpness)");
    cmd->add_option("--dirs", *dirs, "Number of random directions (sharpness)");
    cmd->add_option("--seed", *seed, "Probe direction seed (sharpness)");
    cmd->add_option("--skip", *skip, "Glob of tensor names left untouched by the probe");
    cmd->add_option("--out-csv", *out_csv, "Output CSV path (coord,loss)")->required();
    cmd->add_option("--out-summary", *out_summary, "Optional JSON summary path");
    cmd->callback([=]() {
        const swa::TrainConfig cfg = swa::load_train_config(*config);
        const swa::DataSplits splits = swa::make_dataset(cfg.dataset, cfg.model.input_dim, cfg.model.output_dim);
        const swa::CheckpointLoss loss = swa::make_validation_loss(cfg.model, splits.val);
        swa::SkipPredicate pred;
        if (!skip->empty()) pred = swa::name_glob(*skip);

        swa::ProbeResult result;
        if (*kind == "interpolate") {
            if (a_path->empty() || b_path->empty()) {
                throw CLI::ValidationError("interpolate needs --a and --b");
            }
            std::vector<double> alphas;
            if (!alphas_text->empty()) {
                alphas = parse_double_list(*alphas_text);
            } else {
                if (*steps < 2) throw CLI::ValidationError("--steps must be at least 2");
                for (int i = 0; i < *steps; ++i) {
                    alphas.push_back(static_cast<double>(i) / (*steps - 1));
                }
            }
            result = swa::interpolate_loss(swa::read_checkpoint(*a_path), swa::read_checkpoint(*b_path), alphas,
                                           loss, pred);
        } else {
            if (model_path->empty()) {
                throw CLI::ValidationError("sharpness needs --model");
            }
            result = swa::perturbation_sharpness(swa::read_checkpoint(*model_path), *radius, *dirs, loss, *seed,
                                                 pred);
        }
        swa::write_probe_csv(*out_csv, result);
        if (!out_summary->empty()) swa::write_probe_summary(*out_summary, result);
        std::printf("%s probe (%zu points, mean loss increase %s) -> %s\n", swa::to_string(result.kind),
                    result.losses.size(), swa::format_g17(result.summary.mean_loss_increase).c_str(),
                    out_csv->c_str());
    });
}

void setup_recompute_bn(CLI::App& app) {
    auto* cmd = app.add_subcommand("recompute-bn", "Recompute BN running statistics over the train split");
    auto config = std::make_shared<std::string>();
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    cmd->add_option("--config", *config, "Config file; provides the model spec and dataset")->required();
    cmd->add_option("--input", *input, "Checkpoint to refresh")->required();
    cmd->add_option("--output", *output, "Where to write the refreshed checkpoint")->required();
    cmd->callback([=]() {
        const swa::TrainConfig cfg = swa::load_train_config(*config);
        const swa::DataSplits splits = swa::make_dataset(cfg.dataset, cfg.model.input_dim, cfg.model.output_dim);
        const swa::Checkpoint in = swa::read_checkpoint(*input);
        swa::Parameters params = swa::params_from_checkpoint(cfg.model, in);
        swa::recompute_bn_statistics(params, splits.train);
        swa::Checkpoint out = swa::to_checkpoint(params);
        out.metadata = in.metadata;
        out.metadata["bn_recomputed"] = "true";
        swa::write_checkpoint(out, *output);
        std::printf("recomputed BN statistics over %d samples -> %s\n", splits.train.size(), output->c_str());
    });
}

void setup_eval(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the configured dataset");
    auto config = std::make_shared<std::string>();
    auto ckpt = std::make_shared<std::string>();
    auto split = std::make_shared<std::string>("val");
    cmd->add_option("--config", *config, "Config file; provides the model spec and dataset")->required();
    cmd->add_option("--checkpoint", *ckpt, "Checkpoint to evaluate")->required();
    cmd->add_option("--split", *split, "val or train")->check(CLI::IsMember({"val", "train"}));
    cmd->callback([=]() {
        const swa::TrainConfig cfg = swa::load_train_config(*config);
        const swa::DataSplits splits = swa::make_dataset(cfg.dataset, cfg.model.input_dim, cfg.model.output_dim);
        const swa::Dataset& data = (*split == "train") ? splits.train : splits.val;
        const swa::Parameters params =
            swa::params_from_checkpoint(cfg.model, swa::read_checkpoint(*ckpt));
        const swa::EvalResult ev = swa::evaluate(params, data);
        std::printf("%s loss=%s acc=%s\n", split->c_str(), swa::format_g17(ev.loss).c_str(),
                    swa::format_g17(ev.accuracy).c_str());
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic weight averaging toolkit: cyclical-lr training, checkpoint averaging, probes"};
    app.require_subcommand(1);
    setup_average(app);
    setup_schedule(app);
    setup_train(app);
    setup_run_protocol(app);
    setup_probe(app);
    setup_recompute_bn(app);
    setup_eval(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const swa::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
