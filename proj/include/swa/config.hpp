// SPDX-License-Identifier: Apache-2.0
//
// Flat key = value config files for the trainer. Lines starting with '#'
// (or anything after a '#') are comments. Every key is listed below;
// unknown or duplicate keys are rejected so typos fail loudly.
//
//   model.input_dim = 2            positive int
//   model.hidden_dims = 32,32      comma-separated positive ints (may be empty)
//   model.output_dim = 3           positive int (class count)
//   model.use_batchnorm = false    bool
//   dataset.generator = gaussian_blobs   gaussian_blobs | two_rings | csv_file
//   dataset.n_train = 2000         positive int
//   dataset.n_val = 500            positive int
//   dataset.noise_sigma = 0.9      non-negative
//   dataset.seed = 7               64-bit unsigned
//   dataset.csv_path = data.csv    csv_file generator only
//   seed = 1                       64-bit unsigned, training streams
//   batch_size = 32                positive int
//   optimizer.momentum = 0.9
//   optimizer.weight_decay = 0.0001
//   pretrain.base_lr = 0.02
//   pretrain.decay_epochs = 9,12   may be empty for a fixed lr
//   pretrain.decay_factor = 0.1
//   pretrain.epochs = 12
//   swa.lr_max = 0.02              optional; defaults to pretrain.base_lr
//   swa.lr_min = 0.0002            optional; defaults to the decayed final lr
//   swa.epochs = 12
//   checkpoint_dir = runs/exp1
//   save_pretrain_checkpoints = false
//   recompute_bn = false
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "swa/error.hpp"
#include "swa/io.hpp"
#include "swa/trainer.hpp"

namespace swa {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline std::int64_t config_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' needs an integer, got '" + value + "'");
    }
}

inline std::uint64_t config_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' needs an unsigned integer, got '" + value + "'");
    }
}

inline double config_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' needs a number, got '" + value + "'");
    }
}

inline bool config_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: key '" + key + "' needs true or false, got '" + value + "'");
}

inline std::vector<int> config_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::string rest = value;
    while (!rest.empty()) {
        const std::size_t comma = rest.find(',');
        const std::string cell = trim(rest.substr(0, comma));
        if (cell.empty()) {
            throw ConfigError("config: key '" + key + "' has an empty list element");
        }
        out.push_back(static_cast<int>(config_int(key, cell)));
        if (comma == std::string::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

inline DatasetKind config_generator(const std::string& value) {
    if (value == "gaussian_blobs") return DatasetKind::GaussianBlobs;
    if (value == "two_rings") return DatasetKind::TwoRings;
    if (value == "csv_file") return DatasetKind::CsvFile;
    throw ConfigError("config: unknown dataset.generator '" + value + "'");
}

} // namespace detail

/// Parse config text. Structural checks only; cross-field validation
/// happens in resolve_config once the dataset size is known.
inline TrainConfig parse_train_config_text(const std::string& text) {
    TrainConfig cfg;
    std::set<std::string> seen;

    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value', got '" + line +
                              "'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        if (!seen.insert(key).second) {
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }

        if (key == "model.input_dim") {
            cfg.model.input_dim = static_cast<int>(detail::config_int(key, value));
        } else if (key == "model.hidden_dims") {
            cfg.model.hidden_dims = detail::config_int_list(key, value);
        } else if (key == "model.output_dim") {
            cfg.model.output_dim = static_cast<int>(detail::config_int(key, value));
        } else if (key == "model.use_batchnorm") {
            cfg.model.use_batchnorm = detail::config_bool(key, value);
        } else if (key == "dataset.generator") {
            cfg.dataset.generator = detail::config_generator(value);
        } else if (key == "dataset.n_train") {
            cfg.dataset.n_train = static_cast<int>(detail::config_int(key, value));
        } else if (key == "dataset.n_val") {
            cfg.dataset.n_val = static_cast<int>(detail::config_int(key, value));
        } else if (key == "dataset.noise_sigma") {
            cfg.dataset.noise_sigma = detail::config_double(key, value);
        } else if (key == "dataset.seed") {
            cfg.dataset.seed = detail::config_u64(key, value);
        } else if (key == "dataset.csv_path") {
            cfg.dataset.csv_path = value;
        } else if (key == "seed") {
            cfg.seed = detail::config_u64(key, value);
        } else if (key == "batch_size") {
            cfg.batch_size = static_cast<int>(detail::config_int(key, value));
        } else if (key == "optimizer.momentum") {
            cfg.optimizer.momentum = detail::config_double(key, value);
        } else if (key == "optimizer.weight_decay") {
            cfg.optimizer.weight_decay = detail::config_double(key, value);
        } else if (key == "pretrain.base_lr") {
            cfg.pretrain.base_lr = detail::config_double(key, value);
        } else if (key == "pretrain.decay_epochs") {
            cfg.pretrain.decay_epochs = detail::config_int_list(key, value);
        } else if (key == "pretrain.decay_factor") {
            cfg.pretrain.decay_factor = detail::config_double(key, value);
        } else if (key == "pretrain.epochs") {
            cfg.pretrain.total_epochs = static_cast<int>(detail::config_int(key, value));
        } else if (key == "swa.lr_max") {
            cfg.swa_cycles.lr_max = detail::config_double(key, value);
        } else if (key == "swa.lr_min") {
            cfg.swa_cycles.lr_min = detail::config_double(key, value);
        } else if (key == "swa.epochs") {
            cfg.swa_epochs = static_cast<int>(detail::config_int(key, value));
        } else if (key == "checkpoint_dir") {
            cfg.checkpoint_dir = value;
        } else if (key == "save_pretrain_checkpoints") {
            cfg.save_pretrain_checkpoints = detail::config_bool(key, value);
        } else if (key == "recompute_bn") {
            cfg.recompute_bn = detail::config_bool(key, value);
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

inline TrainConfig load_train_config(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_binary_file(path);
    return parse_train_config_text(std::string(bytes.begin(), bytes.end()));
}

} // namespace swa
