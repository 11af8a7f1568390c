// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swa/error.hpp"
#include "swa/rng.hpp"

namespace swa {

enum class DatasetKind { GaussianBlobs, TwoRings, CsvFile };

inline std::string to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::GaussianBlobs: return "gaussian_blobs";
        case DatasetKind::TwoRings: return "two_rings";
        case DatasetKind::CsvFile: return "csv_file";
    }
    return "?";
}

/// Synthetic (or CSV-backed) classification data source. Train and val
/// splits are disjoint and fully reproducible from the generation seed.
struct DatasetSpec {
    DatasetKind generator = DatasetKind::GaussianBlobs;
    int n_train = 0;
    int n_val = 0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::filesystem::path csv_path;  // only for csv_file
};

/// A fixed-order labelled sample set; features are row-major (n x dim).
struct Dataset {
    int dim = 0;
    int num_classes = 0;
    std::vector<double> x;
    std::vector<int> y;

    int size() const { return static_cast<int>(y.size()); }
    const double* row(int i) const { return x.data() + static_cast<std::size_t>(i) * dim; }
};

struct DataSplits {
    Dataset train;
    Dataset val;
};

namespace detail {

// Class centers sit on a circle of radius 2 in the first two feature
// dimensions (on a line for 1-d inputs); noise_sigma controls the overlap.
inline void gaussian_blob_sample(DetRng& rng, int dim, int num_classes, double noise_sigma, double* out_x,
                                 int* out_y) {
    const int label = static_cast<int>(rng.index(static_cast<std::uint64_t>(num_classes)));
    const double angle = 2.0 * 3.14159265358979323846 * label / num_classes;
    for (int d = 0; d < dim; ++d) {
        double center = 0.0;
        if (dim == 1) {
            center = 2.0 * label - (num_classes - 1);
        } else if (d == 0) {
            center = 2.0 * std::cos(angle);
        } else if (d == 1) {
            center = 2.0 * std::sin(angle);
        }
        out_x[d] = center + noise_sigma * rng.normal();
    }
    *out_y = label;
}

inline void two_rings_sample(DetRng& rng, double noise_sigma, double* out_x, int* out_y) {
    const int label = static_cast<int>(rng.index(2));
    const double radius = 1.0 + label + noise_sigma * rng.normal();
    const double angle = 2.0 * 3.14159265358979323846 * rng.unit();
    out_x[0] = radius * std::cos(angle);
    out_x[1] = radius * std::sin(angle);
    *out_y = label;
}

inline Dataset load_csv_dataset(const std::filesystem::path& path, int dim, int num_classes) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open dataset CSV: " + path.string());
    }
    Dataset data;
    data.dim = dim;
    data.num_classes = num_classes;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> fields;
        while (std::getline(ss, cell, ',')) {
            try {
                fields.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field '" + cell +
                                  "'");
            }
        }
        if (static_cast<int>(fields.size()) != dim + 1) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(dim + 1) + " fields, got " + std::to_string(fields.size()));
        }
        const int label = static_cast<int>(fields.back());
        if (label < 0 || label >= num_classes || fields.back() != label) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": label must be an integer in [0, " +
                              std::to_string(num_classes) + ")");
        }
        data.x.insert(data.x.end(), fields.begin(), fields.end() - 1);
        data.y.push_back(label);
    }
    return data;
}

} // namespace detail

/// Generate the train/val splits for a spec. Samples are drawn from one
/// seeded stream: the first n_train go to train, the next n_val to val.
inline DataSplits make_dataset(const DatasetSpec& spec, int dim, int num_classes) {
    if (spec.n_train <= 0 || spec.n_val <= 0) {
        throw ConfigError("dataset: n_train and n_val must be positive");
    }
    if (spec.noise_sigma < 0.0) {
        throw ConfigError("dataset: noise_sigma must be non-negative");
    }
    if (dim <= 0 || num_classes <= 1) {
        throw ConfigError("dataset: need dim >= 1 and at least 2 classes");
    }

    const int total = spec.n_train + spec.n_val;
    Dataset all;
    all.dim = dim;
    all.num_classes = num_classes;

    switch (spec.generator) {
        case DatasetKind::GaussianBlobs: {
            DetRng rng(mix_seed(spec.seed, 0xda7a));
            all.x.resize(static_cast<std::size_t>(total) * dim);
            all.y.resize(total);
            for (int i = 0; i < total; ++i) {
                detail::gaussian_blob_sample(rng, dim, num_classes, spec.noise_sigma, &all.x[static_cast<std::size_t>(i) * dim],
                                             &all.y[i]);
            }
            break;
        }
        case DatasetKind::TwoRings: {
            if (dim != 2 || num_classes != 2) {
                throw ConfigError("two_rings requires input_dim = 2 and output_dim = 2");
            }
            DetRng rng(mix_seed(spec.seed, 0xda7a));
            all.x.resize(static_cast<std::size_t>(total) * dim);
            all.y.resize(total);
            for (int i = 0; i < total; ++i) {
                detail::two_rings_sample(rng, spec.noise_sigma, &all.x[static_cast<std::size_t>(i) * dim], &all.y[i]);
            }
            break;
        }
        case DatasetKind::CsvFile: {
            all = detail::load_csv_dataset(spec.csv_path, dim, num_classes);
            if (all.size() < total) {
                throw ConfigError("dataset CSV has " + std::to_string(all.size()) + " rows, need " +
                                  std::to_string(total));
            }
            break;
        }
    }

    DataSplits splits;
    splits.train.dim = splits.val.dim = dim;
    splits.train.num_classes = splits.val.num_classes = num_classes;
    splits.train.x.assign(all.x.begin(), all.x.begin() + static_cast<std::ptrdiff_t>(spec.n_train) * dim);
    splits.train.y.assign(all.y.begin(), all.y.begin() + spec.n_train);
    splits.val.x.assign(all.x.begin() + static_cast<std::ptrdiff_t>(spec.n_train) * dim,
                        all.x.begin() + static_cast<std::ptrdiff_t>(total) * dim);
    splits.val.y.assign(all.y.begin() + spec.n_train, all.y.begin() + total);
    return splits;
}

} // namespace swa
