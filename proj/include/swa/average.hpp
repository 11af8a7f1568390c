// SPDX-License-Identifier: Apache-2.0
//
// Streaming arithmetic mean over a window of checkpoints: the averaged model
// is mean(w_m .. w_n) taken elementwise over every floating-point tensor.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swa/error.hpp"
#include "swa/tensor_store.hpp"

namespace swa {

/// Predicate over tensor names; matching tensors are excluded from averaging
/// and carried verbatim from the first checkpoint.
using SkipPredicate = std::function<bool(const std::string&)>;

/// Glob matcher supporting `*` and `?`, for building skip predicates from
/// patterns like "bn*.running_*".
inline bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0, t = 0;
    std::size_t star = std::string_view::npos, star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_t = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

inline SkipPredicate name_glob(std::string pattern) {
    return [pattern = std::move(pattern)](const std::string& name) { return glob_match(pattern, name); };
}

/// Streaming accumulator for the mean of a sequence of compatible
/// checkpoints. Averaged tensors accumulate in 64-bit with the stable
/// recurrence mean += (x - mean) / count; skipped tensors keep the first
/// checkpoint's values bit-exactly. Single-owner; update sequentially.
class RunningAverage {
public:
    explicit RunningAverage(const Checkpoint& first, SkipPredicate skip = {}) : count_(1), first_(first) {
        for (const auto& [name, tensor] : first.tensors) {
            if (skip && skip(name)) {
                skipped_.insert(name);
            } else {
                std::vector<double> acc(tensor.size());
                for (std::size_t i = 0; i < acc.size(); ++i) {
                    acc[i] = tensor.at(i);
                }
                mean_.emplace(name, std::move(acc));
            }
        }
    }

    /// Absorb the next checkpoint. It must match the first one's tensor
    /// names, shapes and dtypes.
    void update(const Checkpoint& next) {
        require_compatible(first_, next, "running average update");
        ++count_;
        for (auto& [name, acc] : mean_) {
            const NamedTensor& tensor = *next.find(name);
            for (std::size_t i = 0; i < acc.size(); ++i) {
                acc[i] += (tensor.at(i) - acc[i]) / static_cast<double>(count_);
            }
        }
    }

    /// Produce the averaged checkpoint. Averaged tensors are emitted in
    /// out_dtype when given, otherwise in their source dtype; skipped tensors
    /// are copied verbatim either way. Metadata records the absorbed count.
    Checkpoint finalize(std::optional<DType> out_dtype = std::nullopt) const {
        Checkpoint out;
        for (const auto& [name, tensor] : first_.tensors) {
            if (skipped_.count(name)) {
                out.add(tensor);
                continue;
            }
            const std::vector<double>& acc = mean_.at(name);
            const DType dtype = out_dtype.value_or(tensor.dtype());
            if (dtype == DType::F32) {
                std::vector<float> values(acc.size());
                for (std::size_t i = 0; i < acc.size(); ++i) {
                    values[i] = static_cast<float>(acc[i]);
                }
                out.add(NamedTensor(name, tensor.shape(), std::move(values)));
            } else {
                out.add(NamedTensor(name, tensor.shape(), acc));
            }
        }
        out.metadata["swa_count"] = std::to_string(count_);
        return out;
    }

    std::int64_t count() const { return count_; }
    const std::set<std::string>& skipped_names() const { return skipped_; }

private:
    std::int64_t count_;
    Checkpoint first_;
    std::map<std::string, std::vector<double>> mean_;
    std::set<std::string> skipped_;
};

/// The epoch window [m, n] whose checkpoints are averaged, with one file per
/// epoch in order.
struct AveragingWindow {
    int m = 1;
    int n = 1;
    std::vector<std::filesystem::path> paths;
};

/// Stream the window's checkpoints through a RunningAverage and write the
/// result. Holds at most one input checkpoint plus the accumulator in
/// memory. Any read error or incompatibility aborts with the offending path.
inline std::filesystem::path average_window(const AveragingWindow& window, SkipPredicate skip,
                                            const std::filesystem::path& out_path,
                                            std::optional<DType> out_dtype = std::nullopt) {
    if (window.m > window.n) {
        throw ConfigError("averaging window: m must not exceed n");
    }
    if (window.paths.size() != static_cast<std::size_t>(window.n - window.m + 1)) {
        throw ConfigError("averaging window: expected " + std::to_string(window.n - window.m + 1) +
                          " paths, got " + std::to_string(window.paths.size()));
    }

    std::optional<RunningAverage> acc;
    for (const auto& path : window.paths) {
        try {
            const Checkpoint ckpt = read_checkpoint(path);
            if (!acc) {
                acc.emplace(ckpt, skip);
            } else {
                acc->update(ckpt);
            }
        } catch (const IncompatibleError& e) {
            throw IncompatibleError("while averaging '" + path.string() + "': " + e.what());
        } catch (const IoError& e) {
            throw IoError("while averaging '" + path.string() + "': " + e.what());
        } catch (const Error& e) {
            throw Error("while averaging '" + path.string() + "': " + e.what());
        }
    }

    Checkpoint result = acc->finalize(out_dtype);
    result.metadata["swa_window"] = std::to_string(window.m) + "-" + std::to_string(window.n);
    write_checkpoint(result, out_path);
    return out_path;
}

} // namespace swa
