// SPDX-License-Identifier: Apache-2.0
//
// Named tensors, checkpoints, and their on-disk format.
//
// A checkpoint file has the following layout (all integers little-endian):
//   bytes 0..7   unsigned 64-bit N = byte length of the JSON header
//   bytes 8..8+N UTF-8 JSON object mapping tensor name ->
//                  {"dtype": "F32"|"F64", "shape": [ints], "data_offsets": [begin, end]}
//                plus an optional "__metadata__": {string: string} entry
//   bytes 8+N..  raw data region; offsets are relative to byte 8+N
//
// The data region holds row-major little-endian values, one contiguous
// non-overlapping block per tensor, laid out in table order (lexicographic by
// name). Writing the same checkpoint twice produces byte-identical files.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "swa/error.hpp"
#include "swa/io.hpp"

namespace swa {

enum class DType { F32, F64 };

inline std::size_t dtype_size(DType d) {
    return d == DType::F32 ? 4 : 8;
}

inline std::string_view dtype_name(DType d) {
    return d == DType::F32 ? "F32" : "F64";
}

inline std::optional<DType> dtype_from_name(std::string_view s) {
    if (s == "F32") return DType::F32;
    if (s == "F64") return DType::F64;
    return std::nullopt;
}

/// Element count implied by a shape. An empty shape means scalar (1 element);
/// any zero extent makes the tensor empty.
inline std::size_t num_elements(const std::vector<std::int64_t>& shape) {
    std::size_t n = 1;
    for (std::int64_t e : shape) {
        if (e < 0) {
            throw Error("tensor shape extents must be non-negative");
        }
        const auto u = static_cast<std::size_t>(e);
        if (u != 0 && n > (std::size_t{1} << 48) / u) {
            throw Error("tensor shape product is implausibly large");
        }
        n *= u;
    }
    return n;
}

/// A named, shaped, typed, row-major numeric array. F32 and F64 buffers are
/// stored as-is, so file round-trips are bit-exact.
class NamedTensor {
public:
    NamedTensor(std::string name, std::vector<std::int64_t> shape, std::vector<float> data)
        : name_(std::move(name)), shape_(std::move(shape)), data_(std::move(data)) {
        validate();
    }

    NamedTensor(std::string name, std::vector<std::int64_t> shape, std::vector<double> data)
        : name_(std::move(name)), shape_(std::move(shape)), data_(std::move(data)) {
        validate();
    }

    static NamedTensor scalar(std::string name, double value) {
        return NamedTensor(std::move(name), {}, std::vector<double>{value});
    }

    const std::string& name() const { return name_; }
    DType dtype() const { return std::holds_alternative<std::vector<float>>(data_) ? DType::F32 : DType::F64; }
    const std::vector<std::int64_t>& shape() const { return shape_; }

    std::size_t size() const {
        return dtype() == DType::F32 ? std::get<std::vector<float>>(data_).size()
                                     : std::get<std::vector<double>>(data_).size();
    }

    std::size_t byte_size() const { return size() * dtype_size(dtype()); }

    std::span<const float> f32() const { return std::get<std::vector<float>>(data_); }
    std::span<const double> f64() const { return std::get<std::vector<double>>(data_); }
    std::span<float> f32() { return std::get<std::vector<float>>(data_); }
    std::span<double> f64() { return std::get<std::vector<double>>(data_); }

    /// Widening read of element i.
    double at(std::size_t i) const {
        return dtype() == DType::F32 ? static_cast<double>(std::get<std::vector<float>>(data_)[i])
                                     : std::get<std::vector<double>>(data_)[i];
    }

    /// Narrowing write of element i (F32 targets round to nearest even).
    void set(std::size_t i, double v) {
        if (dtype() == DType::F32) {
            std::get<std::vector<float>>(data_)[i] = static_cast<float>(v);
        } else {
            std::get<std::vector<double>>(data_)[i] = v;
        }
    }

    bool same_layout(const NamedTensor& other) const {
        return dtype() == other.dtype() && shape_ == other.shape_;
    }

    bool operator==(const NamedTensor&) const = default;

private:
    void validate() const {
        if (name_.empty()) {
            throw Error("tensor name must be non-empty");
        }
        if (num_elements(shape_) != size()) {
            throw Error("tensor '" + name_ + "': shape product does not match element count");
        }
    }

    std::string name_;
    std::vector<std::int64_t> shape_;
    std::variant<std::vector<float>, std::vector<double>> data_;
};

/// An ordered map from tensor name to tensor plus free-form string metadata.
/// Iteration order over tensors is lexicographic by name. Checkpoints are
/// immutable after construction by convention and safe to share across
/// threads for reading.
struct Checkpoint {
    std::map<std::string, NamedTensor> tensors;
    std::map<std::string, std::string> metadata;

    void add(NamedTensor t) {
        if (t.name() == "__metadata__") {
            throw Error("tensor name '__metadata__' is reserved");
        }
        const std::string name = t.name();
        if (!tensors.emplace(name, std::move(t)).second) {
            throw Error("duplicate tensor name '" + name + "'");
        }
    }

    const NamedTensor* find(const std::string& name) const {
        auto it = tensors.find(name);
        return it == tensors.end() ? nullptr : &it->second;
    }

    bool operator==(const Checkpoint&) const = default;
};

namespace detail {

inline void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

inline void append_tensor_le(std::string& out, const NamedTensor& t) {
    if (t.dtype() == DType::F32) {
        for (float x : t.f32()) {
            std::uint32_t bits;
            std::memcpy(&bits, &x, 4);
            for (int i = 0; i < 4; ++i) {
                out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
            }
        }
    } else {
        for (double x : t.f64()) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, 8);
            for (int i = 0; i < 8; ++i) {
                out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
            }
        }
    }
}

inline std::uint64_t read_u64_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return v;
}

} // namespace detail

/// Serialize a checkpoint to the byte layout described at the top of this
/// file. The result is deterministic for a given checkpoint.
inline std::string serialize_checkpoint(const Checkpoint& ckpt) {
    using json = nlohmann::json;
    json header = json::object();

    std::uint64_t offset = 0;
    for (const auto& [name, tensor] : ckpt.tensors) {
        if (name != tensor.name()) {
            throw Error("checkpoint map key '" + name + "' does not match tensor name '" + tensor.name() + "'");
        }
        const std::uint64_t begin = offset;
        const std::uint64_t end = begin + tensor.byte_size();
        header[name] = {
            {"dtype", dtype_name(tensor.dtype())},
            {"shape", tensor.shape()},
            {"data_offsets", {begin, end}},
        };
        offset = end;
    }
    if (!ckpt.metadata.empty()) {
        header["__metadata__"] = ckpt.metadata;
    }

    const std::string header_bytes = header.dump();
    std::string out;
    out.reserve(8 + header_bytes.size() + offset);
    detail::append_u64_le(out, header_bytes.size());
    out += header_bytes;
    for (const auto& [name, tensor] : ckpt.tensors) {
        detail::append_tensor_le(out, tensor);
    }
    return out;
}

/// Write a checkpoint to disk (atomically: temp file + rename).
inline void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    atomic_write_file(path, serialize_checkpoint(ckpt));
}

/// Parse a checkpoint from an in-memory byte buffer, enforcing the full
/// structural contract (header bounds, offset table, dtype set).
inline Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>") {
    using json = nlohmann::json;

    if (bytes.size() < 8) {
        throw FormatError(origin + ": file too small to hold the 8-byte header length");
    }
    const std::uint64_t header_len = detail::read_u64_le(bytes.data());
    if (header_len > bytes.size() - 8) {
        throw FormatError(origin + ": header length " + std::to_string(header_len) +
                          " exceeds file size " + std::to_string(bytes.size()));
    }

    json header;
    try {
        header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len));
    } catch (const json::parse_error& e) {
        // e.byte is 1-based within the JSON text; report the absolute file offset.
        throw FormatError(origin + ": malformed header JSON at byte " + std::to_string(8 + e.byte - 1) + ": " +
                          e.what());
    }
    if (!header.is_object()) {
        throw FormatError(origin + ": header JSON is not an object");
    }

    const std::size_t data_size = bytes.size() - 8 - header_len;
    const std::uint8_t* data = bytes.data() + 8 + header_len;

    Checkpoint ckpt;
    std::uint64_t prev_end = 0;
    for (const auto& [name, entry] : header.items()) {
        if (name == "__metadata__") {
            if (!entry.is_object()) {
                throw FormatError(origin + ": __metadata__ is not an object");
            }
            for (const auto& [k, v] : entry.items()) {
                if (!v.is_string()) {
                    throw FormatError(origin + ": __metadata__ value for '" + k + "' is not a string");
                }
                ckpt.metadata[k] = v.get<std::string>();
            }
            continue;
        }
        if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") ||
            !entry.contains("data_offsets")) {
            throw FormatError(origin + ": tensor entry '" + name + "' missing dtype/shape/data_offsets");
        }
        if (!entry["dtype"].is_string()) {
            throw FormatError(origin + ": tensor '" + name + "' dtype is not a string");
        }
        const auto dtype = dtype_from_name(entry["dtype"].get<std::string>());
        if (!dtype) {
            throw UnsupportedDtypeError(origin + ": tensor '" + name + "' has unsupported dtype '" +
                                        entry["dtype"].get<std::string>() + "'");
        }
        if (!entry["shape"].is_array()) {
            throw FormatError(origin + ": tensor '" + name + "' shape is not an array");
        }
        std::vector<std::int64_t> shape;
        for (const auto& e : entry["shape"]) {
            if (!e.is_number_integer() || e.get<std::int64_t>() < 0) {
                throw FormatError(origin + ": tensor '" + name + "' has a non-integer or negative extent");
            }
            shape.push_back(e.get<std::int64_t>());
        }
        std::size_t count = 0;
        try {
            count = num_elements(shape);
        } catch (const Error& e) {
            throw FormatError(origin + ": tensor '" + name + "': " + e.what());
        }

        const auto& offs = entry["data_offsets"];
        if (!offs.is_array() || offs.size() != 2 || !offs[0].is_number_integer() || !offs[1].is_number_integer() ||
            offs[0].get<std::int64_t>() < 0 || offs[1].get<std::int64_t>() < 0) {
            throw FormatError(origin + ": tensor '" + name + "' data_offsets is not a [begin, end] pair");
        }
        const auto begin = offs[0].get<std::uint64_t>();
        const auto end = offs[1].get<std::uint64_t>();
        if (begin > end || end > data_size) {
            throw FormatError(origin + ": tensor '" + name + "' data_offsets [" + std::to_string(begin) + ", " +
                              std::to_string(end) + ") out of range for data region of " +
                              std::to_string(data_size) + " bytes");
        }
        if (begin < prev_end) {
            throw FormatError(origin + ": tensor '" + name + "' data range overlaps the previous tensor");
        }
        if (begin != prev_end) {
            throw FormatError(origin + ": tensor '" + name + "' data range leaves a gap (layout must be contiguous)");
        }
        if (end - begin != count * dtype_size(*dtype)) {
            throw FormatError(origin + ": tensor '" + name + "' byte range does not match shape and dtype");
        }
        prev_end = end;

        const std::uint8_t* p = data + begin;
        if (*dtype == DType::F32) {
            std::vector<float> values(count);
            for (std::size_t i = 0; i < count; ++i) {
                std::uint32_t bits = 0;
                for (int b = 0; b < 4; ++b) {
                    bits |= static_cast<std::uint32_t>(p[i * 4 + b]) << (8 * b);
                }
                std::memcpy(&values[i], &bits, 4);
            }
            ckpt.add(NamedTensor(name, std::move(shape), std::move(values)));
        } else {
            std::vector<double> values(count);
            for (std::size_t i = 0; i < count; ++i) {
                std::uint64_t bits = 0;
                for (int b = 0; b < 8; ++b) {
                    bits |= static_cast<std::uint64_t>(p[i * 8 + b]) << (8 * b);
                }
                std::memcpy(&values[i], &bits, 8);
            }
            ckpt.add(NamedTensor(name, std::move(shape), std::move(values)));
        }
    }
    if (prev_end != data_size) {
        throw FormatError(origin + ": data region has " + std::to_string(data_size - prev_end) +
                          " trailing bytes not covered by the tensor table");
    }
    return ckpt;
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
    const auto bytes = read_binary_file(path);
    return parse_checkpoint(bytes, path.string());
}

/// List compatibility problems between two checkpoints (missing names, shape
/// or dtype mismatches). Empty result means fully compatible.
inline std::vector<std::string> compatibility_issues(const Checkpoint& a, const Checkpoint& b) {
    std::vector<std::string> issues;
    for (const auto& [name, ta] : a.tensors) {
        const NamedTensor* tb = b.find(name);
        if (!tb) {
            issues.push_back("'" + name + "' missing from second checkpoint");
        } else if (ta.dtype() != tb->dtype()) {
            issues.push_back("'" + name + "' dtype mismatch");
        } else if (ta.shape() != tb->shape()) {
            issues.push_back("'" + name + "' shape mismatch");
        }
    }
    for (const auto& [name, tb] : b.tensors) {
        if (!a.find(name)) {
            issues.push_back("'" + name + "' missing from first checkpoint");
        }
    }
    return issues;
}

inline void require_compatible(const Checkpoint& a, const Checkpoint& b, const std::string& context) {
    const auto issues = compatibility_issues(a, b);
    if (issues.empty()) {
        return;
    }
    std::string msg = context + ": incompatible checkpoints:";
    for (const auto& i : issues) {
        msg += " " + i + ";";
    }
    msg.pop_back();
    throw IncompatibleError(msg);
}

/// Euclidean distance between two compatible checkpoints, accumulated in
/// 64-bit over every tensor element.
inline double checkpoint_l2_distance(const Checkpoint& a, const Checkpoint& b) {
    require_compatible(a, b, "checkpoint_l2_distance");
    double sum_sq = 0.0;
    for (const auto& [name, ta] : a.tensors) {
        const NamedTensor& tb = *b.find(name);
        const std::size_t n = ta.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = ta.at(i) - tb.at(i);
            sum_sq += d * d;
        }
    }
    return std::sqrt(sum_sq);
}

} // namespace swa
