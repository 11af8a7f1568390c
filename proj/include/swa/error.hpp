// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace swa {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure (open/read/write/rename), message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

/// Structurally invalid checkpoint file or CSV/config content.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Checkpoint file declares a dtype this library does not handle.
class UnsupportedDtypeError : public Error {
public:
    using Error::Error;
};

/// Two checkpoints disagree on tensor names, shapes or dtypes.
class IncompatibleError : public Error {
public:
    using Error::Error;
};

/// Query argument outside the domain declared by a spec (epoch, iteration, alpha).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Non-finite value or undefined statistic encountered during numerics.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Invalid specification or configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace swa
