// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace memlab {

/// Base for every error raised by the library. Each subclass maps onto one
/// CLI exit code (see tools/memlab.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad hyperparameters, unknown preset, conflicting
/// stopping criteria.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered in a forward value, loss, or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed model input (token id out of range, sequence too long).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Corpus or annotation ingestion failure.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. replaying a consumed tape.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures, including short writes on a full disk.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace memlab
