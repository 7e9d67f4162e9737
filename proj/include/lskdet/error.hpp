// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lskdet {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (p_t <= 0, undefined GIoU, timestep out of range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or incomplete configuration (missing weights, bad names).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Shapes or cardinalities that do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed input files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lskdet
