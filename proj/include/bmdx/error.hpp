// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bmdx {

/// Broad failure class; the CLI maps it to a process exit code.
enum class ErrorKind {
  kValidation,  // malformed input, violated invariant, bad config
  kNumerical,   // undefined statistic, optimizer/registration failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Header/config/CSV parse failure. key() names the offending key or column.
class ParseError : public Error {
 public:
  ParseError(std::string key, const std::string& detail);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

class UnitMismatchError : public Error {
 public:
  explicit UnitMismatchError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

/// Least-squares problem without a unique solution (all abscissae equal).
class RankDeficiencyError : public Error {
 public:
  explicit RankDeficiencyError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

/// A statistic is undefined for the input (zero variance and the like).
class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

/// No pixel passed the intensity threshold.
class EmptyRegionError : public Error {
 public:
  explicit EmptyRegionError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

class RegistrationError : public Error {
 public:
  explicit RegistrationError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

}  // namespace bmdx
