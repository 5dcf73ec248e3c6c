// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace onelap {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode : int {
  Ok = 0,
  ContractViolation = 1,
  OrderingViolation = 2,
  MonotonicityViolation = 3,
  Numerical = 4,
  Config = 5,
  Io = 6,
  InvalidCertificate = 7,
  Refused = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ContractViolation : Error {
  explicit ContractViolation(const std::string& w)
      : Error(ErrorCode::ContractViolation, w) {}
};

struct OrderingViolation : Error {
  explicit OrderingViolation(const std::string& w)
      : Error(ErrorCode::OrderingViolation, w) {}
};

/// Carries the iteration trace (CSV) collected up to the failing step.
struct MonotonicityViolation : Error {
  MonotonicityViolation(const std::string& w, std::string trace_csv)
      : Error(ErrorCode::MonotonicityViolation, w), trace(std::move(trace_csv)) {}
  std::string trace;
};

/// Request outside the admissible range (e.g. lambda above lambda_bar).
struct Refused : Error {
  explicit Refused(const std::string& w) : Error(ErrorCode::Refused, w) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error(ErrorCode::Numerical, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCode::Config, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::Io, w) {}
};

struct InvalidCertificate : Error {
  explicit InvalidCertificate(const std::string& w)
      : Error(ErrorCode::InvalidCertificate, w) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

}  // namespace onelap
