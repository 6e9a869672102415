#pragma once

#include <stdexcept>
#include <string>

namespace affectbench {

// Exit codes used by the CLI. Each error category maps to exactly one.
enum class ExitCode : int { success = 0, validation = 1, predictor = 2, io = 3 };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

/// Bad input: manifest, parameters, ranges, bounds.
class ValidationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::validation; }
};

/// Unreadable/unwritable files and undecodable images.
class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

class DecodeError : public IoError {
 public:
  using IoError::IoError;
};

/// Spawn failure, protocol violation, timeout, or crash of a predictor.
class PredictorError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::predictor; }
};

class ProtocolError : public PredictorError {
 public:
  using PredictorError::PredictorError;
};

}  // namespace affectbench
