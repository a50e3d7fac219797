// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dfl {

/// Base for every error raised by the library. `exit_code()` is the process
/// exit status the CLI maps the error to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

/// Malformed input: syntax errors, unreadable files, bad flags.
class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Well-formed input that is semantically invalid (unknown operator,
/// parameter out of range, log_product misuse, ...).
class SemanticError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or arguments outside an operator's domain.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A hard resource cap was hit (e.g. world enumeration).
class CapacityError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

/// Syntax error with a 1-based source position.
class ParseError : public InputError {
 public:
  ParseError(const std::string& message, int line, int column)
      : InputError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace dfl
