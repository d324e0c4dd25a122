#pragma once

#include <stdexcept>
#include <string>

namespace mccs {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad user-supplied parameters (lambda weights, wavelet levels, config files).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Operand shapes that do not fit together.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// Numerical precondition violated (non-PSD covariance, non-finite iterate, ...).
class NumericError : public Error {
  public:
    using Error::Error;
};

class SolverError : public NumericError {
  public:
    using NumericError::NumericError;
};

class IoError : public Error {
  public:
    IoError(const std::string &path, const std::string &what)
        : Error(path + ": " + what), path_(path) {}
    const std::string &path() const noexcept { return path_; }

  private:
    std::string path_;
};

/// Container parse failures; the subclasses let callers tell them apart.
class ParseError : public IoError {
  public:
    using IoError::IoError;
};

class HeaderError : public ParseError {
  public:
    using ParseError::ParseError;
};

class PayloadLengthError : public ParseError {
  public:
    using ParseError::ParseError;
};

class InvariantError : public ParseError {
  public:
    using ParseError::ParseError;
};

} // namespace mccs
