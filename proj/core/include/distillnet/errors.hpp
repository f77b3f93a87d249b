#pragma once

#include <stdexcept>
#include <string>

namespace distillnet {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or layer shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A hyperparameter or argument is outside its domain (tau <= 0, p >= 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Audio or feature input cannot be ingested.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// A frame falls outside every labelled interval.
class LabelError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the offending line number (1-based, 0 if n/a).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Experiment, manifest or training configuration is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Metrics requested over an empty evaluation set.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Failures reading the DNKD container (checkpoints, feature caches, stats).
class ContainerError : public Error {
 public:
  enum class Kind { io, bad_magic, unsupported_version, corrupt_header, truncated, length_mismatch, checksum_mismatch };

  ContainerError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace distillnet
