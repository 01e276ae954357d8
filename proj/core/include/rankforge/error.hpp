#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (non-finite score, length mismatch, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A configuration value is out of its domain (T <= 0, margin <= 0, ...).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// An objective was asked to consume a batch of the wrong shape, or does not exist.
class DispatchError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergedRun : public Error {
 public:
  DivergedRun(std::size_t step, double last_finite_loss, const std::string& what)
      : Error("diverged at step " + std::to_string(step) + " (last finite loss " +
              std::to_string(last_finite_loss) + "): " + what),
        step_(step),
        last_finite_loss_(last_finite_loss) {}

  std::size_t step() const noexcept { return step_; }
  double last_finite_loss() const noexcept { return last_finite_loss_; }

 private:
  std::size_t step_;
  double last_finite_loss_;
};

/// Malformed text input. `line()` is 1-based; 0 means "not tied to a line".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& detail, const std::string& file = {})
      : Error(compose(file, line, detail)), line_(line), detail_(detail), file_(file) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& file() const noexcept { return file_; }

 private:
  static std::string compose(const std::string& file, std::size_t line, const std::string& detail) {
    if (file.empty()) return line > 0 ? "line " + std::to_string(line) + ": " + detail : detail;
    return file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + detail;
  }

  std::size_t line_;
  std::string detail_;
  std::string file_;
};

/// Experiment configuration problem; `key()` names the offending dotted key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A checkpoint file is corrupt or does not match the requested scorer shape.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace rankforge
