#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hubflow {

// Base for every error raised by the library. Callers that only need a
// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Carries every individual problem found while validating an input, so a
// single load reports all bad zones/routes at once.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues);

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

class RankDeficientError : public Error {
 public:
  RankDeficientError(int period, const std::string& what)
      : Error(what), period_(period) {}

  int period() const { return period_; }

 private:
  int period_;
};

class DegreesOfFreedomError : public Error {
 public:
  using Error::Error;
};

}  // namespace hubflow
