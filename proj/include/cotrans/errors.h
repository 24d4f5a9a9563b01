#pragma once

#include <stdexcept>
#include <string>

namespace cotrans {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// No n-subset of the direction set represents the target with nonnegative
/// coefficients. Raised only when the positive-span precondition is violated.
class NoPositiveBasis : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class MaxIterations : public Error {
 public:
  using Error::Error;
};

class NoKktPoint : public Error {
 public:
  using Error::Error;
};

class Ambiguous : public Error {
 public:
  using Error::Error;
};

/// A robot center coincides with the object center, where the contact model
/// is undefined.
class CenterCoincidence : public Error {
 public:
  CenterCoincidence(int robot, double time, const std::string& what)
      : Error(what), robot_(robot), time_(time) {}

  int robot() const { return robot_; }
  double time() const { return time_; }

 private:
  int robot_;
  double time_;
};

/// Scenario is unusable: non-unit directions, nonpositive gains or radii,
/// malformed integration settings.
class HardInvalid : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string key, const std::string& what)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cotrans
