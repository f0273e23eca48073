#pragma once

#include <stdexcept>
#include <string>

namespace squery {

struct SourceLoc {
  int line = 0;
  int column = 0;

  bool operator==(const SourceLoc&) const = default;
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An error tied to a position in scenario source text.
class SourceError : public Error {
 public:
  SourceError(const std::string& message, SourceLoc loc);

  SourceLoc loc() const { return loc_; }
  const std::string& message() const { return message_; }

 private:
  SourceLoc loc_;
  std::string message_;
};

class SyntaxError : public SourceError {
 public:
  using SourceError::SourceError;
};

/// Construct that parses but lies outside the supported fragment.
class UnsupportedFeature : public SourceError {
 public:
  using SourceError::SourceError;
};

class SemanticError : public SourceError {
 public:
  using SourceError::SourceError;
};

class TranslationError : public Error {
 public:
  using Error::Error;
};

class UnknownState : public Error {
 public:
  using Error::Error;
};

/// A guard or specifier needs an observation the current frame lacks.
class MissingFeature : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedGuard : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class UnsatisfiableScene : public Error {
 public:
  using Error::Error;
};

class NoAdjacentLane : public Error {
 public:
  using Error::Error;
};

}  // namespace squery
