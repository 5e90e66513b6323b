#pragma once

#include <stdexcept>
#include <string>

namespace agrifield {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Modbus request or frame that violates the protocol rules.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class TruncationError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Input file is readable but lacks required columns or fields.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A record failed validation; `field()` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace agrifield
