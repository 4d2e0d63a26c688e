#pragma once

#include <stdexcept>
#include <string>

namespace adrobust {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A file exists but its contents are not a valid archive / model / config.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class MissingManifest : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Errors tied to one image of a dataset carry its id.
class SampleError : public FormatError {
 public:
  SampleError(std::string image_id, const std::string& what)
      : FormatError(what), image_id_(std::move(image_id)) {}
  const std::string& image_id() const noexcept { return image_id_; }

 private:
  std::string image_id_;
};

class ShapeMismatch : public SampleError {
 public:
  using SampleError::SampleError;
};

class NonFiniteValue : public SampleError {
 public:
  using SampleError::SampleError;
};

/// A requested feature level is not present.
class UnknownLevel : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A metric cannot be computed from the given input (e.g. single-class AUC).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

}  // namespace adrobust
