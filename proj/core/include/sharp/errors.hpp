#pragma once

#include <stdexcept>
#include <string>

namespace sharp {

/// Base class for all library failures. Operation contracts throw the
/// specific subtypes below; everything derives from std::runtime_error so
/// callers that do not care can catch a single type.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---- input / file shape ----------------------------------------------------

class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed record content. Messages name the offending line where the
/// input is line-oriented.
class SchemaError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// ---- taxonomy ---------------------------------------------------------------

class EmptyTaxonomy : public Error {
public:
  using Error::Error;
};

class PolicyUnsatisfiable : public Error {
public:
  using Error::Error;
};

// ---- prompt rendering -------------------------------------------------------

class MissingPlaceholder : public Error {
public:
  using Error::Error;
};

class InvalidConstraint : public Error {
public:
  using Error::Error;
};

// ---- completion backends ----------------------------------------------------

class BackendTimeout : public Error {
public:
  using Error::Error;
};

class BackendRejected : public Error {
public:
  BackendRejected(int status, const std::string& body_excerpt)
      : Error("backend rejected request with status " + std::to_string(status) +
              (body_excerpt.empty() ? "" : ": " + body_excerpt)),
        status_(status) {}
  int status() const { return status_; }

private:
  int status_;
};

class TruncatedOutput : public Error {
public:
  using Error::Error;
};

// ---- completion parsing -----------------------------------------------------

class MissingDelimiter : public Error {
public:
  using Error::Error;
};

class MissingAnswer : public Error {
public:
  using Error::Error;
};

class UnbalancedBraces : public Error {
public:
  using Error::Error;
};

class BoxedNotFound : public Error {
public:
  using Error::Error;
};

// ---- clustering / curation --------------------------------------------------

class BadK : public Error {
public:
  using Error::Error;
};

class GridTooSmall : public Error {
public:
  using Error::Error;
};

class MissingEmbedding : public Error {
public:
  using Error::Error;
};

// ---- numeric kernel ----------------------------------------------------------

class ShapeMismatch : public Error {
public:
  using Error::Error;
};

class NonFiniteInput : public Error {
public:
  using Error::Error;
};

// ---- pipeline ----------------------------------------------------------------

class StageFailure : public Error {
public:
  StageFailure(const std::string& stage, const std::string& checkpoint,
               const std::string& detail)
      : Error("stage '" + stage + "' failed: " + detail +
              (checkpoint.empty() ? "" : " (resume from " + checkpoint + ")")),
        stage_(stage),
        checkpoint_(checkpoint) {}
  const std::string& stage() const { return stage_; }
  const std::string& checkpoint() const { return checkpoint_; }

private:
  std::string stage_;
  std::string checkpoint_;
};

class ConfigDrift : public Error {
public:
  using Error::Error;
};

class CorruptCheckpoint : public Error {
public:
  using Error::Error;
};

}  // namespace sharp
