#pragma once

#include <stdexcept>
#include <string>

namespace htnagent {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed method-library document (bad JSON, missing field, numbering gap).
class LibraryFormatError : public Error {
 public:
  using Error::Error;
};

/// Raised by update_task when nested decomposition exceeds the depth guard.
class DecompositionDepthExceeded : public Error {
 public:
  using Error::Error;
};

/// Workspace manifest problems: duplicate paths, escapes, unwritable root.
class WorkspaceError : public Error {
 public:
  using Error::Error;
};

/// Misconfiguration that fails a whole run (e.g. solver interpreter missing).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Chat backend could not be reached after all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Scripted backend ran out of canned responses.
class ScriptedExhausted : public Error {
 public:
  using Error::Error;
};

/// Task-network generation produced nothing usable after all retries.
class NetworkGenerationError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace htnagent
