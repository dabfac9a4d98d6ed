#pragma once

#include <stdexcept>
#include <string>

namespace pir {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates an operation's contract.
struct InvalidArgument : Error {
  using Error::Error;
};

/// A configuration is internally inconsistent or incomplete.
struct InvalidConfig : Error {
  using Error::Error;
};

/// A required file or directory does not exist or holds nothing usable.
struct NotFound : Error {
  using Error::Error;
};

/// A numerical routine left its domain of validity (e.g. an indefinite
/// matrix where a PSD one was required).
struct NumericalError : Error {
  using Error::Error;
};

/// Training hit a non-finite loss and stopped after writing a diagnostic
/// snapshot. The message names the offending phase and snapshot path.
struct TrainingAbort : Error {
  using Error::Error;
};

}  // namespace pir
