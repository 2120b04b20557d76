#pragma once

#include <stdexcept>
#include <string>

namespace pfls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or payload (ragged rows, bad magic, unparsable cells).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument to an operation (out-of-range k, bad percentile, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Combination the chosen inner-product provider cannot evaluate.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the combinatorial budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfls
