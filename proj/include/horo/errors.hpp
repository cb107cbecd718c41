#pragma once

#include <stdexcept>
#include <string>

namespace horo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two computations of the height cocycle disagree: the vertex pair does not
// satisfy the zero-height-sum constraint.
class InconsistentHeights : public Error {
 public:
  using Error::Error;
};

class InvalidChoice : public Error {
 public:
  using Error::Error;
};

class InvalidTarget : public Error {
 public:
  using Error::Error;
};

class DegenerateKernel : public Error {
 public:
  using Error::Error;
};

// Raised when an exact computation would exceed its configured state or
// enumeration budget. Remediation: lower n / radius or raise the budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NotEquivalent : public Error {
 public:
  using Error::Error;
};

class FormulaMismatch : public Error {
 public:
  using Error::Error;
};

class NotStationary : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace horo
