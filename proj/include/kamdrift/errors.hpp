#pragma once

#include <stdexcept>
#include <string>

namespace kamdrift {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an object (interval J, chart rectangle, U).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Request beyond a fixed capability (derivative order, jet order).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class SearchError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed user input (scenario files, flags).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace kamdrift
