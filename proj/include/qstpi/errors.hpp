#pragma once

#include <stdexcept>
#include <string>

namespace qstpi {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class SchemaError : public Error {
public:
  using Error::Error;
};

class InvariantError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// No selection can satisfy quota and distance requirements.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

/// An exact routine was asked to run beyond its configured size limit.
class BudgetError : public Error {
public:
  using Error::Error;
};

/// A layered arborescence violates the one-copy / one-successor hypotheses.
class CorrespondenceError : public Error {
public:
  using Error::Error;
};

/// The time limit expired before any feasible solution was found.
class TimeLimitError : public Error {
public:
  using Error::Error;
};

class UnsupportedModel : public Error {
public:
  using Error::Error;
};

}  // namespace qstpi
