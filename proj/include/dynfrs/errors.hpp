#pragma once

#include <stdexcept>
#include <string>

namespace dynfrs {

// Base for every error the library raises. The CLI maps subclasses to exit
// codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text: CSV rows, request lines, snapshot bytes.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input that parses but does not fit the declared schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition (e.g. deleting an id from a
// tree that never held it).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace dynfrs
