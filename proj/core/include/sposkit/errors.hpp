#pragma once

#include <stdexcept>
#include <string>

namespace sposkit {

// Invalid user-supplied configuration (non-positive bandwidth, empty data, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller violated a documented precondition (too few particles, empty batch, ...).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A sampler step produced non-finite positions.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sposkit
