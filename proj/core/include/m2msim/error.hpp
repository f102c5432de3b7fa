#pragma once

#include <stdexcept>
#include <string>

namespace m2msim {

// Invalid scenario or model parameters. Messages name the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The observation has zero probability under the current belief and model.
class BeliefUpdateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace m2msim
