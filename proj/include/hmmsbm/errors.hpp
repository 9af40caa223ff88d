#pragma once

#include <stdexcept>
#include <string>

namespace hmmsbm {

// Malformed or missing input files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite likelihoods or emissions inside a sampler.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hmmsbm
