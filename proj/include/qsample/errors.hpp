#pragma once

#include <stdexcept>
#include <string>

namespace qsample {

/// Malformed user input (files, options). Messages name the offending row and
/// column where one exists.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A kernel that fails one of the admissibility conditions.
class AdmissibilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qsample
