#pragma once

#include <stdexcept>
#include <string>

namespace lsbound {

// Error taxonomy used for CLI exit codes: config/input problems map to
// exit 1, numerical and constraint failures to exit 2.

// Malformed arguments, configs, or data violating a precondition.
class invalid_input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input files that do not follow their declared format (IDX, CSV, checkpoint).
class format_error : public invalid_input_error {
 public:
  using invalid_input_error::invalid_input_error;
};

// A label (or similar stratum) without enough samples to estimate statistics.
class insufficient_data_error : public invalid_input_error {
 public:
  using invalid_input_error::invalid_input_error;
};

// A theorem-side constraint was violated (e.g. lambda over its cap).
class constraint_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A function under estimation produced a negative or non-finite value.
class evaluation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training loss became non-finite or exceeded the divergence threshold.
class divergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact enumeration requested beyond the supported size.
class size_limit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lsbound
