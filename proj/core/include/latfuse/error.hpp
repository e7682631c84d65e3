#pragma once

#include <stdexcept>
#include <string>

namespace latfuse {

// Input text does not parse under its format header.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The instance admits no solution, e.g. a frame without candidates.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace latfuse
