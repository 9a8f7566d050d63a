#pragma once

#include <stdexcept>
#include <string>

namespace leafpipe {

/// Bad or missing input data: unreadable files, malformed headers, bad dataset layout.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values reached an activation or the loss.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Precondition violations on caller-supplied parameters throw std::invalid_argument.

}  // namespace leafpipe
