#pragma once

#include <stdexcept>
#include <string>

namespace futureyou {

// Root of every exception thrown by the library. Module-specific errors
// derive from this so callers at the HTTP boundary can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace futureyou
