#pragma once

#include <stdexcept>
#include <string>

namespace zwf {

// Bad inputs: malformed files, out-of-domain observations, inconsistent ids.
// The CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: factorization breakdown, intensity overflow, cache
// audit mismatch. The CLI maps this to exit code 3.
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace zwf
