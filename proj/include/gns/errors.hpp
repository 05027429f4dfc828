#pragma once

#include <stdexcept>
#include <string>

namespace gns {

/// Grid/value shape mismatches and other structural misuse.
class structural_error : public std::logic_error {
 public:
  explicit structural_error(const std::string& what) : std::logic_error(what) {}
};

/// Non-finite intermediates, overflow, failed solves.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gns
