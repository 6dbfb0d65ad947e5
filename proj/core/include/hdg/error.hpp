#pragma once

#include <stdexcept>
#include <string>

namespace hdg {

/// Thrown on contract violations and numerical construction failures
/// (invalid degree, indefinite blocks, non-finite residuals, ...).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hdg
