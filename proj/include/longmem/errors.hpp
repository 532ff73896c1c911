#pragma once

#include <stdexcept>
#include <string>

namespace longmem {

// Contract violation (bad parameter, unattainable tolerance, model/regime
// mismatch). Messages name the offending field or condition.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace longmem
