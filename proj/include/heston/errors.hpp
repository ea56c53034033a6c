#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace heston {

// All precondition violations surface as Error with a stable machine-readable
// code (e.g. "SigmaZero", "MissingDerivative").  The CLI prints the code and
// maps it to its exit status.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace heston
