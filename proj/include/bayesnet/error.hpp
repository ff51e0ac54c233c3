#ifndef BAYESNET_ERROR_HPP_
#define BAYESNET_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace bayesnet {

// Domain error with a stable machine-readable code ("CycleDetected",
// "UnknownState", ...).  The CLI surfaces codes verbatim; tests match on them.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace bayesnet

#endif  // BAYESNET_ERROR_HPP_
