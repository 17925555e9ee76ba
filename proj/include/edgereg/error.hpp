#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace edgereg {

// All library failures carry a short stable code ("duplicate-edge",
// "oracle-size-exceeded", ...) so callers and the CLI can match on them
// without parsing prose.
class Error : public std::runtime_error {
 public:
  explicit Error(std::string code, const std::string& detail = {})
      : std::runtime_error(detail.empty() ? code : code + ": " + detail),
        code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace edgereg
