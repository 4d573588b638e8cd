#pragma once

#include <stdexcept>
#include <string>

namespace akscal {

/// Failure raised by any module. Carries the module name and the check that
/// failed so the CLI can report "module/check: detail".
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string check, const std::string& detail)
      : std::runtime_error(module + "/" + check + ": " + detail),
        module_(std::move(module)),
        check_(std::move(check)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& check() const noexcept { return check_; }

 private:
  std::string module_;
  std::string check_;
};

}  // namespace akscal
