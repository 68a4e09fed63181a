#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace beta_targets {

enum class Module { beta_dynamics, parallelepiped_geometry, hausdorff_content, dimension_engine, numerical_lab, cli_io };

enum class ErrorCode {
  domain_error,
  resource_limit,
  degenerate_input,
  internal_consistency,
  precondition_failed,
  schema_error,
  io_error,
};

inline constexpr std::string_view to_string(Module m) {
  switch (m) {
    case Module::beta_dynamics: return "beta_dynamics";
    case Module::parallelepiped_geometry: return "parallelepiped_geometry";
    case Module::hausdorff_content: return "hausdorff_content";
    case Module::dimension_engine: return "dimension_engine";
    case Module::numerical_lab: return "numerical_lab";
    case Module::cli_io: return "cli_io";
  }
  return "unknown";
}

inline constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::resource_limit: return "resource_limit";
    case ErrorCode::degenerate_input: return "degenerate_input";
    case ErrorCode::internal_consistency: return "internal_consistency";
    case ErrorCode::precondition_failed: return "precondition_failed";
    case ErrorCode::schema_error: return "schema_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

/// Every failure raised by the library carries the module that raised it and a
/// machine-readable code; the CLI turns these into its JSON error document.
class Error : public std::runtime_error {
 public:
  Error(Module module, ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(module)) + "." + std::string(to_string(code)) + ": " + message),
        module_(module),
        code_(code),
        detail_(message) {}

  Module module() const noexcept { return module_; }
  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Module module_;
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(Module module, ErrorCode code, const std::string& message) {
  throw Error(module, code, message);
}

}  // namespace beta_targets
