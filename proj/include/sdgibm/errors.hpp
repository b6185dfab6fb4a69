#pragma once

#include <stdexcept>
#include <string>

namespace sdgibm {

// Error categories; kept in sync with the status codes of the C API.
enum class ErrorCode {
  ok = 0,
  invalid_parameter,
  point_outside_domain,
  unsupported_degree,
  invalid_evaluation,
  invalid_geometry,
  marker_escaped,
  singular_system,
  solve_diverged,
  assembly_failure,
  postprocess_failure,
  bad_config,
  io_error,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace sdgibm
