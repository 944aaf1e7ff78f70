#pragma once

#include <stdexcept>
#include <string>

namespace fcb {

// Machine-readable failure codes. Every throwing path in the library uses one
// of these; the CLI maps them onto exit statuses and report fields.
enum class errc {
  composability_violation,
  patch_exit,
  class_overflow,
  geometry_mismatch,
  dim_mismatch,
  grid_too_coarse,
  support_violation,
  near_singular_path,
  non_integer,
  winding_inconsistent,
  split_failure,
  weight_on_spectrum,
  unstable_truncation,
  divisibility_violation,
  no_admissible_weight,
  unknown_model,
  invalid_input,
};

inline const char* to_string(errc c) {
  switch (c) {
    case errc::composability_violation: return "COMPOSABILITY_VIOLATION";
    case errc::patch_exit: return "PATCH_EXIT";
    case errc::class_overflow: return "CLASS_OVERFLOW";
    case errc::geometry_mismatch: return "GEOMETRY_MISMATCH";
    case errc::dim_mismatch: return "DIM_MISMATCH";
    case errc::grid_too_coarse: return "GRID_TOO_COARSE";
    case errc::support_violation: return "SUPPORT_VIOLATION";
    case errc::near_singular_path: return "NEAR_SINGULAR_PATH";
    case errc::non_integer: return "NON_INTEGER";
    case errc::winding_inconsistent: return "WINDING_INCONSISTENT";
    case errc::split_failure: return "SPLIT_FAILURE";
    case errc::weight_on_spectrum: return "WEIGHT_ON_SPECTRUM";
    case errc::unstable_truncation: return "UNSTABLE_TRUNCATION";
    case errc::divisibility_violation: return "DIVISIBILITY_VIOLATION";
    case errc::no_admissible_weight: return "NO_ADMISSIBLE_WEIGHT";
    case errc::unknown_model: return "UNKNOWN_MODEL";
    case errc::invalid_input: return "INVALID_INPUT";
  }
  return "UNKNOWN";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace fcb
