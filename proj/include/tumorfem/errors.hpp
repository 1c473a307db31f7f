#ifndef TUMORFEM_ERRORS_HPP
#define TUMORFEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tumorfem {

enum class errc {
  invalid_resolution,
  invalid_domain,
  invalid_parameter,
  invalid_tensor,
  invalid_operator,
  kind_mismatch,
  shape_error,
  hypothesis_violation,
  stability_violation,
  numerical_breakdown,
  step_failure,
  oracle_failure,
  unknown_preset,
  unknown_key,
  missing_key,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_resolution: return "invalid-resolution";
    case errc::invalid_domain: return "invalid-domain";
    case errc::invalid_parameter: return "invalid-parameter";
    case errc::invalid_tensor: return "invalid-tensor";
    case errc::invalid_operator: return "invalid-operator";
    case errc::kind_mismatch: return "kind-mismatch";
    case errc::shape_error: return "shape-error";
    case errc::hypothesis_violation: return "hypothesis-violation";
    case errc::stability_violation: return "stability-violation";
    case errc::numerical_breakdown: return "numerical-breakdown";
    case errc::step_failure: return "step-failure";
    case errc::oracle_failure: return "oracle-failure";
    case errc::unknown_preset: return "unknown-preset";
    case errc::unknown_key: return "unknown-key";
    case errc::missing_key: return "missing-key";
    case errc::io_error: return "io-error";
  }
  return "unknown";
}

/// Library-wide exception carrying a stable error code alongside the message.
class error : public std::runtime_error {
public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

} // namespace tumorfem

#endif
