#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ocsplab {

enum class Errc {
  invalid_argument,
  malformed_encoding,
  unsupported_feature,
  instant_out_of_range,
  missing_mandatory_field,
  duplicate_serial,
  model_incomplete,
  nonce_unsupported,
  inconclusive_profile,
  unreachable,
  window_missed,
  transport_error,
  digest_mismatch,
  empty_input,
  bind_failure,
  malformed_record,
  io_error,
  budget_exhausted,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc kinds above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ocsplab
