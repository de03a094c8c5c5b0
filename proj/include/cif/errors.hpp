#ifndef CIF_ERRORS_HPP
#define CIF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cif {

enum class errc {
  bad_header,
  missing_payload,
  length_mismatch,
  truncated_payload,
  non_numeric_line,
  empty_signal,
  too_short,
  shift_too_large,
  record_too_short,
  no_positives,
  shape_mismatch,
  diverged_loss,
  too_few_records,
  bad_magic,
  version_mismatch,
  empty_input,
  unknown_format,
  bad_config,
};

const char* errc_name(errc code);

/// Error carrying a stable category usable in machine-readable CLI output.
class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace cif

#endif
