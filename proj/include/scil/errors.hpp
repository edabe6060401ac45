#ifndef SCIL_ERRORS_HPP
#define SCIL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace scil {

// Failure categories; also used as CLI exit codes (success = 0).
enum class ErrorCategory {
  Config = 2,
  InputDomain = 3,
  Ingestion = 4,
  Training = 5,
  Threshold = 6,
  Io = 7,
  Internal = 8,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

private:
  ErrorCategory category_;
};

[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorCategory::Config, msg); }
[[noreturn]] inline void throw_input_domain(const std::string& msg) { throw Error(ErrorCategory::InputDomain, msg); }
[[noreturn]] inline void throw_ingestion(const std::string& msg) { throw Error(ErrorCategory::Ingestion, msg); }
[[noreturn]] inline void throw_training(const std::string& msg) { throw Error(ErrorCategory::Training, msg); }
[[noreturn]] inline void throw_threshold(const std::string& msg) { throw Error(ErrorCategory::Threshold, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorCategory::Io, msg); }
[[noreturn]] inline void throw_internal(const std::string& msg) { throw Error(ErrorCategory::Internal, msg); }

}  // namespace scil

#endif
