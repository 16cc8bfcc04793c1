#ifndef RECURLAB_ERROR_H_
#define RECURLAB_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace recurlab {

enum class ErrorCode {
  kInvalidArgument,
  kBudgetExceeded,
  kPrecisionExhausted,
  kNonExpanding,
  kRootOfUnity,
  kNotConverged,
  kConfig,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Structured error carried across module boundaries. The CLI prints what()
// verbatim, so messages name the offending field or limit.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace recurlab

#endif  // RECURLAB_ERROR_H_
