#ifndef USUC_ERROR_HPP
#define USUC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace usuc {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorKind {
  usage = 1,    // bad flags, inconsistent configuration
  data = 2,     // malformed input files, format violations
  runtime = 3,  // I/O failures, bind failures, anything else
};

class UsucError : public std::runtime_error {
 public:
  UsucError(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

inline UsucError usage_error(std::string message) {
  return UsucError(ErrorKind::usage, std::move(message));
}
inline UsucError data_error(std::string message) {
  return UsucError(ErrorKind::data, std::move(message));
}
inline UsucError runtime_error(std::string message) {
  return UsucError(ErrorKind::runtime, std::move(message));
}

}  // namespace usuc

#endif  // USUC_ERROR_HPP
