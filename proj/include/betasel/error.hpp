#pragma once

#include <stdexcept>
#include <string>

namespace betasel {

// Closed set of error categories surfaced by the CLI as machine-readable
// strings and distinct exit codes.
enum class errc { parse, validation, convergence, quorum, io };

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::parse: return "parse";
    case errc::validation: return "validation";
    case errc::convergence: return "convergence";
    case errc::quorum: return "quorum";
    case errc::io: return "io";
  }
  return "unknown";
}

inline int errc_exit_code(errc c) {
  switch (c) {
    case errc::parse: return 2;
    case errc::validation: return 3;
    case errc::convergence: return 4;
    case errc::quorum: return 5;
    case errc::io: return 6;
  }
  return 1;
}

class error : public std::runtime_error {
 public:
  error(errc category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  errc category() const noexcept { return category_; }

 private:
  errc category_;
};

[[noreturn]] inline void fail(errc category, const std::string& message) {
  throw error(category, message);
}

}  // namespace betasel
