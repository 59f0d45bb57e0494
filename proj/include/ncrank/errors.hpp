#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ncrank {

// Error taxonomy. Every throw site picks the most specific class:
//
//   input_error        malformed external data (files, CLI input)
//   argument_error     API misuse detectable from the arguments alone
//   precondition_error a structured contract violation (rank/shape/degree)
//   size_error         a size threshold was crossed (field too small for a
//                      sampling argument, or a requested object exceeds the
//                      configured budget); the message names the threshold
//   internal_error     an invariant believed unreachable failed; it is a bug
//                      in this library, not in the caller's data
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

class input_error : public error {
public:
  explicit input_error(const std::string& what) : error("input error: " + what) {}
};

class argument_error : public error {
public:
  explicit argument_error(const std::string& what) : error("argument error: " + what) {}
};

class precondition_error : public error {
public:
  explicit precondition_error(const std::string& what)
      : error("precondition violated: " + what) {}
};

class size_error : public error {
public:
  explicit size_error(const std::string& what) : error("size error: " + what) {}
};

class internal_error : public error {
public:
  explicit internal_error(const std::string& what) : error("internal error: " + what) {}
};

// Outcome of a verify-style entry point. Verification failures are data, not
// exceptions: callers get every violated condition, in check order.
struct VerifyReport {
  bool ok = true;
  std::vector<std::string> failures;

  void fail(std::string why) {
    ok = false;
    failures.push_back(std::move(why));
  }
};

}  // namespace ncrank
