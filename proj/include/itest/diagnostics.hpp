#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace itest {

struct Location {
  std::string path;
  int line = 0;
  int col = 0;

  friend bool operator==(const Location&, const Location&) = default;
};

// Reason codes for problems found while collecting tests.
namespace reason {
inline constexpr const char* kSyntaxError = "SYNTAX_ERROR";
inline constexpr const char* kDecodeError = "DECODE_ERROR";
inline constexpr const char* kReadError = "READ_ERROR";
inline constexpr const char* kNoTarget = "NO_TARGET";
inline constexpr const char* kUnresolvedName = "UNRESOLVED_NAME";
inline constexpr const char* kImportError = "IMPORT_ERROR";
inline constexpr const char* kImportSkipped = "IMPORT_SKIPPED";
inline constexpr const char* kDuplicateId = "DUPLICATE_ID";
}  // namespace reason

struct CollectionError {
  std::string path;
  std::optional<int> line;
  std::string reason;
  std::string message;
  // Non-fatal entries (files skipped on purpose) do not affect the exit code.
  bool fatal = true;

  friend bool operator==(const CollectionError&, const CollectionError&) = default;
};

struct Warning {
  Location location;
  std::string message;
};

// Base for errors that reject one inline test (or one file) at collection
// time. Carries the reason code reported to the user.
class CollectionFailure : public std::runtime_error {
 public:
  CollectionFailure(std::string reason, Location where, const std::string& message)
      : std::runtime_error(message), reason_(std::move(reason)), where_(std::move(where)) {}

  const std::string& reason() const { return reason_; }
  const Location& where() const { return where_; }

  CollectionError to_error() const {
    return {where_.path, where_.line > 0 ? std::optional<int>(where_.line) : std::nullopt, reason_,
            what(), true};
  }

 private:
  std::string reason_;
  Location where_;
};

}  // namespace itest
