#pragma once

#include <stdexcept>
#include <string>

namespace sdbc {

/// Malformed input file or inconsistent field contents. Messages name the
/// offending field and, where applicable, the entry index inside it.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A requested computation exceeds a hard resource guard (alphabet sizes,
/// codebook sizes, strategy counts). Guards exist so a bad input fails fast
/// instead of exhausting memory.
class GuardError : public std::runtime_error {
 public:
  explicit GuardError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sdbc
