#pragma once

#include <stdexcept>
#include <string>

namespace sbfc {

// Error classes map onto distinct CLI exit codes (see exit_code()).

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InferenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a structural edit would break the forest invariants.
struct CycleError : std::logic_error {
  using std::logic_error::logic_error;
};

namespace exit_codes {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int config = 2;
inline constexpr int parse = 3;
inline constexpr int io = 4;
inline constexpr int inference = 5;
inline constexpr int validation = 6;
inline constexpr int check_failed = 7;
}  // namespace exit_codes

}  // namespace sbfc
