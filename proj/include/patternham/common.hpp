#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace patternham {

// Vertices are 0-based internally and 1-based in files and on the command line.
using Vertex = std::uint32_t;
// Colors keep their 1-based values from [r]; index 0 is never a valid color.
using Color = std::uint16_t;
// A process step. Step t means "the first t edges have arrived"; 0 is the empty graph.
using Step = std::uint64_t;

inline constexpr Vertex kNoVertex = static_cast<Vertex>(-1);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace patternham
