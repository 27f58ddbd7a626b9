#pragma once

#include <stdexcept>
#include <string>

namespace soplab {

// Invalid model configuration (parameters, OCV table, SOA box).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A closed form was evaluated outside the region where its denominator is positive.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Malformed external input: files, profiles, command-line values.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace soplab
