#pragma once

#include <stdexcept>
#include <string>

namespace smartinspect {

// Bad or unknown configuration value. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable/unwritable file or malformed on-disk record. CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two components disagree about a shared contract (feature dimension,
// class count, provider output size). CLI exit code 4.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace smartinspect
