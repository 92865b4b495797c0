#pragma once

#include <stdexcept>
#include <string>

namespace uavnet {

/// Invalid or inconsistent configuration (bad parameters, missing files,
/// dimension mismatches between artifacts). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the domain of a formula (nonpositive distance, altitude
/// outside the LoS-probability model, zero vector passed to MRT, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Checkpoint or artifact whose shapes do not match the receiving object.
class DimensionError : public ConfigError {
 public:
  explicit DimensionError(const std::string& what) : ConfigError(what) {}
};

}  // namespace uavnet
