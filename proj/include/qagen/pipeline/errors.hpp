#pragma once

#include "qagen/error.hpp"

namespace qagen::pipeline {

// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A stage was asked to run before the stage producing its input (exit code 3).
class DependencyError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDependency = 3;
inline constexpr int kExitBackend = 4;

}  // namespace qagen::pipeline
