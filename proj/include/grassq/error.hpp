// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace grassq {

/// Base for every error raised by the library. `kind()` is a stable tag
/// that the CLI uses to pick an exit code and tests use to match errors.
class Error : public std::runtime_error {
 public:
  Error(const char* kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  const char* kind() const noexcept { return kind_; }

 private:
  const char* kind_;
};

#define GRASSQ_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

GRASSQ_DEFINE_ERROR(DomainError)
GRASSQ_DEFINE_ERROR(DimensionMismatch)
GRASSQ_DEFINE_ERROR(OrderViolation)
GRASSQ_DEFINE_ERROR(OrthonormalityError)
GRASSQ_DEFINE_ERROR(RadiusTooLarge)
GRASSQ_DEFINE_ERROR(SpecMismatch)
GRASSQ_DEFINE_ERROR(DuplicateEntry)
GRASSQ_DEFINE_ERROR(CapExceeded)
GRASSQ_DEFINE_ERROR(FormatError)
GRASSQ_DEFINE_ERROR(ConfigError)

#undef GRASSQ_DEFINE_ERROR

}  // namespace grassq
