#pragma once

#include <stdexcept>
#include <string>

namespace causalrd {

// Base for every failure raised by the library. `data_error()` separates
// problems in the inputs (model, cohort) from misuse of the API/config.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, bool data_error = true)
      : std::runtime_error(what), data_error_(data_error) {}
  bool data_error() const noexcept { return data_error_; }

 private:
  bool data_error_;
};

#define CAUSALRD_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  };

CAUSALRD_DEFINE_ERROR(CyclicGraph)
CAUSALRD_DEFINE_ERROR(UnnormalizedCpt)
CAUSALRD_DEFINE_ERROR(InvalidModel)
CAUSALRD_DEFINE_ERROR(UnknownVariable)
CAUSALRD_DEFINE_ERROR(UnknownState)
CAUSALRD_DEFINE_ERROR(ZeroProbabilityEvidence)
CAUSALRD_DEFINE_ERROR(IncompleteAssignment)
CAUSALRD_DEFINE_ERROR(EmptyParentConfiguration)
CAUSALRD_DEFINE_ERROR(NonFiniteLikelihood)
CAUSALRD_DEFINE_ERROR(InsufficientPositives)
CAUSALRD_DEFINE_ERROR(EmptyClass)
CAUSALRD_DEFINE_ERROR(NonFiniteValue)
CAUSALRD_DEFINE_ERROR(DegenerateTable)
CAUSALRD_DEFINE_ERROR(EmptySample)
CAUSALRD_DEFINE_ERROR(SingleClass)
CAUSALRD_DEFINE_ERROR(TooFewRecords)
CAUSALRD_DEFINE_ERROR(NoCausalPath)
CAUSALRD_DEFINE_ERROR(TooLargeForEnumeration)
CAUSALRD_DEFINE_ERROR(CohortFormatError)

#undef CAUSALRD_DEFINE_ERROR

// Configuration / usage problems (CLI exit code 1).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError: " + what, false) {}
};

}  // namespace causalrd
