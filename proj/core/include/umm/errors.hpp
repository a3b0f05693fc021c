#pragma once

#include <stdexcept>
#include <string>

namespace umm {

// Base for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define UMM_DEFINE_ERROR(Name)           \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

UMM_DEFINE_ERROR(DomainError);
UMM_DEFINE_ERROR(ShapeError);
UMM_DEFINE_ERROR(UnboundVariable);
UMM_DEFINE_ERROR(UnsupportedDegree);
UMM_DEFINE_ERROR(DegreeMismatch);
UMM_DEFINE_ERROR(UnboundedTrust);
UMM_DEFINE_ERROR(DegenerateInput);
UMM_DEFINE_ERROR(UnknownProblem);
UMM_DEFINE_ERROR(FileNotFound);
UMM_DEFINE_ERROR(BadMagic);
UMM_DEFINE_ERROR(TruncatedFile);

#undef UMM_DEFINE_ERROR

}  // namespace umm
