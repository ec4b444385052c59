#pragma once

#include <stdexcept>
#include <string>

namespace nlkg {

// Every failure raised by the library derives from Error so callers can
// catch the whole family; `kind()` is the stable machine-readable tag that
// the CLI puts into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what);
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define NLKG_DECLARE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

NLKG_DECLARE_ERROR(InvalidArgument);
NLKG_DECLARE_ERROR(ShapeMismatch);
NLKG_DECLARE_ERROR(CFLViolation);
NLKG_DECLARE_ERROR(NoConvergence);
NLKG_DECLARE_ERROR(EigenFailure);
NLKG_DECLARE_ERROR(FarFromSoliton);
NLKG_DECLARE_ERROR(DomainViolation);
NLKG_DECLARE_ERROR(TailBoundViolated);
NLKG_DECLARE_ERROR(ScaleBoundViolated);
NLKG_DECLARE_ERROR(WindowTooShort);
NLKG_DECLARE_ERROR(NoCrossingFound);
NLKG_DECLARE_ERROR(WindowRejected);
NLKG_DECLARE_ERROR(ParseError);
NLKG_DECLARE_ERROR(ValidationError);
NLKG_DECLARE_ERROR(IoError);

#undef NLKG_DECLARE_ERROR

}  // namespace nlkg
