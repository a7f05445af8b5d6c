#pragma once

#include <stdexcept>
#include <string>

namespace rptlab {

// Failure classes map onto process exit codes (see docs/cli.md):
//   Config  -> 2 (bad input: grammar, schema, preconditions on user data)
//   Numeric -> 3 (runtime numerical failure)
enum class ErrorClass { Config = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

#define RPTLAB_ERROR(Name, Class)                                     \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what)                            \
        : Error(ErrorClass::Class, std::string(#Name) + ": " + what) {} \
  }

RPTLAB_ERROR(SyntaxError, Config);
RPTLAB_ERROR(UnknownIdentifier, Config);
RPTLAB_ERROR(ArityError, Config);
RPTLAB_ERROR(ConfigError, Config);
RPTLAB_ERROR(PrincipalMismatch, Config);

RPTLAB_ERROR(EvalDomainError, Numeric);
RPTLAB_ERROR(DegenerateBoundary, Numeric);
RPTLAB_ERROR(EmptyTube, Numeric);
RPTLAB_ERROR(NotNull, Numeric);
RPTLAB_ERROR(StartsOutside, Numeric);
RPTLAB_ERROR(GrazingUndecidable, Numeric);
RPTLAB_ERROR(Trapped, Numeric);
RPTLAB_ERROR(CharacteristicBoundary, Numeric);
RPTLAB_ERROR(ImaginaryPartLoss, Numeric);
RPTLAB_ERROR(QuadratureNonconvergence, Numeric);
RPTLAB_ERROR(ResolutionTooCoarse, Numeric);
RPTLAB_ERROR(NoEllipticRoot, Numeric);
RPTLAB_ERROR(RootNotSimple, Numeric);
RPTLAB_ERROR(EndpointNotVanishing, Numeric);
RPTLAB_ERROR(NotMaximal, Numeric);
RPTLAB_ERROR(IdentityViolation, Numeric);

#undef RPTLAB_ERROR

}  // namespace rptlab
