#pragma once

#include <stdexcept>
#include <string>

namespace synthweaver {

// Base for every error the library throws. Each subclass is one named failure
// mode so callers catch exactly what they can recover from.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every failure of an oracle call derives from OracleError.
class OracleError : public Error {
 public:
  using Error::Error;
};

#define SYNTHWEAVER_ERROR(Name, Base)                                  \
  class Name : public Base {                                           \
   public:                                                             \
    explicit Name(const std::string& what) : Base(#Name ": " + what) {} \
  }

// core model
SYNTHWEAVER_ERROR(MalformedAction, Error);
SYNTHWEAVER_ERROR(InvalidAction, Error);
SYNTHWEAVER_ERROR(InvalidTrajectory, Error);

// environment
SYNTHWEAVER_ERROR(SchemaError, Error);
SYNTHWEAVER_ERROR(InvalidGraph, Error);
SYNTHWEAVER_ERROR(ElementNotFound, Error);
SYNTHWEAVER_ERROR(SessionTerminal, Error);
SYNTHWEAVER_ERROR(EnvironmentFailure, Error);
SYNTHWEAVER_ERROR(ConnectFailed, EnvironmentFailure);
SYNTHWEAVER_ERROR(ProtocolError, EnvironmentFailure);

// oracle
SYNTHWEAVER_ERROR(MissingPlaceholder, Error);
SYNTHWEAVER_ERROR(NoJsonFound, Error);
SYNTHWEAVER_ERROR(SchemaViolation, OracleError);
SYNTHWEAVER_ERROR(TransportError, OracleError);
SYNTHWEAVER_ERROR(BudgetExhausted, OracleError);

// pipeline stages
SYNTHWEAVER_ERROR(EmptyPlan, Error);
SYNTHWEAVER_ERROR(EditContractViolation, Error);
SYNTHWEAVER_ERROR(EmptyTrajectory, Error);
SYNTHWEAVER_ERROR(IoError, Error);
SYNTHWEAVER_ERROR(ConfigError, Error);

#undef SYNTHWEAVER_ERROR

}  // namespace synthweaver
