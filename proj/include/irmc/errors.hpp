#pragma once

#include <stdexcept>
#include <string>

namespace irmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define IRMC_DECLARE_ERROR(Name)                \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

// model / dynamics
IRMC_DECLARE_ERROR(InvalidModel);
IRMC_DECLARE_ERROR(NonFiniteState);
IRMC_DECLARE_ERROR(InadmissibleImpulse);

// design
IRMC_DECLARE_ERROR(DomainDegenerate);
IRMC_DECLARE_ERROR(TooFewSites);

// surrogate
IRMC_DECLARE_ERROR(CholeskyFailure);
IRMC_DECLARE_ERROR(DegenerateDesign);
IRMC_DECLARE_ERROR(SingularSystem);

// intervention
IRMC_DECLARE_ERROR(BracketFailure);
IRMC_DECLARE_ERROR(EmptyActionSet);

// oracle / policy
IRMC_DECLARE_ERROR(InvalidParameters);
IRMC_DECLARE_ERROR(UnsupportedDimension);
IRMC_DECLARE_ERROR(NoEvents);

// io
IRMC_DECLARE_ERROR(ConfigError);
IRMC_DECLARE_ERROR(VersionMismatch);
IRMC_DECLARE_ERROR(FormatError);

#undef IRMC_DECLARE_ERROR

/// Wraps a failure inside the backward induction with the step it happened at.
class AbortAtStep : public Error {
public:
    AbortAtStep(int step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

} // namespace irmc
