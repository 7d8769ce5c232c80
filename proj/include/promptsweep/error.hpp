#pragma once
#include <stdexcept>
#include <string>

namespace promptsweep {

// Base for every error the harness raises deliberately.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define PROMPTSWEEP_ERROR(Name, Base)          \
    class Name : public Base {                 \
    public:                                    \
        using Base::Base;                      \
    }

// task_model
PROMPTSWEEP_ERROR(MalformedSpec, Error);
PROMPTSWEEP_ERROR(InvariantViolation, Error);
PROMPTSWEEP_ERROR(MissingDataset, Error);
PROMPTSWEEP_ERROR(EmptyAxis, Error);

// prompt_assembler
PROMPTSWEEP_ERROR(MissingBlock, Error);
PROMPTSWEEP_ERROR(OversizedBatch, Error);

// response_parser
PROMPTSWEEP_ERROR(NoParsableLines, Error);

// metrics_engine
PROMPTSWEEP_ERROR(EmptyInput, Error);
PROMPTSWEEP_ERROR(MismatchedItems, Error);

// provider mocks
PROMPTSWEEP_ERROR(BadMatrix, Error);

// run_orchestrator
PROMPTSWEEP_ERROR(ManifestInvalid, Error);
PROMPTSWEEP_ERROR(CellFailed, Error);

// reporter
PROMPTSWEEP_ERROR(MixedConfigs, Error);

#undef PROMPTSWEEP_ERROR

// Provider failures carry whether the gateway may retry them.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool retryable)
        : Error(what), retryable_(retryable) {}
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

class AuthError : public ProviderError {
public:
    explicit AuthError(const std::string& what) : ProviderError(what, false) {}
};

class RateLimited : public ProviderError {
public:
    explicit RateLimited(const std::string& what) : ProviderError(what, true) {}
};

class TransportError : public ProviderError {
public:
    explicit TransportError(const std::string& what) : ProviderError(what, true) {}
};

class ProviderRejected : public ProviderError {
public:
    explicit ProviderRejected(const std::string& what) : ProviderError(what, false) {}
};

} // namespace promptsweep
