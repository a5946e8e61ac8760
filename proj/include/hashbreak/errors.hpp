#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hashbreak {

// Base of every error thrown by the library. Each subclass names one failure
// kind so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HASHBREAK_DEFINE_ERROR(Name)          \
    class Name : public Error {               \
    public:                                   \
        using Error::Error;                   \
    }

HASHBREAK_DEFINE_ERROR(AlgorithmMismatch);
HASHBREAK_DEFINE_ERROR(ShapeMismatch);
HASHBREAK_DEFINE_ERROR(EmptyInput);
HASHBREAK_DEFINE_ERROR(InvalidImage);
HASHBREAK_DEFINE_ERROR(DecodeError);
HASHBREAK_DEFINE_ERROR(UnsupportedFormat);
HASHBREAK_DEFINE_ERROR(IoError);
HASHBREAK_DEFINE_ERROR(EvenKernel);
HASHBREAK_DEFINE_ERROR(InvalidRange);
HASHBREAK_DEFINE_ERROR(OddSampleCount);
HASHBREAK_DEFINE_ERROR(InvalidConfig);
HASHBREAK_DEFINE_ERROR(OracleFailure);
HASHBREAK_DEFINE_ERROR(EmptyDb);
HASHBREAK_DEFINE_ERROR(EmptyQuerySet);
HASHBREAK_DEFINE_ERROR(UnknownId);
HASHBREAK_DEFINE_ERROR(OutOfRange);
HASHBREAK_DEFINE_ERROR(ParseError);

#undef HASHBREAK_DEFINE_ERROR

// Rejection sampling ran out of budget without finding a valid perturbation.
class Exhausted : public Error {
public:
    explicit Exhausted(std::uint64_t samples)
        : Error("no valid perturbation after " + std::to_string(samples) + " samples"),
          samples_(samples) {}

    std::uint64_t samples() const noexcept { return samples_; }

private:
    std::uint64_t samples_;
};

} // namespace hashbreak
