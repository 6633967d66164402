#pragma once

#include <stdexcept>
#include <string>

namespace ipskit {

// Base class for all library errors. Specific types exist so callers
// (and the CLI exit-code mapping) can distinguish contract violations
// from resource-cap failures.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input data (parse errors, malformed proofs, contract violations).
struct InputError : Error {
    using Error::Error;
};

// A resource cap (term count, degree, cube size) was exceeded.
struct CapError : Error {
    using Error::Error;
};

struct ZeroInverse : InputError { using InputError::InputError; };
struct NotPrime : InputError { using InputError::InputError; };
struct UnassignedVariable : InputError { using InputError::InputError; };
struct DivisionByZero : InputError { using InputError::InputError; };
struct DegreeOfDivision : InputError { using InputError::InputError; };
struct NonBinaryProduct : InputError { using InputError::InputError; };
struct ModulusMismatch : InputError { using InputError::InputError; };
struct TermBlowup : CapError { using CapError::CapError; };
struct DegreeBlowup : CapError { using CapError::CapError; };
struct CubeTooLarge : CapError { using CapError::CapError; };
struct SplitBlowup : CapError { using CapError::CapError; };
struct ParseError : InputError { using InputError::InputError; };
struct MalformedHeader : ParseError { using ParseError::ParseError; };
struct LiteralOutOfRange : ParseError { using ParseError::ParseError; };
struct UnterminatedClause : ParseError { using ParseError::ParseError; };
struct PrimeTooSmall : InputError { using InputError::InputError; };
struct InvalidRule : InputError { using InputError::InputError; };
struct FinalNotOne : InputError { using InputError::InputError; };
struct NotHilbertLike : InputError { using InputError::InputError; };
struct NotWeaklySkew : InputError { using InputError::InputError; };
struct RuleMismatch : InputError { using InputError::InputError; };
struct NotTreeLike : InputError { using InputError::InputError; };
struct UnsupportedModulus : InputError { using InputError::InputError; };
struct InverseCertInvalid : InputError { using InputError::InputError; };
struct WidthNot3 : InputError { using InputError::InputError; };
struct LayoutMismatch : InputError { using InputError::InputError; };
struct IntegerOverflow : CapError { using CapError::CapError; };

} // namespace ipskit
