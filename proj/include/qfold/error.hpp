#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qfold {

enum class ErrorCode {
    LengthMismatch,
    IndexOutOfRange,
    RelTurnOutOfRange,
    InvalidTurn,
    MissingVariable,
    DegreeOverflow,
    DegreeCeiling,
    ParseError,
    AsymmetricMatrix,
    MissingResidue,
    UnknownResidue,
    TurnIndexOutOfRange,
    InvalidArgument,
    BudgetExceeded,
    ParamLengthMismatch,
    EmptyDistribution,
    Divergence,
    EmptyStructure,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI and the Python layer can report it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace qfold
