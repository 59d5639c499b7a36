#include "qfold/error.hpp"

namespace qfold {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::RelTurnOutOfRange: return "RelTurnOutOfRange";
    case ErrorCode::InvalidTurn: return "InvalidTurn";
    case ErrorCode::MissingVariable: return "MissingVariable";
    case ErrorCode::DegreeOverflow: return "DegreeOverflow";
    case ErrorCode::DegreeCeiling: return "DegreeCeiling";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorCode::MissingResidue: return "MissingResidue";
    case ErrorCode::UnknownResidue: return "UnknownResidue";
    case ErrorCode::TurnIndexOutOfRange: return "TurnIndexOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ParamLengthMismatch: return "ParamLengthMismatch";
    case ErrorCode::EmptyDistribution: return "EmptyDistribution";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::EmptyStructure: return "EmptyStructure";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace qfold
