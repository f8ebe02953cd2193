#include "smalldev/error.hpp"

namespace smalldev {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonCentered: return "NonCentered";
        case ErrorCode::ZeroQuenchedVariance: return "ZeroQuenchedVariance";
        case ErrorCode::UnsupportedLaw: return "UnsupportedLaw";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::SpacingMismatch: return "SpacingMismatch";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::OutOfInterval: return "OutOfInterval";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::NegativeDensity: return "NegativeDensity";
        case ErrorCode::BadWindow: return "BadWindow";
        case ErrorCode::TableGap: return "TableGap";
        case ErrorCode::CrossingBoundaries: return "CrossingBoundaries";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace smalldev
