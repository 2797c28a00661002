#include "foodcal/error.hpp"

namespace foodcal {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::DecodeError: return "DecodeError";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::InvalidBox: return "InvalidBox";
    case ErrorKind::MissingAnnotations: return "MissingAnnotations";
    case ErrorKind::NoCoin: return "NoCoin";
    case ErrorKind::MultipleCoins: return "MultipleCoins";
    case ErrorKind::NoFood: return "NoFood";
    case ErrorKind::TooManyFoods: return "TooManyFoods";
    case ErrorKind::DuplicateFoodLabels: return "DuplicateFoodLabels";
    case ErrorKind::LabelMismatch: return "LabelMismatch";
    case ErrorKind::BoxTooSmall: return "BoxTooSmall";
    case ErrorKind::NoCircle: return "NoCircle";
    case ErrorKind::DegenerateColors: return "DegenerateColors";
    case ErrorKind::EmptyForeground: return "EmptyForeground";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::DegenerateExtent: return "DegenerateExtent";
    case ErrorKind::UnknownFood: return "UnknownFood";
    case ErrorKind::NonpositiveVolume: return "NonpositiveVolume";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NoEvaluableRecords: return "NoEvaluableRecords";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace foodcal
