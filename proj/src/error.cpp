#include "dewm/error.hpp"

namespace dewm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NotExpandable: return "NotExpandable";
    case ErrorCode::NotChangeable: return "NotChangeable";
    case ErrorCode::SelectionMismatch: return "SelectionMismatch";
    case ErrorCode::CorruptMap: return "CorruptMap";
    case ErrorCode::FieldTooLong: return "FieldTooLong";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::FeatureOutOfRange: return "FeatureOutOfRange";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::CrcMismatch: return "CrcMismatch";
    case ErrorCode::MalformedPayload: return "MalformedPayload";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::ZeroIntensity: return "ZeroIntensity";
    case ErrorCode::InsufficientCapacity: return "InsufficientCapacity";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownCode: return "UnknownCode";
    case ErrorCode::EmptyVault: return "EmptyVault";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

}  // namespace dewm
