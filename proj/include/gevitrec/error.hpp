#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gevitrec {

enum class ErrorCode {
  FileNotFound,
  ParseError,
  KeyMismatch,
  DuplicateDatasetId,
  AllMissing,
  EmptySet,
  EmptyDesignSpace,
  AllZeroCounts,
  UnknownDataset,
  UnmappedDataType,
  MultipleImmutable,
  UnresolvableOrientation,
  UnsupportedChartType,
  DataMismatch,
  MissingFragment,
  InvalidArgument,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::DuplicateDatasetId: return "DuplicateDatasetId";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::EmptyDesignSpace: return "EmptyDesignSpace";
    case ErrorCode::AllZeroCounts: return "AllZeroCounts";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
    case ErrorCode::UnmappedDataType: return "UnmappedDataType";
    case ErrorCode::MultipleImmutable: return "MultipleImmutable";
    case ErrorCode::UnresolvableOrientation: return "UnresolvableOrientation";
    case ErrorCode::UnsupportedChartType: return "UnsupportedChartType";
    case ErrorCode::DataMismatch: return "DataMismatch";
    case ErrorCode::MissingFragment: return "MissingFragment";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code identifies the failure class;
/// the message carries the human-readable detail (path, line, field name).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Input problems the user can fix (bad file, bad config) as opposed to
  // internal invariant violations.
  bool is_input_error() const noexcept {
    switch (code_) {
      case ErrorCode::FileNotFound:
      case ErrorCode::ParseError:
      case ErrorCode::KeyMismatch:
      case ErrorCode::DuplicateDatasetId:
      case ErrorCode::AllMissing:
      case ErrorCode::EmptyDesignSpace:
      case ErrorCode::AllZeroCounts:
      case ErrorCode::UnmappedDataType:
      case ErrorCode::InvalidArgument:
      case ErrorCode::ConfigError:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace gevitrec
