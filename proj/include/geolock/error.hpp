#pragma once

#include <stdexcept>
#include <string>

namespace geolock {

// Every failure the library can signal. The enumerator name is the stable
// error identifier printed by the CLI (first token of the error line).
enum class Errc {
    // cipher
    LengthNotBlockMultiple,
    EndsWithPadChar,
    EmptyInput,
    InvalidKey,
    // geokey
    OutOfRangeCoordinate,
    // codec
    ChunkTooLong,
    EmptyMessage,
    AlphabetViolation,
    BadPointerSuffix,
    MessageTooShort,
    FieldOutOfRange,
    BadHeader,
    AddressOutOfRange,
    LinkMismatch,
    // store
    CorruptVault,
    StorageUnavailable,
    CapacityExceeded,
    ChunkEndsWithPad,
    AddressNotFound,
    BrokenChain,
    CycleDetected,
    EmptyQuery,
    VaultExists,
    NoLocationFix,
    // lockscreen
    PatternTooShort,
    PatternCellOutOfRange,
    DuplicateCell,
    FenceInvalid,
    PatternMismatch,
    NoRotationPending,
    RotationPending,
    LengthOutOfRange,
    // geosim
    TraceFormatError,
    IndexOutOfRange,
    // analysis
    GridInvalid,
    GridTooLarge,
    CountOverflow,
    // cli
    SaltInvalid,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::LengthNotBlockMultiple: return "LengthNotBlockMultiple";
        case Errc::EndsWithPadChar: return "EndsWithPadChar";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::InvalidKey: return "InvalidKey";
        case Errc::OutOfRangeCoordinate: return "OutOfRangeCoordinate";
        case Errc::ChunkTooLong: return "ChunkTooLong";
        case Errc::EmptyMessage: return "EmptyMessage";
        case Errc::AlphabetViolation: return "AlphabetViolation";
        case Errc::BadPointerSuffix: return "BadPointerSuffix";
        case Errc::MessageTooShort: return "MessageTooShort";
        case Errc::FieldOutOfRange: return "FieldOutOfRange";
        case Errc::BadHeader: return "BadHeader";
        case Errc::AddressOutOfRange: return "AddressOutOfRange";
        case Errc::LinkMismatch: return "LinkMismatch";
        case Errc::CorruptVault: return "CorruptVault";
        case Errc::StorageUnavailable: return "StorageUnavailable";
        case Errc::CapacityExceeded: return "CapacityExceeded";
        case Errc::ChunkEndsWithPad: return "ChunkEndsWithPad";
        case Errc::AddressNotFound: return "AddressNotFound";
        case Errc::BrokenChain: return "BrokenChain";
        case Errc::CycleDetected: return "CycleDetected";
        case Errc::EmptyQuery: return "EmptyQuery";
        case Errc::VaultExists: return "VaultExists";
        case Errc::NoLocationFix: return "NoLocationFix";
        case Errc::PatternTooShort: return "PatternTooShort";
        case Errc::PatternCellOutOfRange: return "PatternCellOutOfRange";
        case Errc::DuplicateCell: return "DuplicateCell";
        case Errc::FenceInvalid: return "FenceInvalid";
        case Errc::PatternMismatch: return "PatternMismatch";
        case Errc::NoRotationPending: return "NoRotationPending";
        case Errc::RotationPending: return "RotationPending";
        case Errc::LengthOutOfRange: return "LengthOutOfRange";
        case Errc::TraceFormatError: return "TraceFormatError";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::GridInvalid: return "GridInvalid";
        case Errc::GridTooLarge: return "GridTooLarge";
        case Errc::CountOverflow: return "CountOverflow";
        case Errc::SaltInvalid: return "SaltInvalid";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + " " + detail), code_(code), detail_(detail) {}

    Errc code() const noexcept { return code_; }
    const char* name() const noexcept { return errc_name(code_); }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail) {
    throw Error(code, detail);
}

}  // namespace geolock
