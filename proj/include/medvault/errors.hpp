#pragma once

#include <stdexcept>
#include <string>

namespace medvault {

// Every failure the library raises carries one of these codes. Tests and the
// CLI dispatch on the code, not on message text, so messages can stay human.
enum class ErrorCode {
    // input / encoding
    Malformed,
    InvalidKey,
    WrongKeyKind,
    // ledger admission
    BadNonce,
    InsufficientFunds,
    InvalidSignature,
    UnknownFunction,
    OutOfGas,
    // access-control contract
    DuplicateImage,
    Unauthorized,
    NoSuchContract,
    SelfRequest,
    DuplicatePending,
    NotOwner,
    NoPendingRequest,
    RateLimited,
    // content store
    NotFound,
    NotAFile,
    NotACommit,
    OversizeData,
    StorageFull,
    CorruptObject,
    // envelopes
    AuthFailure,
    // persistence
    CorruptChain,
    IoError,
    // scenario scripts
    BadScenario,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::Malformed: return "Malformed";
        case ErrorCode::InvalidKey: return "InvalidKey";
        case ErrorCode::WrongKeyKind: return "WrongKeyKind";
        case ErrorCode::BadNonce: return "BadNonce";
        case ErrorCode::InsufficientFunds: return "InsufficientFunds";
        case ErrorCode::InvalidSignature: return "InvalidSignature";
        case ErrorCode::UnknownFunction: return "UnknownFunction";
        case ErrorCode::OutOfGas: return "OutOfGas";
        case ErrorCode::DuplicateImage: return "DuplicateImage";
        case ErrorCode::Unauthorized: return "Unauthorized";
        case ErrorCode::NoSuchContract: return "NoSuchContract";
        case ErrorCode::SelfRequest: return "SelfRequest";
        case ErrorCode::DuplicatePending: return "DuplicatePending";
        case ErrorCode::NotOwner: return "NotOwner";
        case ErrorCode::NoPendingRequest: return "NoPendingRequest";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::NotAFile: return "NotAFile";
        case ErrorCode::NotACommit: return "NotACommit";
        case ErrorCode::OversizeData: return "OversizeData";
        case ErrorCode::StorageFull: return "StorageFull";
        case ErrorCode::CorruptObject: return "CorruptObject";
        case ErrorCode::AuthFailure: return "AuthFailure";
        case ErrorCode::CorruptChain: return "CorruptChain";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::BadScenario: return "BadScenario";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

// Contract execution failures revert the transaction (fee charged, state
// rolled back) instead of rejecting it. Everything else is an admission or
// infrastructure error and propagates.
inline bool is_contract_revert(ErrorCode c) {
    switch (c) {
        case ErrorCode::DuplicateImage:
        case ErrorCode::Unauthorized:
        case ErrorCode::NoSuchContract:
        case ErrorCode::SelfRequest:
        case ErrorCode::DuplicatePending:
        case ErrorCode::NotOwner:
        case ErrorCode::NoPendingRequest:
        case ErrorCode::RateLimited:
            return true;
        default:
            return false;
    }
}

}  // namespace medvault
