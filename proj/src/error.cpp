// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/error.hpp"

namespace oceanqa {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyRange: return "EmptyRange";
        case ErrorCode::ResolutionMismatch: return "ResolutionMismatch";
        case ErrorCode::OutOfCoverage: return "OutOfCoverage";
        case ErrorCode::UnitMismatch: return "UnitMismatch";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::UnknownLocation: return "UnknownLocation";
        case ErrorCode::AmbiguousTime: return "AmbiguousTime";
        case ErrorCode::UnsupportedIntent: return "UnsupportedIntent";
        case ErrorCode::InvalidQuery: return "InvalidQuery";
        case ErrorCode::DuplicateName: return "DuplicateName";
        case ErrorCode::UnknownFunction: return "UnknownFunction";
        case ErrorCode::ArgValidation: return "ArgValidation";
        case ErrorCode::UpstreamFailure: return "UpstreamFailure";
        case ErrorCode::StationUnknown: return "StationUnknown";
        case ErrorCode::ProviderError: return "ProviderError";
        case ErrorCode::GapOnly: return "GapOnly";
        case ErrorCode::NoValidNode: return "NoValidNode";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::DegenerateTime: return "DegenerateTime";
        case ErrorCode::MissingBaselineEntry: return "MissingBaselineEntry";
        case ErrorCode::FullyMasked: return "FullyMasked";
        case ErrorCode::EmptyDocument: return "EmptyDocument";
        case ErrorCode::EmptyStore: return "EmptyStore";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::SynthesisNumericMismatch: return "SynthesisNumericMismatch";
        case ErrorCode::ModelUnavailable: return "ModelUnavailable";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::MalformedRequest: return "MalformedRequest";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Internal: return "Internal";
    }
    return "Internal";
}

nlohmann::json Error::to_json() const {
    return {{"code", std::string(to_string(code_))}, {"message", what()}, {"details", details_}};
}

}  // namespace oceanqa
