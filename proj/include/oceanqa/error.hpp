// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace oceanqa {

enum class ErrorCode {
    // core_model
    EmptyRange,
    ResolutionMismatch,
    OutOfCoverage,
    UnitMismatch,
    InvalidValue,
    // intent_parser
    UnknownLocation,
    AmbiguousTime,
    UnsupportedIntent,
    InvalidQuery,
    // dispatcher
    DuplicateName,
    UnknownFunction,
    ArgValidation,
    UpstreamFailure,
    // noaa_clients
    StationUnknown,
    ProviderError,
    GapOnly,
    NoValidNode,
    FormatError,
    // analysis
    EmptySeries,
    InsufficientData,
    DegenerateTime,
    MissingBaselineEntry,
    FullyMasked,
    // retrieval
    EmptyDocument,
    EmptyStore,
    ProviderUnavailable,
    // orchestrator / service
    SynthesisNumericMismatch,
    ModelUnavailable,
    ConfigError,
    MalformedRequest,
    NotFound,
    Internal,
};

std::string_view to_string(ErrorCode code) noexcept;

/// The single error type thrown across module boundaries. `details` carries
/// machine-readable context (violations, unresolved tokens, retryability).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(std::move(message)), code_(code), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

    nlohmann::json to_json() const;

private:
    ErrorCode code_;
    nlohmann::json details_;
};

}  // namespace oceanqa
