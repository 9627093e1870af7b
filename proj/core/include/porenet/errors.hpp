#pragma once

#include <stdexcept>
#include <string>

namespace porenet {

/// Failure categories surfaced by the library. The CLI maps these onto
/// process exit codes (config -> 2, data -> 3, anything else -> 4).
enum class errc {
    config_error,
    no_slices,
    inconsistent_stack,
    format_error,
    placement_failure,
    empty_mask,
    empty_region,
    no_boundary,
    empty_network,
    io_error,
    too_few_samples,
    invalid_data,
    arity_error,
    enumeration_limit,
    no_background,
    unknown_feature,
    no_data,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), detail_(message) {}

    errc code() const { return code_; }

    /// Message without the category prefix, for rewrapping with context.
    const std::string& detail() const { return detail_; }

private:
    errc code_;
    std::string detail_;
};

/// Process exit code the CLI uses for a failure category.
inline int exit_code_for(errc code) {
    switch (code) {
        case errc::config_error:
            return 2;
        case errc::no_slices:
        case errc::inconsistent_stack:
        case errc::format_error:
        case errc::placement_failure:
        case errc::empty_mask:
        case errc::empty_region:
        case errc::no_boundary:
        case errc::empty_network:
        case errc::io_error:
        case errc::too_few_samples:
        case errc::invalid_data:
        case errc::arity_error:
        case errc::enumeration_limit:
        case errc::no_background:
        case errc::unknown_feature:
        case errc::no_data:
            return 3;
    }
    return 4;
}

inline const char* errc_name(errc code) {
    switch (code) {
        case errc::config_error: return "ConfigError";
        case errc::no_slices: return "NoSlices";
        case errc::inconsistent_stack: return "InconsistentStack";
        case errc::format_error: return "FormatError";
        case errc::placement_failure: return "PlacementFailure";
        case errc::empty_mask: return "EmptyMask";
        case errc::empty_region: return "EmptyRegion";
        case errc::no_boundary: return "NoBoundary";
        case errc::empty_network: return "EmptyNetwork";
        case errc::io_error: return "IoError";
        case errc::too_few_samples: return "TooFewSamples";
        case errc::invalid_data: return "InvalidData";
        case errc::arity_error: return "ArityError";
        case errc::enumeration_limit: return "EnumerationLimit";
        case errc::no_background: return "NoBackground";
        case errc::unknown_feature: return "UnknownFeature";
        case errc::no_data: return "NoData";
    }
    return "Error";
}

}  // namespace porenet
