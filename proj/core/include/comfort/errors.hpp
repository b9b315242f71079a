#pragma once

#include <stdexcept>
#include <string>

namespace comfort {

// Base for all domain errors. `code()` is a stable machine-readable tag used
// by the CLI when emitting error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define COMFORT_DEFINE_ERROR(Name, code_str)                        \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& message)                   \
            : Error(code_str, message) {}                           \
    }

COMFORT_DEFINE_ERROR(MalformedFileError, "malformed_file");
COMFORT_DEFINE_ERROR(EmptyDatasetError, "empty_dataset");
COMFORT_DEFINE_ERROR(AmbiguousZoneError, "ambiguous_zone");
COMFORT_DEFINE_ERROR(DegenerateInputError, "degenerate_input");
COMFORT_DEFINE_ERROR(EmptyMatrixError, "empty_matrix");
COMFORT_DEFINE_ERROR(EmptyNodeError, "empty_node");
COMFORT_DEFINE_ERROR(LengthMismatchError, "length_mismatch");
COMFORT_DEFINE_ERROR(FeatureMismatchError, "feature_mismatch");
COMFORT_DEFINE_ERROR(InvalidConfigError, "invalid_config");
COMFORT_DEFINE_ERROR(ConfigError, "config_error");
COMFORT_DEFINE_ERROR(MissingArtifactError, "missing_artifact");
COMFORT_DEFINE_ERROR(InsufficientOccupantsError, "insufficient_occupants");
COMFORT_DEFINE_ERROR(EmptyZoneError, "empty_zone");

#undef COMFORT_DEFINE_ERROR

}  // namespace comfort
