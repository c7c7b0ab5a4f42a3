#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace erapod {

enum class ErrorKind {
    DimensionMismatch,
    UnstableSystem,
    DegenerateDraw,
    ProjectorDimensionMismatch,
    RankDeficient,
    PeriodMismatch,
    MissingExponent,
    ZeroMatrix,
    RankExceeded,
    BiorthogonalityFailure,
    IllConditioned,
    SingularTransformation,
    ShapeMismatch,
    SingularResolvent,
    InvalidArgument,
    ConfigError,
    IoError,
    MissingArtifact,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::UnstableSystem: return "UnstableSystem";
        case ErrorKind::DegenerateDraw: return "DegenerateDraw";
        case ErrorKind::ProjectorDimensionMismatch: return "ProjectorDimensionMismatch";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::PeriodMismatch: return "PeriodMismatch";
        case ErrorKind::MissingExponent: return "MissingExponent";
        case ErrorKind::ZeroMatrix: return "ZeroMatrix";
        case ErrorKind::RankExceeded: return "RankExceeded";
        case ErrorKind::BiorthogonalityFailure: return "BiorthogonalityFailure";
        case ErrorKind::IllConditioned: return "IllConditioned";
        case ErrorKind::SingularTransformation: return "SingularTransformation";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::SingularResolvent: return "SingularResolvent";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::MissingArtifact: return "MissingArtifact";
    }
    return "Unknown";
}

/// Single exception type for the library; `kind()` selects the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Process exit code for an error class: 2 config, 3 numerical, 4 I/O.
constexpr int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch:
        case ErrorKind::ProjectorDimensionMismatch:
        case ErrorKind::PeriodMismatch:
        case ErrorKind::ShapeMismatch:
        case ErrorKind::InvalidArgument:
        case ErrorKind::ConfigError:
            return 2;
        case ErrorKind::IoError:
        case ErrorKind::MissingArtifact:
            return 4;
        default:
            return 3;
    }
}

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace detail
}  // namespace erapod
