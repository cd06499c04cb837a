#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmstein {

enum class ErrorCode {
    OddTotalDegree,
    EmptySequence,
    NegativeDegree,
    ZeroMeanDegree,
    InvalidDistribution,
    InvalidVertex,
    InvalidConfiguration,
    UnknownStatistic,
    StatisticOutOfBound,
    ZeroVariance,
    PreconditionViolated,
    EmptySample,
    DegenerateVariance,
    InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::OddTotalDegree: return "OddTotalDegree";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::NegativeDegree: return "NegativeDegree";
    case ErrorCode::ZeroMeanDegree: return "ZeroMeanDegree";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidVertex: return "InvalidVertex";
    case ErrorCode::InvalidConfiguration: return "InvalidConfiguration";
    case ErrorCode::UnknownStatistic: return "UnknownStatistic";
    case ErrorCode::StatisticOutOfBound: return "StatisticOutOfBound";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Input or precondition problems, as opposed to failures detected while
/// a computation is already running.
inline bool is_validation_error(ErrorCode code) {
    return code != ErrorCode::StatisticOutOfBound && code != ErrorCode::DegenerateVariance;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace cmstein
