#pragma once

#include <stdexcept>
#include <string>

namespace geomq {

enum class Status : int {
    Ok = 0,
    InvalidArgument = 1,
    UnknownChart = 2,
    DegenerateChart = 3,
    NonSymmetricForm = 4,
    OffsetDegenerate = 5,
    PoleProximity = 6,
    StepFailure = 7,
    GridTooCoarse = 8,
    FrameDiscontinuity = 9,
    ConfigError = 10,
    IoError = 11,
    AllocError = 12,
    InternalError = 13,
};

class Error : public std::runtime_error {
public:
    Error(Status s, const std::string& msg) : std::runtime_error(msg), status_(s) {}
    Status status() const { return status_; }

private:
    Status status_;
};

[[noreturn]] inline void fail(Status s, const std::string& msg) { throw Error(s, msg); }

inline const char* status_name(Status s) {
    switch (s) {
        case Status::Ok: return "ok";
        case Status::InvalidArgument: return "invalid_argument";
        case Status::UnknownChart: return "unknown_chart";
        case Status::DegenerateChart: return "degenerate_chart";
        case Status::NonSymmetricForm: return "nonsymmetric_form";
        case Status::OffsetDegenerate: return "offset_degenerate";
        case Status::PoleProximity: return "pole_proximity";
        case Status::StepFailure: return "step_failure";
        case Status::GridTooCoarse: return "grid_too_coarse";
        case Status::FrameDiscontinuity: return "frame_discontinuity";
        case Status::ConfigError: return "config_error";
        case Status::IoError: return "io_error";
        case Status::AllocError: return "alloc_error";
        case Status::InternalError: return "internal_error";
    }
    return "unknown";
}

} // namespace geomq
