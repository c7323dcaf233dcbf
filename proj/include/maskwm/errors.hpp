#pragma once

#include <stdexcept>
#include <string>

namespace maskwm {

// Base error carrying a stable machine-parsable code. The CLI prints
// errors as "error: <code>: <what>" on a single line.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define MASKWM_DEFINE_ERROR(NAME, CODE)                          \
    class NAME : public Error {                                  \
    public:                                                      \
        explicit NAME(const std::string& message)                \
            : Error(CODE, message) {}                            \
    }

MASKWM_DEFINE_ERROR(MalformedXml, "malformed_xml");
MASKWM_DEFINE_ERROR(CyclicJointGraph, "cyclic_joint_graph");
MASKWM_DEFINE_ERROR(UnsupportedGeometry, "unsupported_geometry");
MASKWM_DEFINE_ERROR(MissingLink, "missing_link");
MASKWM_DEFINE_ERROR(JointLimitViolation, "joint_limit_violation");
MASKWM_DEFINE_ERROR(UnreachableTarget, "unreachable_target");
MASKWM_DEFINE_ERROR(ShapeError, "shape_error");
MASKWM_DEFINE_ERROR(KTooLarge, "k_too_large");
MASKWM_DEFINE_ERROR(NonFiniteLoss, "non_finite_loss");
MASKWM_DEFINE_ERROR(SceneSamplingFailed, "scene_sampling_failed");
MASKWM_DEFINE_ERROR(TooFewPolicies, "too_few_policies");
MASKWM_DEFINE_ERROR(ZeroVariance, "zero_variance");
MASKWM_DEFINE_ERROR(InfeasiblePlan, "infeasible_plan");
MASKWM_DEFINE_ERROR(IoError, "io_error");
MASKWM_DEFINE_ERROR(ConfigError, "config_error");

#undef MASKWM_DEFINE_ERROR

// Iterative solvers report their best residual when they give up.
class DidNotConverge : public Error {
public:
    DidNotConverge(double best_error, const std::string& message)
        : Error("did_not_converge", message), best_error_(best_error) {}

    double best_error() const noexcept { return best_error_; }

private:
    double best_error_;
};

}  // namespace maskwm
