#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "maskwm/geometry.hpp"
#include "maskwm/urdf.hpp"

namespace maskwm {

// World-frame pose per link, indexed like chain.links.
struct LinkPoses {
    std::vector<std::string> names;
    std::vector<Pose> poses;

    const Pose& at(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return poses[i];
        throw MissingLink("no pose for link '" + name + "'");
    }
};

namespace detail {

inline Pose joint_motion(const JointSpec& joint, double value) {
    switch (joint.kind) {
        case JointKind::revolute:
            return Pose::from_rotation(axis_angle_rotation(joint.axis, value));
        case JointKind::prismatic:
            return Pose::from_translation(joint.axis * value);
        case JointKind::fixed:
            return Pose::identity();
    }
    return Pose::identity();
}

// FK without the limit check; used by the numeric Jacobian, whose probe
// points may step just outside the limits.
inline LinkPoses fk_unchecked(const KinematicChain& chain, const JointState& q) {
    LinkPoses out;
    out.names.reserve(chain.links.size());
    for (const Link& l : chain.links) out.names.push_back(l.name);
    out.poses.assign(chain.links.size(), Pose::identity());

    for (std::size_t ji : chain.topo_order) {
        const JointSpec& joint = chain.joints[ji];
        const Pose& parent = out.poses[chain.link_index(joint.parent_link)];
        const int ai = chain.actuated_index[ji];
        const double value = ai >= 0 ? q[static_cast<std::size_t>(ai)] : 0.0;
        out.poses[chain.link_index(joint.child_link)] =
            parent * joint.origin * joint_motion(joint, value);
    }
    return out;
}

}  // namespace detail

// Pure forward kinematics: base link pose is the identity, every other link
// pose is parent ∘ joint origin ∘ joint motion.
inline LinkPoses forward_kinematics(const KinematicChain& chain, const JointState& q) {
    validate_joint_state(chain, q);
    return detail::fk_unchecked(chain, q);
}

// Central-difference Jacobian of the `tip` pose w.r.t. the joint state.
// Rows 0-2: translation (m), rows 3-5: rotation vector (rad).
inline Eigen::MatrixXd numeric_jacobian(const KinematicChain& chain, const JointState& q,
                                        const std::string& tip, double step = 1e-6) {
    const int d = chain.actuated_count;
    Eigen::MatrixXd jac(6, d);
    for (int i = 0; i < d; ++i) {
        JointState qp = q, qm = q;
        qp[static_cast<std::size_t>(i)] += step;
        qm[static_cast<std::size_t>(i)] -= step;
        const Pose pp = detail::fk_unchecked(chain, qp).at(tip);
        const Pose pm = detail::fk_unchecked(chain, qm).at(tip);
        jac.block<3, 1>(0, i) = (pp.translation - pm.translation) / (2.0 * step);
        jac.block<3, 1>(3, i) = rotation_log(pp.rotation * pm.rotation.transpose()) / (2.0 * step);
    }
    return jac;
}

struct IkConfig {
    double damping = 0.05;    // λ of the damped-least-squares update
    int max_iters = 200;
    double tol_pos = 1e-4;    // m
    double tol_rot = 1e-3;    // rad
    double max_step = 0.5;    // per-iteration cap on ‖Δq‖
};

// Upper bound on how far `tip` can get from the base: joint origins plus
// prismatic travel. Articulation can only shorten this.
inline double chain_reach(const KinematicChain& chain, const std::string& tip) {
    double reach = 0.0;
    std::string cur = tip;
    while (cur != chain.root_link) {
        auto j = chain.parent_joint(cur);
        if (!j) throw MissingLink("link '" + cur + "' is not connected to the root");
        const JointSpec& joint = chain.joints[*j];
        reach += joint.origin.translation.norm();
        if (joint.kind == JointKind::prismatic)
            reach += std::max(std::abs(joint.lower), std::abs(joint.upper));
        cur = joint.parent_link;
    }
    return reach;
}

// Damped-least-squares IK with a numeric Jacobian. Chains with fewer than
// six actuated joints are solved for position only. Limits clamp inside the
// iteration (IK is a search; FK remains a strict measurement).
inline JointState inverse_kinematics(const KinematicChain& chain, const Pose& target,
                                     const JointState& seed, const IkConfig& cfg = {},
                                     std::string tip = {}) {
    if (tip.empty()) tip = chain.end_link();
    const int d = chain.actuated_count;
    if (d == 0) throw ShapeError("chain has no actuated joints");
    const bool full_pose = d >= 6;

    if (target.translation.norm() > chain_reach(chain, tip))
        throw UnreachableTarget("target at " + std::to_string(target.translation.norm()) +
                                " m exceeds chain reach " + std::to_string(chain_reach(chain, tip)) + " m");

    auto clamp_limits = [&](JointState& q) {
        for (std::size_t ji = 0; ji < chain.joints.size(); ++ji) {
            const int ai = chain.actuated_index[ji];
            if (ai < 0) continue;
            double& v = q[static_cast<std::size_t>(ai)];
            v = std::min(chain.joints[ji].upper, std::max(chain.joints[ji].lower, v));
        }
    };

    JointState q = seed;
    clamp_limits(q);
    const int rows = full_pose ? 6 : 3;
    double best_pos_err = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter <= cfg.max_iters; ++iter) {
        const Pose fk = detail::fk_unchecked(chain, q).at(tip);
        const Vec3 err_pos = target.translation - fk.translation;
        const Vec3 err_rot = rotation_log(target.rotation * fk.rotation.transpose());
        const double pos_norm = err_pos.norm();
        best_pos_err = std::min(best_pos_err, pos_norm);

        if (pos_norm <= cfg.tol_pos && (!full_pose || err_rot.norm() <= cfg.tol_rot)) return q;
        if (iter == cfg.max_iters) break;

        Eigen::MatrixXd jac6 = numeric_jacobian(chain, q, tip);
        Eigen::MatrixXd jac = jac6.topRows(rows);
        Eigen::VectorXd err(rows);
        err.head<3>() = err_pos;
        if (full_pose) err.tail<3>() = err_rot;

        Eigen::MatrixXd gram = jac * jac.transpose();
        gram.diagonal().array() += cfg.damping * cfg.damping;
        Eigen::VectorXd dq = jac.transpose() * gram.ldlt().solve(err);
        const double dq_norm = dq.norm();
        if (dq_norm > cfg.max_step) dq *= cfg.max_step / dq_norm;

        for (int i = 0; i < d; ++i) q[static_cast<std::size_t>(i)] += dq(i);
        clamp_limits(q);
    }
    throw DidNotConverge(best_pos_err,
                         "IK did not reach tolerance after " + std::to_string(cfg.max_iters) +
                             " iterations (best position error " + std::to_string(best_pos_err) + " m)");
}

}  // namespace maskwm
