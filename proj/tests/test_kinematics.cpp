#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "maskwm/kinematics.hpp"
#include "maskwm/rng.hpp"
#include "maskwm/urdf.hpp"

using namespace maskwm;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string fixture(const std::string& name) {
    return std::string(MASKWM_FIXTURE_DIR) + "/" + name;
}

const char* kPlanarDoc = R"(<?xml version="1.0"?>
<robot name="mini">
  <link name="base"/>
  <link name="a">
    <collision><origin xyz="0.5 0 0"/><geometry><box size="1 0.1 0.1"/></geometry></collision>
  </link>
  <link name="b">
    <collision><origin xyz="0.5 0 0"/><geometry><box size="1 0.1 0.1"/></geometry></collision>
  </link>
  <joint name="j1" type="revolute">
    <parent link="base"/><child link="a"/>
    <axis xyz="0 0 1"/><limit lower="-3.2" upper="3.2"/>
  </joint>
  <joint name="j2" type="revolute">
    <parent link="a"/><child link="b"/>
    <origin xyz="1 0 0"/><axis xyz="0 0 1"/><limit lower="-3.2" upper="3.2"/>
  </joint>
</robot>)";

JointState random_in_limit_state(const KinematicChain& chain, Rng& rng, double shrink = 0.9) {
    JointState q;
    for (std::size_t i = 0; i < chain.joints.size(); ++i) {
        if (chain.actuated_index[i] < 0) continue;
        const double mid = 0.5 * (chain.joints[i].lower + chain.joints[i].upper);
        const double half = 0.5 * (chain.joints[i].upper - chain.joints[i].lower) * shrink;
        q.push_back(rng.uniform(mid - half, mid + half));
    }
    return q;
}

// Independent FK oracle: plain 4x4 homogeneous-matrix composition, no use
// of the Pose algebra the implementation is built on.
Eigen::Matrix4d oracle_link_matrix(const KinematicChain& chain, const JointState& q,
                                   const std::string& link) {
    auto to44 = [](const Pose& p) {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.topLeftCorner<3, 3>() = p.rotation;
        m.topRightCorner<3, 1>() = p.translation;
        return m;
    };
    std::vector<std::size_t> path;
    std::string cur = link;
    while (cur != chain.root_link) {
        auto j = chain.parent_joint(cur);
        REQUIRE(j.has_value());
        path.push_back(*j);
        cur = chain.joints[*j].parent_link;
    }
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        const JointSpec& joint = chain.joints[*it];
        m = m * to44(joint.origin);
        const int ai = chain.actuated_index[*it];
        if (ai < 0) continue;
        const double v = q[static_cast<std::size_t>(ai)];
        Eigen::Matrix4d motion = Eigen::Matrix4d::Identity();
        if (joint.kind == JointKind::revolute)
            motion.topLeftCorner<3, 3>() = axis_angle_rotation(joint.axis, v);
        else if (joint.kind == JointKind::prismatic)
            motion.topRightCorner<3, 1>() = joint.axis * v;
        m = m * motion;
    }
    return m;
}

}  // namespace

TEST_CASE("parse_urdf reads a 2-link planar arm") {
    KinematicChain chain = parse_urdf(kPlanarDoc);
    CHECK(chain.actuated_count == 2);
    CHECK(chain.links.size() == 3);
    CHECK(chain.root_link == "base");
    CHECK(chain.end_link() == "b");
}

TEST_CASE("parse_urdf rejects a cyclic joint graph") {
    const char* doc = R"(<robot name="c">
      <link name="a"/><link name="b"/>
      <joint name="j1" type="fixed"><parent link="a"/><child link="b"/></joint>
      <joint name="j2" type="fixed"><parent link="b"/><child link="a"/></joint>
    </robot>)";
    CHECK_THROWS_AS(parse_urdf(doc), CyclicJointGraph);
}

TEST_CASE("parse_urdf rejects mesh geometry and bad documents") {
    const char* mesh_doc = R"(<robot name="m">
      <link name="a">
        <collision><geometry><mesh filename="arm.stl"/></geometry></collision>
      </link>
    </robot>)";
    CHECK_THROWS_AS(parse_urdf(mesh_doc), UnsupportedGeometry);
    CHECK_THROWS_AS(parse_urdf("<robot"), MalformedXml);
    CHECK_THROWS_AS(parse_urdf("<notrobot/>"), MalformedXml);
    const char* missing = R"(<robot name="x"><link name="a"/>
      <joint name="j" type="fixed"><parent link="a"/><child link="ghost"/></joint></robot>)";
    CHECK_THROWS_AS(parse_urdf(missing), MissingLink);
}

TEST_CASE("franka_toy fixture has seven actuated joints") {
    const std::string doc = read_file(fixture("franka_toy.urdf"));
    // Oracle: count revolute/prismatic declarations in the raw document.
    std::size_t expected = 0;
    for (std::size_t pos = 0; (pos = doc.find("type=\"revolute\"", pos)) != std::string::npos; ++pos) ++expected;
    for (std::size_t pos = 0; (pos = doc.find("type=\"prismatic\"", pos)) != std::string::npos; ++pos) ++expected;
    KinematicChain chain = parse_urdf(doc);
    CHECK(expected == 7);
    CHECK(chain.actuated_count == static_cast<int>(expected));
}

TEST_CASE("forward kinematics matches the planar closed form") {
    KinematicChain chain = parse_urdf(read_file(fixture("planar2.urdf")));
    REQUIRE(chain.actuated_count == 2);

    LinkPoses straight = forward_kinematics(chain, {0.0, 0.0});
    CHECK((straight.at("tool").translation - Vec3(2, 0, 0)).norm() == doctest::Approx(0.0).epsilon(1e-12));

    LinkPoses bent = forward_kinematics(chain, {M_PI / 2.0, 0.0});
    CHECK((bent.at("tool").translation - Vec3(0, 2, 0)).norm() < 1e-12);

    CHECK_THROWS_AS(forward_kinematics(chain, {4.0, 0.0}), JointLimitViolation);
}

TEST_CASE("forward kinematics matches the homogeneous-matrix oracle") {
    for (const char* file : {"franka_toy.urdf", "dualarm_toy.urdf"}) {
        KinematicChain chain = parse_urdf(read_file(fixture(file)));
        Rng rng(71);
        for (int trial = 0; trial < 25; ++trial) {
            JointState q = random_in_limit_state(chain, rng);
            LinkPoses fk = forward_kinematics(chain, q);
            for (const Link& link : chain.links) {
                Eigen::Matrix4d m = oracle_link_matrix(chain, q, link.name);
                const Pose& p = fk.at(link.name);
                CHECK((m.topLeftCorner<3, 3>() - p.rotation).cwiseAbs().maxCoeff() < 1e-9);
                CHECK((m.topRightCorner<3, 1>() - p.translation).cwiseAbs().maxCoeff() < 1e-9);
            }
        }
    }
}

TEST_CASE("FK is 2pi-periodic in every revolute joint") {
    KinematicChain chain = parse_urdf(read_file(fixture("franka_toy.urdf")));
    // Widen the limits so q + 2π stays legal for this probe.
    for (JointSpec& j : chain.joints) {
        if (!j.actuated()) continue;
        j.lower -= 10.0;
        j.upper += 10.0;
    }
    Rng rng(5);
    JointState q = random_in_limit_state(chain, rng, 0.2);
    LinkPoses base = forward_kinematics(chain, q);
    for (int i = 0; i < chain.actuated_count; ++i) {
        JointState shifted = q;
        shifted[static_cast<std::size_t>(i)] += 2.0 * M_PI;
        LinkPoses moved = forward_kinematics(chain, shifted);
        for (std::size_t l = 0; l < base.poses.size(); ++l) {
            CHECK((base.poses[l].rotation - moved.poses[l].rotation).cwiseAbs().maxCoeff() < 1e-9);
            CHECK((base.poses[l].translation - moved.poses[l].translation).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("FK is deterministic") {
    KinematicChain chain = parse_urdf(read_file(fixture("franka_toy.urdf")));
    Rng rng(9);
    JointState q = random_in_limit_state(chain, rng);
    LinkPoses a = forward_kinematics(chain, q);
    LinkPoses b = forward_kinematics(chain, q);
    for (std::size_t l = 0; l < a.poses.size(); ++l) {
        CHECK(a.poses[l].rotation == b.poses[l].rotation);
        CHECK(a.poses[l].translation == b.poses[l].translation);
    }
}

TEST_CASE("rpy conversions") {
    CHECK((rpy_to_rotation(0, 0, 0) - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);

    // yaw of π/2 maps x̂ to ŷ
    Vec3 mapped = rpy_to_rotation(0, 0, M_PI / 2.0) * Vec3::UnitX();
    CHECK((mapped - Vec3::UnitY()).norm() < 1e-12);

    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 rpy(rng.uniform(-M_PI, M_PI), rng.uniform(-M_PI / 2 + 0.05, M_PI / 2 - 0.05),
                       rng.uniform(-M_PI, M_PI));
        const Vec3 back = rotation_to_rpy(rpy_to_rotation(rpy));
        CHECK((rpy_to_rotation(back) - rpy_to_rotation(rpy)).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((back - rpy).cwiseAbs().maxCoeff() < 1e-9);
    }

    // Gimbal lock: pitch = π/2 returns the roll = 0 representative.
    Vec3 locked = rotation_to_rpy(rpy_to_rotation(0.4, M_PI / 2.0, 0.7));
    CHECK(locked.x() == 0.0);
    CHECK((rpy_to_rotation(locked) - rpy_to_rotation(0.4, M_PI / 2.0, 0.7)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("numeric jacobian matches an independent central difference") {
    KinematicChain chain = parse_urdf(read_file(fixture("franka_toy.urdf")));
    Rng rng(31);
    JointState q = random_in_limit_state(chain, rng, 0.5);
    Eigen::MatrixXd jac = numeric_jacobian(chain, q, "hand");

    const double h = 1e-4;
    for (int i = 0; i < chain.actuated_count; ++i) {
        JointState qp = q, qm = q;
        qp[static_cast<std::size_t>(i)] += h;
        qm[static_cast<std::size_t>(i)] -= h;
        const Pose pp = forward_kinematics(chain, qp).at("hand");
        const Pose pm = forward_kinematics(chain, qm).at("hand");
        Eigen::VectorXd col(6);
        col.head<3>() = (pp.translation - pm.translation) / (2.0 * h);
        col.tail<3>() = rotation_log(pp.rotation * pm.rotation.transpose()) / (2.0 * h);
        const double scale = std::max(1.0, col.norm());
        CHECK((jac.col(i) - col).norm() / scale < 1e-5);
    }
}

TEST_CASE("IK returns the seed when it is already a solution") {
    KinematicChain chain = parse_urdf(read_file(fixture("franka_toy.urdf")));
    Rng rng(77);
    JointState q0 = random_in_limit_state(chain, rng, 0.6);
    Pose target = forward_kinematics(chain, q0).at("hand");
    JointState solved = inverse_kinematics(chain, target, q0);
    CHECK(solved == q0);
}

TEST_CASE("planar IK finds the straight-arm solution") {
    KinematicChain chain = parse_urdf(read_file(fixture("planar2.urdf")));
    IkConfig cfg;
    cfg.max_iters = 2000;  // the straight-arm target sits on a singularity
    JointState q = inverse_kinematics(chain, Pose::from_translation(Vec3(2, 0, 0)), {0.3, -0.2}, cfg);
    // Closed form for a reach-limit target: both joints at zero.
    CHECK(std::hypot(q[0], q[1]) < 0.05);
    const Pose fk = forward_kinematics(chain, q).at("tool");
    CHECK((fk.translation - Vec3(2, 0, 0)).norm() <= cfg.tol_pos);
}

TEST_CASE("IK reports unreachable targets") {
    KinematicChain chain = parse_urdf(read_file(fixture("planar2.urdf")));
    CHECK_THROWS_AS(inverse_kinematics(chain, Pose::from_translation(Vec3(3, 0, 0)), {0.0, 0.0}),
                    UnreachableTarget);
}

TEST_CASE("IK recovers FK targets from perturbed seeds") {
    KinematicChain chain = parse_urdf(read_file(fixture("franka_toy.urdf")));
    Rng rng(123);
    IkConfig cfg;
    for (int trial = 0; trial < 20; ++trial) {
        JointState q0 = random_in_limit_state(chain, rng, 0.6);
        Pose target = forward_kinematics(chain, q0).at("hand");
        JointState seed = q0;
        for (double& v : seed) v += rng.uniform(-0.2, 0.2);
        JointState solved = inverse_kinematics(chain, target, seed, cfg);
        const Pose fk = forward_kinematics(chain, solved).at("hand");
        CHECK((fk.translation - target.translation).norm() <= cfg.tol_pos);
        CHECK(rotation_distance(fk.rotation, target.rotation) <= cfg.tol_rot);
    }
}

TEST_CASE("dual-arm subchains share the root and split the joints") {
    KinematicChain tree = parse_urdf(read_file(fixture("dualarm_toy.urdf")));
    CHECK(tree.actuated_count == 6);
    KinematicChain left = subchain(tree, "left_ee");
    KinematicChain right = subchain(tree, "right_ee");
    CHECK(left.actuated_count == 3);
    CHECK(right.actuated_count == 3);
    CHECK(left.root_link == "torso");
    CHECK(right.root_link == "torso");

    // Sub-chain FK agrees with the full-tree FK on the shared links.
    Rng rng(3);
    JointState ql = random_in_limit_state(left, rng);
    JointState qfull(6, 0.0);
    for (int i = 0; i < 3; ++i) qfull[static_cast<std::size_t>(i)] = ql[static_cast<std::size_t>(i)];
    const Pose from_tree = forward_kinematics(tree, qfull).at("left_ee");
    const Pose from_sub = forward_kinematics(left, ql).at("left_ee");
    CHECK((from_tree.translation - from_sub.translation).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((from_tree.rotation - from_sub.rotation).cwiseAbs().maxCoeff() < 1e-12);
}
