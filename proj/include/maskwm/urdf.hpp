#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "maskwm/errors.hpp"
#include "maskwm/geometry.hpp"

namespace maskwm {

enum class JointKind { revolute, prismatic, fixed };

struct JointSpec {
    std::string name;
    JointKind kind = JointKind::fixed;
    Vec3 axis = Vec3::UnitX();
    Pose origin;  // in the parent-link frame
    double lower = 0.0;  // rad or m; unused for fixed joints
    double upper = 0.0;
    std::string parent_link;
    std::string child_link;

    bool actuated() const { return kind != JointKind::fixed; }
};

// Collision primitives only; meshes are rejected at parse time.
struct BoxGeom { Vec3 half_extents; };
struct CylinderGeom { double radius; double length; };
struct SphereGeom { double radius; };

struct LinkGeometry {
    std::variant<BoxGeom, CylinderGeom, SphereGeom> primitive;
    Pose origin;  // in the link frame
};

struct Link {
    std::string name;
    std::vector<LinkGeometry> geometries;
};

// Joint tree rooted at a single base link. Joints keep document order;
// JointState values map to actuated joints in that order.
struct KinematicChain {
    std::vector<Link> links;
    std::vector<JointSpec> joints;
    std::string root_link;
    int actuated_count = 0;

    // Derived at construction.
    std::vector<std::size_t> topo_order;       // joint indices, parents first
    std::vector<int> actuated_index;           // per joint: index into JointState, -1 if fixed

    std::size_t link_index(const std::string& name) const {
        for (std::size_t i = 0; i < links.size(); ++i)
            if (links[i].name == name) return i;
        throw MissingLink("no link named '" + name + "'");
    }

    bool has_link(const std::string& name) const {
        return std::any_of(links.begin(), links.end(),
                           [&](const Link& l) { return l.name == name; });
    }

    // Joint whose child is `link`, if any.
    std::optional<std::size_t> parent_joint(const std::string& link) const {
        for (std::size_t i = 0; i < joints.size(); ++i)
            if (joints[i].child_link == link) return i;
        return std::nullopt;
    }

    std::vector<std::string> leaf_links() const {
        std::vector<std::string> leaves;
        for (const Link& l : links) {
            bool is_parent = std::any_of(joints.begin(), joints.end(),
                                         [&](const JointSpec& j) { return j.parent_link == l.name; });
            if (!is_parent) leaves.push_back(l.name);
        }
        return leaves;
    }

    // Deepest leaf; document order breaks ties. This is the default IK tip.
    std::string end_link() const {
        std::string best = root_link;
        int best_depth = -1;
        for (const std::string& leaf : leaf_links()) {
            int depth = 0;
            std::string cur = leaf;
            while (cur != root_link) {
                auto j = parent_joint(cur);
                if (!j) break;
                cur = joints[*j].parent_link;
                ++depth;
            }
            if (depth > best_depth) {
                best_depth = depth;
                best = leaf;
            }
        }
        return best;
    }

    void finalize() {
        validate_tree();
        build_topo_order();
        // JointState values map to actuated joints in document order.
        actuated_count = 0;
        actuated_index.assign(joints.size(), -1);
        for (std::size_t i = 0; i < joints.size(); ++i)
            if (joints[i].actuated()) actuated_index[i] = actuated_count++;
    }

private:
    void validate_tree() {
        std::map<std::string, int> child_count;
        for (const JointSpec& j : joints) {
            if (!has_link(j.parent_link)) throw MissingLink("joint '" + j.name + "' references undefined parent link '" + j.parent_link + "'");
            if (!has_link(j.child_link)) throw MissingLink("joint '" + j.name + "' references undefined child link '" + j.child_link + "'");
            if (++child_count[j.child_link] > 1)
                throw MalformedXml("link '" + j.child_link + "' is the child of multiple joints");
        }
        std::vector<std::string> roots;
        for (const Link& l : links)
            if (child_count.find(l.name) == child_count.end()) roots.push_back(l.name);
        if (roots.empty()) throw CyclicJointGraph("joint graph has no root link");
        if (roots.size() > 1) {
            std::string msg = "joint graph has multiple roots:";
            for (const std::string& r : roots) msg += " " + r;
            throw MalformedXml(msg);
        }
        root_link = roots.front();
    }

    void build_topo_order() {
        topo_order.clear();
        std::vector<bool> placed(joints.size(), false);
        std::vector<std::string> frontier{root_link};
        std::size_t reached_links = 1;
        while (!frontier.empty()) {
            std::vector<std::string> next;
            for (const std::string& link : frontier) {
                for (std::size_t i = 0; i < joints.size(); ++i) {
                    if (placed[i] || joints[i].parent_link != link) continue;
                    placed[i] = true;
                    topo_order.push_back(i);
                    next.push_back(joints[i].child_link);
                    ++reached_links;
                }
            }
            frontier = std::move(next);
        }
        if (reached_links != links.size())
            throw CyclicJointGraph("some links are unreachable from the root (cycle in the joint graph)");
    }
};

using JointState = std::vector<double>;

namespace detail {

inline Vec3 parse_vec3(const std::string& text, const std::string& what) {
    std::istringstream in(text);
    Vec3 v;
    if (!(in >> v.x() >> v.y() >> v.z()))
        throw MalformedXml("cannot parse 3-vector from '" + text + "' in " + what);
    return v;
}

inline Pose parse_origin(const boost::property_tree::ptree& node) {
    Pose p;
    if (auto origin = node.get_child_optional("origin")) {
        if (auto xyz = origin->get_optional<std::string>("<xmlattr>.xyz"))
            p.translation = parse_vec3(*xyz, "<origin xyz>");
        if (auto rpy = origin->get_optional<std::string>("<xmlattr>.rpy"))
            p.rotation = rpy_to_rotation(parse_vec3(*rpy, "<origin rpy>"));
    }
    return p;
}

inline LinkGeometry parse_geometry(const boost::property_tree::ptree& coll,
                                   const std::string& link_name) {
    auto geom = coll.get_child_optional("geometry");
    if (!geom) throw MalformedXml("<collision> without <geometry> in link '" + link_name + "'");
    LinkGeometry out;
    out.origin = parse_origin(coll);
    if (auto box = geom->get_child_optional("box")) {
        Vec3 size = parse_vec3(box->get<std::string>("<xmlattr>.size", ""), "<box size>");
        if (size.minCoeff() <= 0.0) throw MalformedXml("non-positive <box> size in link '" + link_name + "'");
        out.primitive = BoxGeom{size / 2.0};
    } else if (auto cyl = geom->get_child_optional("cylinder")) {
        double radius = cyl->get<double>("<xmlattr>.radius", -1.0);
        double length = cyl->get<double>("<xmlattr>.length", -1.0);
        if (radius <= 0.0 || length <= 0.0)
            throw MalformedXml("non-positive <cylinder> dimensions in link '" + link_name + "'");
        out.primitive = CylinderGeom{radius, length};
    } else if (auto sph = geom->get_child_optional("sphere")) {
        double radius = sph->get<double>("<xmlattr>.radius", -1.0);
        if (radius <= 0.0) throw MalformedXml("non-positive <sphere> radius in link '" + link_name + "'");
        out.primitive = SphereGeom{radius};
    } else if (geom->get_child_optional("mesh")) {
        throw UnsupportedGeometry("link '" + link_name + "' uses <mesh> geometry; only box/cylinder/sphere are supported");
    } else {
        throw MalformedXml("unknown geometry primitive in link '" + link_name + "'");
    }
    return out;
}

}  // namespace detail

// Parse a URDF document (UTF-8 XML). Only <link> and <joint> children of
// <robot> are interpreted; other elements are ignored. Geometry comes from
// <collision> blocks and is limited to box/cylinder/sphere primitives.
inline KinematicChain parse_urdf(const std::string& document) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(document);
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw MalformedXml(std::string("XML parse failure: ") + e.what());
    }
    auto robot = tree.get_child_optional("robot");
    if (!robot) throw MalformedXml("document has no <robot> element");

    KinematicChain chain;
    for (const auto& [key, node] : *robot) {
        if (key == "link") {
            Link link;
            link.name = node.get<std::string>("<xmlattr>.name", "");
            if (link.name.empty()) throw MalformedXml("<link> without a name");
            for (const auto& [ckey, cnode] : node)
                if (ckey == "collision") link.geometries.push_back(detail::parse_geometry(cnode, link.name));
            chain.links.push_back(std::move(link));
        } else if (key == "joint") {
            JointSpec joint;
            joint.name = node.get<std::string>("<xmlattr>.name", "");
            if (joint.name.empty()) throw MalformedXml("<joint> without a name");
            const std::string type = node.get<std::string>("<xmlattr>.type", "");
            if (type == "revolute") joint.kind = JointKind::revolute;
            else if (type == "prismatic") joint.kind = JointKind::prismatic;
            else if (type == "fixed") joint.kind = JointKind::fixed;
            else throw MalformedXml("joint '" + joint.name + "' has unsupported type '" + type + "'");
            joint.parent_link = node.get<std::string>("parent.<xmlattr>.link", "");
            joint.child_link = node.get<std::string>("child.<xmlattr>.link", "");
            if (joint.parent_link.empty() || joint.child_link.empty())
                throw MalformedXml("joint '" + joint.name + "' is missing <parent>/<child>");
            joint.origin = detail::parse_origin(node);
            if (joint.kind != JointKind::fixed) {
                if (auto axis = node.get_optional<std::string>("axis.<xmlattr>.xyz"))
                    joint.axis = detail::parse_vec3(*axis, "<axis xyz>");
                if (std::abs(joint.axis.norm() - 1.0) > 1e-9)
                    throw MalformedXml("joint '" + joint.name + "' axis is not unit length");
                auto limit = node.get_child_optional("limit");
                if (!limit) throw MalformedXml("non-fixed joint '" + joint.name + "' has no <limit>");
                joint.lower = limit->get<double>("<xmlattr>.lower", 0.0);
                joint.upper = limit->get<double>("<xmlattr>.upper", 0.0);
                if (joint.lower > joint.upper)
                    throw MalformedXml("joint '" + joint.name + "' has lower > upper limit");
            }
            chain.joints.push_back(std::move(joint));
        }
        // anything else (<material>, comments, ...) is ignored
    }
    if (chain.links.empty()) throw MalformedXml("document defines no links");
    chain.finalize();
    return chain;
}

// Serial sub-chain from the root to `tip`, keeping only path joints/links.
// Two sub-chains of a branching (dual-arm) tree can share the root links.
inline KinematicChain subchain(const KinematicChain& chain, const std::string& tip) {
    std::vector<std::size_t> path;  // joint indices tip -> root
    std::string cur = tip;
    if (!chain.has_link(tip)) throw MissingLink("no link named '" + tip + "'");
    while (cur != chain.root_link) {
        auto j = chain.parent_joint(cur);
        if (!j) throw MissingLink("link '" + cur + "' is not connected to the root");
        path.push_back(*j);
        cur = chain.joints[*j].parent_link;
    }
    std::reverse(path.begin(), path.end());

    KinematicChain out;
    out.links.push_back(chain.links[chain.link_index(chain.root_link)]);
    for (std::size_t j : path) {
        out.joints.push_back(chain.joints[j]);
        out.links.push_back(chain.links[chain.link_index(chain.joints[j].child_link)]);
    }
    out.finalize();
    return out;
}

// Values must lie inside the actuated joint limits; violations are errors,
// never silently clamped.
inline void validate_joint_state(const KinematicChain& chain, const JointState& q) {
    if (static_cast<int>(q.size()) != chain.actuated_count)
        throw ShapeError("joint state has " + std::to_string(q.size()) + " values, chain expects " +
                         std::to_string(chain.actuated_count));
    constexpr double slack = 1e-12;
    for (std::size_t i = 0; i < chain.joints.size(); ++i) {
        const int ai = chain.actuated_index[i];
        if (ai < 0) continue;
        const double v = q[static_cast<std::size_t>(ai)];
        if (v < chain.joints[i].lower - slack || v > chain.joints[i].upper + slack)
            throw JointLimitViolation("joint " + std::to_string(ai) + " ('" + chain.joints[i].name +
                                      "') value " + std::to_string(v) + " outside [" +
                                      std::to_string(chain.joints[i].lower) + ", " +
                                      std::to_string(chain.joints[i].upper) + "]");
    }
}

}  // namespace maskwm
