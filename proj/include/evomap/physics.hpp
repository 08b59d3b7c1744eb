#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "evomap/cppn.hpp"
#include "evomap/genome.hpp"

namespace evomap {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(Vec2 o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    double length() const { return std::sqrt(x * x + y * y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline Vec2 cross(double s, Vec2 v) { return {-s * v.y, s * v.x}; }
inline Vec2 rotate(Vec2 v, double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct SimConfig {
    double timestep = 1.0 / 60.0;
    double gravity = 9.81;          // units/s^2, downward
    int max_steps = 2000;
    double line_speed = 0.02;       // kill line, units per step
    double motor_gain = 5.0;        // rad/s per radian of tracking error
    double max_motor_torque = 80.0;
    double friction = 0.8;
    int settle_steps = 0;           // steps before the clock and line start
    int velocity_iterations = 10;
};

struct EvalResult {
    double fitness = 0.0;
    int steps_used = 0;
    bool killed_by_line = false;
};

inline double controller_target(const ControllerSpec& c, int t) {
    return c.amplitude * std::sin(2.0 * std::numbers::pi * t / c.period + c.phase);
}

namespace phys {

struct Body {
    Vec2 position;
    double angle = 0.0;
    Vec2 velocity;
    double angular_velocity = 0.0;
    double inv_mass = 0.0;
    double inv_inertia = 0.0;
    ModuleShape shape = ModuleShape::Rectangle;
    double half_w = 0.0;  // rectangles
    double half_h = 0.0;
    double radius = 0.0;  // circles
};

struct RevoluteJoint {
    int parent = -1;
    int child = -1;
    Vec2 local_anchor_parent;  // in parent body frame
    Vec2 local_anchor_child;   // in child body frame
    double rest_relative_angle = 0.0;
    ControllerSpec controller;

    // per-step solver state
    Vec2 r_parent, r_child;
    double k11 = 0, k12 = 0, k22 = 0;  // inverse of the 2x2 constraint mass
    Vec2 bias;
    double motor_mass = 0.0;
    double motor_target_velocity = 0.0;
    double motor_impulse = 0.0;
    Vec2 impulse;
};

struct Contact {
    int body_a = -1;  // dynamic
    int body_b = -1;  // dynamic, or -1 for terrain
    Vec2 position;
    Vec2 normal;  // from b to a; pushing a out along +normal separates
    double penetration = 0.0;

    double normal_mass = 0.0;
    double tangent_mass = 0.0;
    double bias = 0.0;
    double normal_impulse = 0.0;
    double tangent_impulse = 0.0;
};

// Static terrain as a piecewise-linear chain over x in [0, course length]:
// flat startpad, then one vertex per terrain unit.
struct GroundChain {
    std::vector<Vec2> vertices;

    explicit GroundChain(const Terrain& t) {
        vertices.reserve(kTerrainUnits + 3);
        vertices.push_back({0.0, 0.0});
        vertices.push_back({kStartpadLength, 0.0});
        for (int i = 0; i < kTerrainUnits; ++i)
            vertices.push_back({kStartpadLength + i + 1.0, t.heights[i]});
        // extend flat past the course end so runners cannot fall off
        vertices.push_back({kCourseLength + 50.0, t.heights[kTerrainUnits - 1]});
    }

    // Segment index covering x (clamped at the ends).
    int segment_at(double x) const {
        if (x <= vertices[1].x) return 0;
        double off = x - kStartpadLength;
        int idx = 1 + static_cast<int>(std::floor(off));
        return std::clamp(idx, 0, static_cast<int>(vertices.size()) - 2);
    }
};

inline Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 <= 0.0) return a;
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + ab * t;
}

inline std::array<Vec2, 4> box_corners(const Body& b) {
    Vec2 ex = rotate({b.half_w, 0.0}, b.angle);
    Vec2 ey = rotate({0.0, b.half_h}, b.angle);
    return {b.position + ex + ey, b.position - ex + ey, b.position - ex - ey,
            b.position + ex - ey};
}

class World {
public:
    World(const CreatureSpec& creature, const Terrain& terrain, const SimConfig& cfg)
        : cfg_(cfg), ground_(terrain) {
        if (creature.nodes.empty())
            throw std::invalid_argument("creature has no modules");
        build(creature);
    }

    const Body& root() const { return bodies_[0]; }
    std::size_t body_count() const { return bodies_.size(); }
    std::size_t joint_count() const { return joints_.size(); }
    const GroundChain& ground() const { return ground_; }
    const std::vector<Body>& bodies() const { return bodies_; }

    // One fixed timestep; t is the controller clock.
    void step(int t) {
        const double dt = cfg_.timestep;
        const double inv_dt = 1.0 / dt;

        for (auto& b : bodies_)
            if (b.inv_mass > 0.0) b.velocity.y -= cfg_.gravity * dt;

        contacts_.clear();
        collide_ground();
        collide_bodies();

        for (auto& j : joints_) prestep_joint(j, t, inv_dt);
        for (auto& c : contacts_) prestep_contact(c, inv_dt);

        for (int it = 0; it < cfg_.velocity_iterations; ++it) {
            for (auto& j : joints_) solve_joint(j);
            for (auto& c : contacts_) solve_contact(c);
        }

        for (auto& b : bodies_) {
            b.position += b.velocity * dt;
            b.angle += b.angular_velocity * dt;
        }
    }

private:
    void build(const CreatureSpec& creature) {
        bodies_.reserve(creature.nodes.size());
        std::vector<double> rest_angle(creature.nodes.size(), 0.0);
        std::vector<Vec2> rest_pos(creature.nodes.size());

        for (std::size_t i = 0; i < creature.nodes.size(); ++i) {
            const CreatureNode& node = creature.nodes[i];
            const ModuleSpec& m = node.module;
            Body b;
            b.shape = m.shape;
            double density = 1.0;
            if (m.shape == ModuleShape::Rectangle) {
                b.half_w = m.width / 2.0;
                b.half_h = m.height / 2.0;
                double mass = density * m.width * m.height;
                double inertia = mass * (m.width * m.width + m.height * m.height) / 12.0;
                b.inv_mass = 1.0 / mass;
                b.inv_inertia = 1.0 / inertia;
            } else {
                b.radius = m.radius;
                double mass = density * std::numbers::pi * m.radius * m.radius;
                double inertia = 0.5 * mass * m.radius * m.radius;
                b.inv_mass = 1.0 / mass;
                b.inv_inertia = 1.0 / inertia;
            }

            if (node.parent < 0) {
                rest_angle[i] = 0.0;
                rest_pos[i] = {0.0, 0.0};
            } else {
                const Body& parent = bodies_[node.parent];
                double parent_angle = rest_angle[node.parent];
                // Connection points on the parent rectangle: left, top,
                // right side midpoints, with outward normals pointing away
                // from the body.
                Vec2 cp_local;
                double cp_normal_angle;
                switch (node.parent_connection_point) {
                    case 0:
                        cp_local = {-parent.half_w, 0.0};
                        cp_normal_angle = std::numbers::pi;
                        break;
                    case 1:
                        cp_local = {0.0, parent.half_h};
                        cp_normal_angle = std::numbers::pi / 2.0;
                        break;
                    default:
                        cp_local = {parent.half_w, 0.0};
                        cp_normal_angle = 0.0;
                        break;
                }
                double child_angle = parent_angle + (cp_normal_angle - std::numbers::pi / 2.0) +
                                     m.attach_angle;
                // The child's anchor is the midpoint of its bottom side (or
                // the bottom of the circle).
                Vec2 child_anchor_local =
                    (m.shape == ModuleShape::Rectangle) ? Vec2{0.0, -b.half_h}
                                                        : Vec2{0.0, -m.radius};
                Vec2 anchor_world = rest_pos[node.parent] + rotate(cp_local, parent_angle);
                rest_angle[i] = child_angle;
                rest_pos[i] = anchor_world - rotate(child_anchor_local, child_angle);

                RevoluteJoint j;
                j.parent = node.parent;
                j.child = static_cast<int>(i);
                j.local_anchor_parent = cp_local;
                j.local_anchor_child = child_anchor_local;
                j.rest_relative_angle = child_angle - parent_angle;
                j.controller = m.controller;
                joints_.push_back(j);
            }

            b.position = rest_pos[i];
            b.angle = rest_angle[i];
            bodies_.push_back(b);
        }

        // Translate the assembly so the root sits mid-startpad with the
        // creature's lowest point 0.1 units above the flat pad.
        double min_y = 1e300;
        for (const auto& b : bodies_) {
            if (b.shape == ModuleShape::Circle) {
                min_y = std::min(min_y, b.position.y - b.radius);
            } else {
                for (Vec2 corner : box_corners(b)) min_y = std::min(min_y, corner.y);
            }
        }
        Vec2 shift = {10.0 - bodies_[0].position.x, 0.1 - min_y};
        for (auto& b : bodies_) b.position += shift;

        adjacent_.assign(bodies_.size() * bodies_.size(), false);
        for (const auto& j : joints_) {
            adjacent_[j.parent * bodies_.size() + j.child] = true;
            adjacent_[j.child * bodies_.size() + j.parent] = true;
        }
    }

    void add_contact(int a, int b, Vec2 pos, Vec2 normal, double penetration) {
        Contact c;
        c.body_a = a;
        c.body_b = b;
        c.position = pos;
        c.normal = normal;
        c.penetration = penetration;
        contacts_.push_back(c);
    }

    void collide_point_ground(int body_index, Vec2 p, double radius) {
        // Test p against the segments near its x; keep the deepest hit.
        // Interior overlaps use the signed perpendicular depth; beyond a
        // segment's span only a circle close to the endpoint can touch it
        // (a point below the endpoint belongs to the adjacent segment).
        int mid = ground_.segment_at(p.x);
        int lo = std::max(0, mid - 2);
        int hi = std::min(static_cast<int>(ground_.vertices.size()) - 2, mid + 2);
        double best_pen = 0.0;
        Vec2 best_normal, best_pos;
        for (int s = lo; s <= hi; ++s) {
            Vec2 a = ground_.vertices[s];
            Vec2 b = ground_.vertices[s + 1];
            Vec2 seg = b - a;
            double len2 = dot(seg, seg);
            if (len2 <= 0.0) continue;
            Vec2 up_normal = Vec2{-seg.y, seg.x} * (1.0 / std::sqrt(len2));
            double along = dot(p - a, seg);
            double pen;
            Vec2 n, pos;
            if (along < 0.0 || along > len2) {
                if (radius <= 0.0) continue;
                Vec2 q = along < 0.0 ? a : b;
                Vec2 d = p - q;
                double dist = d.length();
                if (dist >= radius || dist <= 1e-9) continue;
                if (dot(d, up_normal) <= 0.0) continue;
                pen = radius - dist;
                n = d * (1.0 / dist);
                pos = q;
            } else {
                double height = dot(p - a, up_normal);
                if (height >= radius) continue;
                pen = radius - height;
                n = up_normal;
                pos = p - up_normal * height;
            }
            if (pen > best_pen) {
                best_pen = pen;
                best_normal = n;
                best_pos = pos;
            }
        }
        if (best_pen > 0.0)
            add_contact(body_index, -1, best_pos, best_normal, best_pen);
    }

    void collide_ground() {
        for (std::size_t i = 0; i < bodies_.size(); ++i) {
            const Body& b = bodies_[i];
            if (b.shape == ModuleShape::Circle) {
                collide_point_ground(static_cast<int>(i), b.position, b.radius);
            } else {
                for (Vec2 corner : box_corners(b))
                    collide_point_ground(static_cast<int>(i), corner, 0.0);
            }
        }
    }

    // Deepest-point test of p against box b; fills normal (pointing out of
    // the box) and penetration. Returns false if p is outside.
    static bool point_in_box(const Body& b, Vec2 p, Vec2& normal, double& penetration) {
        Vec2 local = rotate(p - b.position, -b.angle);
        double dx = b.half_w - std::abs(local.x);
        double dy = b.half_h - std::abs(local.y);
        if (dx <= 0.0 || dy <= 0.0) return false;
        Vec2 local_normal;
        if (dx < dy) {
            local_normal = {local.x >= 0.0 ? 1.0 : -1.0, 0.0};
            penetration = dx;
        } else {
            local_normal = {0.0, local.y >= 0.0 ? 1.0 : -1.0};
            penetration = dy;
        }
        normal = rotate(local_normal, b.angle);
        return true;
    }

    void collide_pair(int ia, int ib) {
        Body& a = bodies_[ia];
        Body& b = bodies_[ib];
        if (a.shape == ModuleShape::Circle && b.shape == ModuleShape::Circle) {
            Vec2 d = a.position - b.position;
            double dist = d.length();
            double r = a.radius + b.radius;
            if (dist < r && dist > 1e-9) {
                Vec2 n = d * (1.0 / dist);
                add_contact(ia, ib, b.position + n * b.radius, n, r - dist);
            }
            return;
        }
        if (a.shape == ModuleShape::Circle || b.shape == ModuleShape::Circle) {
            int ic = (a.shape == ModuleShape::Circle) ? ia : ib;
            int ix = (a.shape == ModuleShape::Circle) ? ib : ia;
            const Body& circle = bodies_[ic];
            const Body& box = bodies_[ix];
            Vec2 local = rotate(circle.position - box.position, -box.angle);
            Vec2 clamped = {std::clamp(local.x, -box.half_w, box.half_w),
                            std::clamp(local.y, -box.half_h, box.half_h)};
            Vec2 closest = box.position + rotate(clamped, box.angle);
            Vec2 d = circle.position - closest;
            double dist = d.length();
            if (dist < circle.radius && dist > 1e-9) {
                Vec2 n = d * (1.0 / dist);  // pushes the circle away from the box
                add_contact(ic, ix, closest, n, circle.radius - dist);
            }
            return;
        }
        // box-box: vertex-in-box both ways
        for (Vec2 corner : box_corners(a)) {
            Vec2 n;
            double pen;
            if (point_in_box(b, corner, n, pen)) add_contact(ia, ib, corner, n, pen);
        }
        for (Vec2 corner : box_corners(b)) {
            Vec2 n;
            double pen;
            if (point_in_box(a, corner, n, pen)) add_contact(ib, ia, corner, n, pen);
        }
    }

    void collide_bodies() {
        for (std::size_t i = 0; i < bodies_.size(); ++i)
            for (std::size_t j = i + 1; j < bodies_.size(); ++j) {
                if (adjacent_[i * bodies_.size() + j]) continue;
                collide_pair(static_cast<int>(i), static_cast<int>(j));
            }
    }

    void prestep_joint(RevoluteJoint& j, int t, double inv_dt) {
        Body& p = bodies_[j.parent];
        Body& c = bodies_[j.child];
        j.r_parent = rotate(j.local_anchor_parent, p.angle);
        j.r_child = rotate(j.local_anchor_child, c.angle);

        // K = [1/mp + 1/mc] I + skew terms from the two lever arms
        double k11 = p.inv_mass + c.inv_mass +
                     p.inv_inertia * j.r_parent.y * j.r_parent.y +
                     c.inv_inertia * j.r_child.y * j.r_child.y;
        double k12 = -p.inv_inertia * j.r_parent.x * j.r_parent.y -
                     c.inv_inertia * j.r_child.x * j.r_child.y;
        double k22 = p.inv_mass + c.inv_mass +
                     p.inv_inertia * j.r_parent.x * j.r_parent.x +
                     c.inv_inertia * j.r_child.x * j.r_child.x;
        double det = k11 * k22 - k12 * k12;
        if (std::abs(det) < 1e-12) det = det < 0 ? -1e-12 : 1e-12;
        double inv_det = 1.0 / det;
        j.k11 = k22 * inv_det;
        j.k12 = -k12 * inv_det;
        j.k22 = k11 * inv_det;

        Vec2 error = (c.position + j.r_child) - (p.position + j.r_parent);
        j.bias = error * (-kJointBeta * inv_dt);

        j.motor_mass = 1.0 / (p.inv_inertia + c.inv_inertia);
        double joint_angle = (c.angle - p.angle) - j.rest_relative_angle;
        double target = controller_target(j.controller, t);
        j.motor_target_velocity = cfg_.motor_gain * (target - joint_angle);

        j.impulse = {0.0, 0.0};
        j.motor_impulse = 0.0;
    }

    void solve_joint(RevoluteJoint& j) {
        Body& p = bodies_[j.parent];
        Body& c = bodies_[j.child];

        // motor: drive relative angular velocity, torque-limited
        double cdot = c.angular_velocity - p.angular_velocity - j.motor_target_velocity;
        double d_impulse = -j.motor_mass * cdot;
        double max_impulse = cfg_.max_motor_torque * cfg_.timestep;
        double old = j.motor_impulse;
        j.motor_impulse = std::clamp(old + d_impulse, -max_impulse, max_impulse);
        d_impulse = j.motor_impulse - old;
        p.angular_velocity -= p.inv_inertia * d_impulse;
        c.angular_velocity += c.inv_inertia * d_impulse;

        // point constraint
        Vec2 vel_p = p.velocity + cross(p.angular_velocity, j.r_parent);
        Vec2 vel_c = c.velocity + cross(c.angular_velocity, j.r_child);
        Vec2 rel = vel_c - vel_p + j.bias * -1.0;
        Vec2 impulse = {-(j.k11 * rel.x + j.k12 * rel.y), -(j.k12 * rel.x + j.k22 * rel.y)};
        j.impulse += impulse;
        p.velocity -= impulse * p.inv_mass;
        p.angular_velocity -= p.inv_inertia * cross(j.r_parent, impulse);
        c.velocity += impulse * c.inv_mass;
        c.angular_velocity += c.inv_inertia * cross(j.r_child, impulse);
    }

    void prestep_contact(Contact& c, double inv_dt) {
        const Body& a = bodies_[c.body_a];
        Vec2 ra = c.position - a.position;
        Vec2 tangent = {-c.normal.y, c.normal.x};
        double kn = a.inv_mass;
        double kt = a.inv_mass;
        double ra_n = cross(ra, c.normal);
        double ra_t = cross(ra, tangent);
        kn += a.inv_inertia * ra_n * ra_n;
        kt += a.inv_inertia * ra_t * ra_t;
        if (c.body_b >= 0) {
            const Body& b = bodies_[c.body_b];
            Vec2 rb = c.position - b.position;
            double rb_n = cross(rb, c.normal);
            double rb_t = cross(rb, tangent);
            kn += b.inv_mass + b.inv_inertia * rb_n * rb_n;
            kt += b.inv_mass + b.inv_inertia * rb_t * rb_t;
        }
        c.normal_mass = 1.0 / kn;
        c.tangent_mass = 1.0 / kt;
        c.bias = kBaumgarte * inv_dt * std::max(0.0, c.penetration - kPenetrationSlop);
        c.normal_impulse = 0.0;
        c.tangent_impulse = 0.0;
    }

    Vec2 relative_velocity_at(const Contact& c) const {
        const Body& a = bodies_[c.body_a];
        Vec2 ra = c.position - a.position;
        Vec2 v = a.velocity + cross(a.angular_velocity, ra);
        if (c.body_b >= 0) {
            const Body& b = bodies_[c.body_b];
            Vec2 rb = c.position - b.position;
            v -= b.velocity + cross(b.angular_velocity, rb);
        }
        return v;
    }

    void apply_contact_impulse(const Contact& c, Vec2 impulse) {
        Body& a = bodies_[c.body_a];
        Vec2 ra = c.position - a.position;
        a.velocity += impulse * a.inv_mass;
        a.angular_velocity += a.inv_inertia * cross(ra, impulse);
        if (c.body_b >= 0) {
            Body& b = bodies_[c.body_b];
            Vec2 rb = c.position - b.position;
            b.velocity -= impulse * b.inv_mass;
            b.angular_velocity -= b.inv_inertia * cross(rb, impulse);
        }
    }

    void solve_contact(Contact& c) {
        Vec2 rel = relative_velocity_at(c);
        double vn = dot(rel, c.normal);
        double d_normal = c.normal_mass * (-vn + c.bias);
        double old_n = c.normal_impulse;
        c.normal_impulse = std::max(old_n + d_normal, 0.0);
        d_normal = c.normal_impulse - old_n;
        apply_contact_impulse(c, c.normal * d_normal);

        Vec2 tangent = {-c.normal.y, c.normal.x};
        rel = relative_velocity_at(c);
        double vt = dot(rel, tangent);
        double d_tangent = c.tangent_mass * (-vt);
        double max_friction = cfg_.friction * c.normal_impulse;
        double old_t = c.tangent_impulse;
        c.tangent_impulse = std::clamp(old_t + d_tangent, -max_friction, max_friction);
        d_tangent = c.tangent_impulse - old_t;
        apply_contact_impulse(c, tangent * d_tangent);
    }

    static constexpr double kBaumgarte = 0.2;
    static constexpr double kPenetrationSlop = 0.005;
    static constexpr double kJointBeta = 0.2;

    SimConfig cfg_;
    GroundChain ground_;
    std::vector<Body> bodies_;
    std::vector<RevoluteJoint> joints_;
    std::vector<Contact> contacts_;
    std::vector<bool> adjacent_;
};

}  // namespace phys

using phys::World;

inline World build_world(const CreatureSpec& creature, const Terrain& terrain,
                         const SimConfig& cfg = {}) {
    return World(creature, terrain, cfg);
}

// Steps the creature over the terrain until the step budget runs out or the
// kill line catches the root module. Fitness is the root's net horizontal
// progress, clamped to the course bounds. Pure: identical inputs give
// bit-identical results.
inline EvalResult evaluate(const CreatureSpec& creature, const Terrain& terrain,
                           const SimConfig& cfg = {},
                           std::vector<Vec2>* trace = nullptr) {
    World world(creature, terrain, cfg);
    const double start_x = world.root().position.x;
    if (trace) trace->push_back(world.root().position);

    EvalResult result;
    int t = 0;
    for (; t < cfg.max_steps; ++t) {
        world.step(t);
        if (trace) trace->push_back(world.root().position);
        double line_x = cfg.line_speed * static_cast<double>(t + 1 - cfg.settle_steps);
        if (line_x >= world.root().position.x) {
            result.killed_by_line = true;
            ++t;
            break;
        }
    }
    result.steps_used = t;
    result.fitness = std::clamp(world.root().position.x - start_x, 0.0, kCourseLength);
    return result;
}

}  // namespace evomap
