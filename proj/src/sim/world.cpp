#include "dynmap/sim/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dynmap::sim {

namespace {

struct Mat2 {
    // column vectors
    Vec2 col1, col2;
    static Mat2 rotation(double theta) {
        const double c = std::cos(theta), s = std::sin(theta);
        return {{c, s}, {-s, c}};
    }
    Vec2 operator*(const Vec2& v) const { return {col1.x * v.x + col2.x * v.y, col1.y * v.x + col2.y * v.y}; }
    Mat2 transpose() const { return {{col1.x, col2.x}, {col1.y, col2.y}}; }
    Mat2 operator*(const Mat2& m) const { return {*this * m.col1, *this * m.col2}; }
};

inline Vec2 abs(const Vec2& v) { return {std::fabs(v.x), std::fabs(v.y)}; }
inline Mat2 abs(const Mat2& m) { return {abs(m.col1), abs(m.col2)}; }

struct ClipVertex {
    Vec2 v;
    uint32_t id = 0;
};

int clip_segment_to_line(ClipVertex out[2], const ClipVertex in[2], const Vec2& normal,
                         double offset, uint32_t clip_id) {
    int num_out = 0;
    const double d0 = normal.dot(in[0].v) - offset;
    const double d1 = normal.dot(in[1].v) - offset;
    if (d0 <= 0.0) out[num_out++] = in[0];
    if (d1 <= 0.0) out[num_out++] = in[1];
    if (d0 * d1 < 0.0) {
        const double t = d0 / (d0 - d1);
        out[num_out].v = in[0].v + t * (in[1].v - in[0].v);
        out[num_out].id = clip_id;
        ++num_out;
    }
    return num_out;
}

void incident_edge(ClipVertex out[2], const Vec2& h, const Vec2& pos, const Mat2& rot,
                   const Vec2& normal) {
    // face of the incident box most anti-parallel to `normal`
    const Mat2 rot_t = rot.transpose();
    const Vec2 n = -(rot_t * normal);
    const Vec2 n_abs = abs(n);
    if (n_abs.x > n_abs.y) {
        if (n.x > 0.0) {
            out[0].v = {h.x, -h.y}; out[0].id = 0;
            out[1].v = {h.x, h.y};  out[1].id = 1;
        } else {
            out[0].v = {-h.x, h.y};  out[0].id = 2;
            out[1].v = {-h.x, -h.y}; out[1].id = 3;
        }
    } else {
        if (n.y > 0.0) {
            out[0].v = {h.x, h.y};   out[0].id = 4;
            out[1].v = {-h.x, h.y};  out[1].id = 5;
        } else {
            out[0].v = {-h.x, -h.y}; out[0].id = 6;
            out[1].v = {h.x, -h.y};  out[1].id = 7;
        }
    }
    for (int i = 0; i < 2; ++i) out[i].v = pos + rot * out[i].v;
}

}  // namespace

// Box2D-lite style OBB collision: SAT over face normals, then clip the
// incident edge against the reference face side planes.
int collide_boxes(const BoxPose& a, const BoxPose& b, ContactPoint out[2]) {
    const Vec2 ha{a.half_w, a.half_h}, hb{b.half_w, b.half_h};
    const Mat2 rot_a = Mat2::rotation(a.theta), rot_b = Mat2::rotation(b.theta);
    const Vec2 dp = b.center - a.center;
    const Vec2 da = rot_a.transpose() * dp;  // dp in A frame
    const Vec2 db = rot_b.transpose() * dp;
    const Mat2 c = rot_a.transpose() * rot_b;
    const Mat2 abs_c = abs(c);
    const Mat2 abs_ct = abs_c.transpose();

    // face separations (negative = overlap)
    const Vec2 face_a = abs(da) - ha - abs_c * hb;
    const Vec2 face_b = abs(db) - hb - abs_ct * ha;
    if (face_a.x > 0.0 || face_a.y > 0.0 || face_b.x > 0.0 || face_b.y > 0.0) return 0;

    enum Axis { FaceAX, FaceAY, FaceBX, FaceBY };
    Axis axis = FaceAX;
    double separation = face_a.x;
    Vec2 normal = da.x > 0.0 ? rot_a.col1 : -rot_a.col1;

    const double rel_tol = 0.95, abs_tol = 0.01;
    if (face_a.y > rel_tol * separation + abs_tol * ha.y) {
        axis = FaceAY;
        separation = face_a.y;
        normal = da.y > 0.0 ? rot_a.col2 : -rot_a.col2;
    }
    if (face_b.x > rel_tol * separation + abs_tol * hb.x) {
        axis = FaceBX;
        separation = face_b.x;
        normal = db.x > 0.0 ? rot_b.col1 : -rot_b.col1;
    }
    if (face_b.y > rel_tol * separation + abs_tol * hb.y) {
        axis = FaceBY;
        separation = face_b.y;
        normal = db.y > 0.0 ? rot_b.col2 : -rot_b.col2;
    }

    Vec2 front_normal, side_normal;
    double front, neg_side, pos_side;
    ClipVertex incident[2];
    uint32_t ref_face_id = 0;

    switch (axis) {
        case FaceAX: {
            front_normal = normal;
            front = a.center.dot(front_normal) + ha.x;
            side_normal = rot_a.col2;
            const double side = a.center.dot(side_normal);
            neg_side = -side + ha.y;
            pos_side = side + ha.y;
            incident_edge(incident, hb, b.center, rot_b, front_normal);
            ref_face_id = 0;
        } break;
        case FaceAY: {
            front_normal = normal;
            front = a.center.dot(front_normal) + ha.y;
            side_normal = rot_a.col1;
            const double side = a.center.dot(side_normal);
            neg_side = -side + ha.x;
            pos_side = side + ha.x;
            incident_edge(incident, hb, b.center, rot_b, front_normal);
            ref_face_id = 1;
        } break;
        case FaceBX: {
            front_normal = -normal;
            front = b.center.dot(front_normal) + hb.x;
            side_normal = rot_b.col2;
            const double side = b.center.dot(side_normal);
            neg_side = -side + hb.y;
            pos_side = side + hb.y;
            incident_edge(incident, ha, a.center, rot_a, front_normal);
            ref_face_id = 2;
        } break;
        case FaceBY: {
            front_normal = -normal;
            front = b.center.dot(front_normal) + hb.y;
            side_normal = rot_b.col1;
            const double side = b.center.dot(side_normal);
            neg_side = -side + hb.x;
            pos_side = side + hb.x;
            incident_edge(incident, ha, a.center, rot_a, front_normal);
            ref_face_id = 3;
        } break;
    }

    ClipVertex clip1[2], clip2[2];
    if (clip_segment_to_line(clip1, incident, -side_normal, neg_side, 100) < 2) return 0;
    if (clip_segment_to_line(clip2, clip1, side_normal, pos_side, 101) < 2) return 0;

    int num = 0;
    for (int i = 0; i < 2; ++i) {
        const double sep = front_normal.dot(clip2[i].v) - front;
        if (sep <= 0.0) {
            out[num].point = clip2[i].v;
            out[num].normal = normal;  // from A towards B
            out[num].penetration = -sep;
            out[num].normal_impulse = 0.0;
            out[num].tangent_impulse = 0.0;
            out[num].feature_id = (ref_face_id << 8) | clip2[i].id;
            ++num;
        }
    }
    return num;
}

namespace {

void gather_manifolds(const WorldState& w, std::vector<ContactManifold>& manifolds,
                      double margin = 0.0) {
    manifolds.clear();
    const BoxPose block{w.block.pos, w.block.theta, w.block_shape.half_w + margin,
                        w.block_shape.half_h + margin};
    {
        const BoxPose cart{w.cart.pos, w.cart.theta, w.cart_shape.half_w, w.cart_shape.half_h};
        ContactPoint pts[2];
        const int n = collide_boxes(cart, block, pts);
        if (n > 0) {
            ContactManifold m;
            m.other = -1;
            m.points.assign(pts, pts + n);
            manifolds.push_back(std::move(m));
        }
    }
    for (size_t i = 0; i < w.static_geometry.size(); ++i) {
        const auto& s = w.static_geometry[i];
        const BoxPose sb{s.center, s.theta, s.half_w, s.half_h};
        ContactPoint pts[2];
        const int n = collide_boxes(sb, block, pts);
        if (n > 0) {
            ContactManifold m;
            m.other = static_cast<int>(i);
            m.points.assign(pts, pts + n);
            manifolds.push_back(std::move(m));
        }
    }
}

void warm_start(std::vector<ContactManifold>& fresh, const std::vector<ContactManifold>& cache) {
    for (auto& m : fresh) {
        for (const auto& old : cache) {
            if (old.other != m.other) continue;
            for (auto& p : m.points) {
                for (const auto& op : old.points) {
                    if (op.feature_id == p.feature_id) {
                        p.normal_impulse = op.normal_impulse;
                        p.tangent_impulse = op.tangent_impulse;
                    }
                }
            }
        }
    }
}

// Velocity of a world point on the cart (kinematic) or a static box.
Vec2 other_point_velocity(const WorldState& w, int other, const Vec2& point) {
    if (other == -1) {
        const Vec2 r = point - w.cart.pos;
        return w.cart.vel + cross(w.cart.omega, r);
    }
    return {0.0, 0.0};
}

void step_block_with_contacts(WorldState& w, const PhysicsParams& params) {
    auto& block = w.block;
    const double inv_m = 1.0 / w.block_shape.mass();
    const double inv_i = 1.0 / w.block_shape.inertia();
    const double dt = params.dt_physics;

    // gravity
    block.vel.y -= params.gravity * dt;

    std::vector<ContactManifold> manifolds;
    gather_manifolds(w, manifolds);
    warm_start(manifolds, w.contact_cache);

    // apply warm-start impulses
    for (auto& m : manifolds) {
        for (auto& p : m.points) {
            const Vec2 impulse = p.normal_impulse * p.normal + p.tangent_impulse * p.normal.perp();
            const Vec2 r = p.point - block.pos;
            block.vel += inv_m * impulse;
            block.omega += inv_i * r.cross(impulse);
        }
    }

    for (int it = 0; it < params.solver_iterations; ++it) {
        for (auto& m : manifolds) {
            for (auto& p : m.points) {
                const Vec2 r = p.point - block.pos;
                const Vec2 v_other = other_point_velocity(w, m.other, p.point);

                // normal impulse with Baumgarte bias
                {
                    const Vec2 v_rel = block.vel + cross(block.omega, r) - v_other;
                    const double vn = v_rel.dot(p.normal);
                    const double rn = r.cross(p.normal);
                    const double k = inv_m + inv_i * rn * rn;
                    const double bias = (params.baumgarte_beta / dt) *
                                        std::max(0.0, p.penetration - params.penetration_slop);
                    double dj = -(vn - bias) / k;
                    const double old = p.normal_impulse;
                    p.normal_impulse = std::max(0.0, old + dj);
                    dj = p.normal_impulse - old;
                    const Vec2 impulse = dj * p.normal;
                    block.vel += inv_m * impulse;
                    block.omega += inv_i * r.cross(impulse);
                }
                // friction impulse
                {
                    const Vec2 tangent = p.normal.perp();
                    const Vec2 v_rel = block.vel + cross(block.omega, r) - v_other;
                    const double vt = v_rel.dot(tangent);
                    const double rt = r.cross(tangent);
                    const double k = inv_m + inv_i * rt * rt;
                    double dj = -vt / k;
                    const double max_t = params.friction_mu * p.normal_impulse;
                    const double old = p.tangent_impulse;
                    p.tangent_impulse = std::clamp(old + dj, -max_t, max_t);
                    dj = p.tangent_impulse - old;
                    const Vec2 impulse = dj * tangent;
                    block.vel += inv_m * impulse;
                    block.omega += inv_i * r.cross(impulse);
                }
            }
        }
    }

    block.pos += block.vel * dt;
    block.theta += block.omega * dt;

    w.contact_cache = std::move(manifolds);
}

void check_finite(const WorldState& w) {
    auto ok = [](const BodyState& b) {
        return std::isfinite(b.pos.x) && std::isfinite(b.pos.y) && std::isfinite(b.theta) &&
               std::isfinite(b.vel.x) && std::isfinite(b.vel.y) && std::isfinite(b.omega);
    };
    if (!ok(w.cart)) throw SimulationDiverged("cart", w.step_count);
    if (!ok(w.block)) throw SimulationDiverged("block", w.step_count);
}

AccelCommand clamp_command(const AccelCommand& cmd, const PhysicsParams& p) {
    return {std::clamp(cmd.ax, -p.max_ax, p.max_ax),
            std::clamp(cmd.ay, -p.max_ay, p.max_ay),
            std::clamp(cmd.alpha, -p.max_alpha, p.max_alpha)};
}

void substep(WorldState& world, const Vec2& cart_dv, double cart_domega,
             const PhysicsParams& params) {
    world.cart.vel += cart_dv;
    world.cart.omega += cart_domega;
    world.cart.pos += world.cart.vel * params.dt_physics;
    world.cart.theta += world.cart.omega * params.dt_physics;

    step_block_with_contacts(world, params);
    world.step_count += 1;
    check_finite(world);
}

}  // namespace

void step_physics(WorldState& world, const AccelCommand& cmd, const PhysicsParams& params) {
    const AccelCommand c = clamp_command(cmd, params);
    substep(world, {c.ax * params.dt_physics, c.ay * params.dt_physics},
            c.alpha * params.dt_physics, params);
}

void control_step(WorldState& world, const AccelCommand& cmd, const PhysicsParams& params) {
    const AccelCommand c = clamp_command(cmd, params);
    const int n = substeps_per_control(params);
    const double period = params.dt_physics * n;
    // whole-period velocity increment applied on substep 0 (see header)
    substep(world, {c.ax * period, c.ay * period}, c.alpha * period, params);
    for (int i = 1; i < n; ++i) substep(world, {0.0, 0.0}, 0.0, params);
}

SupportStatus support_status(const WorldState& world) {
    // Classification uses a proximity margin: a block riding a moving cart
    // hovers a few tens of microns above it between solver pushes, which
    // must not read as airborne.
    constexpr double kSupportMargin = 1e-3;  // m
    std::vector<ContactManifold> manifolds;
    gather_manifolds(world, manifolds, kSupportMargin);

    bool on_cart = false, on_static = false, slipping = false;
    constexpr double kSlipThreshold = 0.02;  // m/s
    for (const auto& m : manifolds) {
        if (m.other >= 0) {
            on_static = true;
            continue;
        }
        on_cart = true;
        for (const auto& p : m.points) {
            const Vec2 r = p.point - world.block.pos;
            const Vec2 v_rel = world.block.vel + cross(world.block.omega, r) -
                               other_point_velocity(world, -1, p.point);
            if (std::fabs(v_rel.dot(p.normal.perp())) > kSlipThreshold) slipping = true;
        }
    }
    if (on_static) return SupportStatus::Grounded;
    if (!on_cart) return SupportStatus::Airborne;
    // COM horizontally within the cart top span?
    const Vec2 local = rotate(world.block.pos - world.cart.pos, -world.cart.theta);
    const bool within = std::fabs(local.x) <= world.cart_shape.half_w;
    if (!within || slipping) return SupportStatus::Sliding;
    return SupportStatus::Supported;
}

double max_penetration(const WorldState& world) {
    std::vector<ContactManifold> manifolds;
    gather_manifolds(world, manifolds);
    double worst = 0.0;
    for (const auto& m : manifolds)
        for (const auto& p : m.points) worst = std::max(worst, p.penetration);
    return worst;
}

}  // namespace dynmap::sim
