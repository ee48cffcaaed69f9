#include "ceplan/grid_world.hpp"

namespace ceplan {

namespace {

LatticePoint forward_of(LatticePoint p, Orientation o) {
    switch (o) {
        case Orientation::Up: return {p.i, p.j - 1};
        case Orientation::Right: return {p.i + 1, p.j};
        case Orientation::Down: return {p.i, p.j + 1};
        case Orientation::Left: return {p.i - 1, p.j};
    }
    return p;
}

bool in_bounds(const Scenario& sc, LatticePoint p) {
    return p.i >= 0 && p.i < sc.width && p.j >= 0 && p.j < sc.height;
}

MobileState move_mobile(const Scenario& sc, MobileState m, Move mv) {
    switch (mv) {
        case Move::TurnLeft: m.dir = turn_left(m.dir); break;
        case Move::TurnRight: m.dir = turn_right(m.dir); break;
        case Move::Forward: {
            // Forward into a wall is a no-op; orientation is kept.
            const LatticePoint next = forward_of(m.pos, m.dir);
            if (in_bounds(sc, next)) m.pos = next;
            break;
        }
        case Move::NoMove: break;
    }
    return m;
}

// True when the target lies ahead of the mobile's facing direction.
bool target_forward(const MobileState& m, LatticePoint r) {
    switch (m.dir) {
        case Orientation::Up: return r.j < m.pos.j;
        case Orientation::Right: return r.i > m.pos.i;
        case Orientation::Down: return r.j > m.pos.j;
        case Orientation::Left: return r.i < m.pos.i;
    }
    return false;
}

}  // namespace

WorldState initial_state(const Scenario& sc, Rng& rng) {
    WorldState s;
    s.b = {{0, sc.height - 1}, Orientation::Down};
    s.c = {{sc.width - 1, sc.height - 1}, Orientation::Down};
    if (sc.kind == CaseKind::Case1Fixed) {
        s.target = {sc.width / 2, sc.height / 2};
    } else {
        // Uniform over the upper half of the lattice.
        s.target = {rng.uniform_int(sc.width), rng.uniform_int(sc.height / 2)};
    }
    s.t = 1;
    return s;
}

int observe(const Scenario& sc, const WorldState& s) {
    if (sc.kind == CaseKind::Case2Blind) return 0;
    const bool b_forward = target_forward(s.b, s.target);
    const bool b_near = d_inf(s.b.pos, s.target) < sc.radius;  // strict
    const bool c_forward = target_forward(s.c, s.target);
    const bool c_near = d_inf(s.c.pos, s.target) < sc.radius;
    return encode_observation(b_forward, b_near, c_forward, c_near);
}

WorldState apply_action(const Scenario& sc, const WorldState& s, int action) {
    const auto [move_b, move_c] = decode_action(action);
    WorldState next = s;
    next.b = move_mobile(sc, s.b, move_b);
    next.c = move_mobile(sc, s.c, move_c);
    return next;
}

TargetDistribution target_distribution(const Scenario& sc, const WorldState& s) {
    TargetDistribution dist;
    double total = 0.0;
    for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
            const LatticePoint cand{s.target.i + di, s.target.j + dj};
            if (!in_bounds(sc, cand)) continue;
            const double bi = cand.i - s.b.pos.i;
            const double bj = cand.j - s.b.pos.j;
            const double ci = cand.i - s.c.pos.i;
            const double cj = cand.j - s.c.pos.j;
            const double w = bi * bi + bj * bj + ci * ci + cj * cj;
            dist.support[dist.count] = cand;
            dist.prob[dist.count] = w;
            ++dist.count;
            total += w;
        }
    }
    if (total <= 0.0) {
        // All candidate weights zero (both mobiles on the sole candidate):
        // proportionality is undefined, fall back to uniform.
        const double u = 1.0 / dist.count;
        for (int k = 0; k < dist.count; ++k) dist.prob[k] = u;
    } else {
        for (int k = 0; k < dist.count; ++k) dist.prob[k] /= total;
    }
    return dist;
}

WorldState target_step(const Scenario& sc, const WorldState& s, Rng& rng) {
    WorldState next = s;
    if (sc.kind != CaseKind::Case1Fixed) {
        const TargetDistribution dist = target_distribution(sc, s);
        const int k = rng.sample_weights({dist.prob.data(), static_cast<std::size_t>(dist.count)}, 1.0);
        next.target = dist.support[k];
    }
    next.t = s.t + 1;
    return next;
}

int step_reward(const Scenario& sc, const WorldState& s) {
    // Reward uses <= radius while the proximity observation uses < radius.
    return (d_inf(s.b.pos, s.target) <= sc.radius || d_inf(s.c.pos, s.target) <= sc.radius) ? 1 : 0;
}

}  // namespace ceplan
