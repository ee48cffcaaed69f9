#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "ceplan/rng.hpp"

namespace ceplan {

// Pursuit benchmark: a target wanders a WxH lattice while two mobiles,
// steered by one subject, try to keep it within a proximity radius.
// All operations are pure functions of their inputs plus an explicit
// random stream, so they can run on any number of threads concurrently.

inline constexpr int kObservationCount = 16;
inline constexpr int kActionCount = 16;

// j grows downward: Up decreases j, Down increases j. "Upper" cells are
// small j, the "down corners" are j = H-1.
enum class Orientation : std::uint8_t { Up = 0, Right = 1, Down = 2, Left = 3 };

enum class Move : std::uint8_t { TurnLeft = 0, TurnRight = 1, Forward = 2, NoMove = 3 };

enum class CaseKind {
    Case1Fixed,  // target fixed in the center
    Case2Blind,  // target moves, observation channel blanked
    Case3Full,   // target moves, observation delivered
};

struct LatticePoint {
    int i = 0;  // column, [0, W)
    int j = 0;  // row, [0, H)
    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

struct MobileState {
    LatticePoint pos;
    Orientation dir = Orientation::Down;
    friend bool operator==(const MobileState&, const MobileState&) = default;
};

struct WorldState {
    LatticePoint target;
    MobileState b;
    MobileState c;
    int t = 1;
    friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct Scenario {
    CaseKind kind = CaseKind::Case3Full;
    int horizon = 100;  // T
    int radius = 3;     // proximity radius: observation uses < radius, reward uses <= radius
    int width = 20;
    int height = 20;
};

// Chebyshev distance.
inline int d_inf(LatticePoint a, LatticePoint b) {
    const int di = a.i > b.i ? a.i - b.i : b.i - a.i;
    const int dj = a.j > b.j ? a.j - b.j : b.j - a.j;
    return di > dj ? di : dj;
}

inline Orientation turn_left(Orientation o) {
    return static_cast<Orientation>((static_cast<int>(o) + 3) % 4);
}

inline Orientation turn_right(Orientation o) {
    return static_cast<Orientation>((static_cast<int>(o) + 1) % 4);
}

// Action code = move_b + 4 * move_c.
inline std::pair<Move, Move> decode_action(int code) {
    return {static_cast<Move>(code % 4), static_cast<Move>(code / 4)};
}

inline int encode_action(Move move_b, Move move_c) {
    return static_cast<int>(move_b) + 4 * static_cast<int>(move_c);
}

// Observation code layout: bit0 = b_forward, bit1 = b_near,
// bit2 = c_forward, bit3 = c_near.
inline int encode_observation(bool b_forward, bool b_near, bool c_forward, bool c_near) {
    return (b_forward ? 1 : 0) | (b_near ? 2 : 0) | (c_forward ? 4 : 0) | (c_near ? 8 : 0);
}

// Discrete law of the next target cell: Moore neighborhood (moving or not)
// clipped to the lattice, each candidate weighted by the sum of squared
// Euclidean distances to the two mobiles.
struct TargetDistribution {
    std::array<LatticePoint, 9> support;
    std::array<double, 9> prob;
    int count = 0;
};

WorldState initial_state(const Scenario& sc, Rng& rng);
int observe(const Scenario& sc, const WorldState& s);
WorldState apply_action(const Scenario& sc, const WorldState& s, int action);
TargetDistribution target_distribution(const Scenario& sc, const WorldState& s);
WorldState target_step(const Scenario& sc, const WorldState& s, Rng& rng);
int step_reward(const Scenario& sc, const WorldState& s);

}  // namespace ceplan
