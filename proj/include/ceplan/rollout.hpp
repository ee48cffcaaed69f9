#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ceplan/grid_world.hpp"
#include "ceplan/policy.hpp"
#include "ceplan/rng.hpp"

namespace ceplan {

// One sampled episode. Full states are kept so a trajectory can be replayed
// and exported, even though the optimizer only consumes (d, y, m) and V.
struct Trajectory {
    int horizon = 0;
    int levels = 0;
    std::vector<WorldState> states;  // x_1..x_T (pre-move state of each step)
    std::vector<int> obs;            // y_1..y_T
    std::vector<int> actions;        // d_1..d_T
    std::vector<int> memories;       // T x levels, row-major by step
    int reward = 0;                  // sum of step rewards, in [0, T]

    std::span<const int> memory_at(int step) const {  // step is 0-based
        return {memories.data() + static_cast<std::size_t>(step) * levels,
                static_cast<std::size_t>(levels)};
    }
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Step order, fixed for reproducibility: observe x_t, sample (m_t, d_t),
// collect the reward of x_t, move the mobiles, then the target.
Trajectory run_episode(const Scenario& sc, const HhmmPolicy& policy, Rng& rng);

// n independent episodes; episode k runs on the stream derive_stream(seed, k),
// so the output is identical however the loop is scheduled.
std::vector<Trajectory> batch_rollouts(const Scenario& sc, const HhmmPolicy& policy, int n,
                                       std::uint64_t seed);

// Serial reference for the OpenMP batch above; must produce identical output.
std::vector<Trajectory> batch_rollouts_serial(const Scenario& sc, const HhmmPolicy& policy,
                                              int n, std::uint64_t seed);

// CSV export, one row per step:
// t,target_i,target_j,b_i,b_j,b_dir,c_i,c_j,c_dir,y,d,m1..mLambda,cumV
void write_trajectory_csv(std::ostream& out, const Scenario& sc, const Trajectory& trajectory);

}  // namespace ceplan
