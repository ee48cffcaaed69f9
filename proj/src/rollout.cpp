#include "ceplan/rollout.hpp"

#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ceplan {

Trajectory run_episode(const Scenario& sc, const HhmmPolicy& policy, Rng& rng) {
    if (policy.obs_count != kObservationCount || policy.action_count != kActionCount) {
        throw std::invalid_argument("run_episode: policy alphabet does not match the world");
    }
    const int horizon = sc.horizon;
    const int lambda = policy.levels();

    Trajectory tr;
    tr.horizon = horizon;
    tr.levels = lambda;
    tr.states.reserve(horizon);
    tr.obs.reserve(horizon);
    tr.actions.reserve(horizon);
    tr.memories.resize(static_cast<std::size_t>(horizon) * lambda);

    WorldState x = initial_state(sc, rng);
    std::span<const int> prev;  // empty at t = 1
    for (int t = 0; t < horizon; ++t) {
        const int y = observe(sc, x);
        std::span<int> cur{tr.memories.data() + static_cast<std::size_t>(t) * lambda,
                           static_cast<std::size_t>(lambda)};
        const int d = policy.sample_step(y, prev, cur, rng);
        tr.reward += step_reward(sc, x);
        tr.states.push_back(x);
        tr.obs.push_back(y);
        tr.actions.push_back(d);
        x = target_step(sc, apply_action(sc, x, d), rng);
        prev = cur;
    }
    return tr;
}

std::vector<Trajectory> batch_rollouts_serial(const Scenario& sc, const HhmmPolicy& policy,
                                              int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("batch_rollouts: n must be >= 1");
    std::vector<Trajectory> out(n);
    for (int k = 0; k < n; ++k) {
        Rng rng(derive_stream(seed, static_cast<std::uint64_t>(k)));
        out[k] = run_episode(sc, policy, rng);
    }
    return out;
}

std::vector<Trajectory> batch_rollouts(const Scenario& sc, const HhmmPolicy& policy, int n,
                                       std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("batch_rollouts: n must be >= 1");
    std::vector<Trajectory> out(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (int k = 0; k < n; ++k) {
        Rng rng(derive_stream(seed, static_cast<std::uint64_t>(k)));
        out[k] = run_episode(sc, policy, rng);
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const Scenario& sc, const Trajectory& tr) {
    out << "t,target_i,target_j,b_i,b_j,b_dir,c_i,c_j,c_dir,y,d";
    for (int k = 1; k <= tr.levels; ++k) out << ",m" << k;
    out << ",cumV\n";
    int cum = 0;
    for (int t = 0; t < tr.horizon; ++t) {
        const WorldState& s = tr.states[t];
        cum += step_reward(sc, s);
        out << (t + 1) << ',' << s.target.i << ',' << s.target.j << ',' << s.b.pos.i << ','
            << s.b.pos.j << ',' << static_cast<int>(s.b.dir) << ',' << s.c.pos.i << ','
            << s.c.pos.j << ',' << static_cast<int>(s.c.dir) << ',' << tr.obs[t] << ','
            << tr.actions[t];
        for (int v : tr.memory_at(t)) out << ',' << v;
        out << ',' << cum << '\n';
    }
}

}  // namespace ceplan
