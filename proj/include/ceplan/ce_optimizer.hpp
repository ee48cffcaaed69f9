#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "ceplan/grid_world.hpp"
#include "ceplan/policy.hpp"
#include "ceplan/rollout.hpp"

namespace ceplan {

struct CeConfig {
    int n_samples = 1000;       // N, episodes per iteration
    double rho = 0.5;           // selective rate, in (0, 1)
    double smoothing = 1e-3;    // additive smoothing of the count update
    int patience = 100;         // stop after this many successive unsuccessful tries
                                // (weak criterion 100, strong criterion 500)
    int max_iterations = 5000;  // hard cap
    std::uint64_t seed = 1;
};

struct CeIterationStats {
    int iter = 0;
    int best = 0;            // best reward in the batch
    int threshold = 0;       // reward of the ceil(rho*N)-th best sample
    double elite_mean = 0.0;
    int best_so_far = 0;     // running max of batch best rewards
    int unsuccessful = 0;    // counter after this iteration
};

struct CeHistory {
    std::vector<CeIterationStats> rows;
    int chosen_iteration = -1;       // iteration whose policy was returned
    double chosen_holdout_mean = 0;  // its held-out evaluation
    long validated_iterations = 0;   // row-stochasticity checks that ran
};

// Indices of the ceil(rho*N) highest-reward samples; ties at the cutoff go
// to the lower index. Returned in increasing index order.
std::vector<std::size_t> select_elite(std::span<const int> rewards, double rho);
std::vector<std::size_t> select_elite(const std::vector<Trajectory>& trajectories, double rho);

struct EvalSummary {
    double mean = 0.0;
    double stddev = 0.0;
    int min = 0;
    int max = 0;
    int episodes = 0;
};

EvalSummary evaluate(const Scenario& sc, const HhmmPolicy& policy, int n, std::uint64_t seed);

// Sampler hook: (policy, n, seed) -> n trajectories. The environment-bound
// optimize() uses batch_rollouts; tests may plug in synthetic worlds.
using RolloutFn =
    std::function<std::vector<Trajectory>(const HhmmPolicy&, int, std::uint64_t)>;

// Iterates sample / select / update from a flat start. An iteration counts
// as successful when the elite threshold strictly beats the best threshold
// seen so far; the loop stops after `patience` consecutive failures or at
// the iteration cap. Returns the checkpoint with the best held-out mean.
std::pair<HhmmPolicy, CeHistory> optimize(const Scenario& sc, const LevelSizes& sizes,
                                          const CeConfig& config);
std::pair<HhmmPolicy, CeHistory> optimize_with(const RolloutFn& sample, const LevelSizes& sizes,
                                               const CeConfig& config, int obs_count = 16,
                                               int action_count = 16);

// CSV export: iter,best,threshold,elite_mean,best_so_far,unsuccessful
void write_history_csv(std::ostream& out, const CeHistory& history);

}  // namespace ceplan
