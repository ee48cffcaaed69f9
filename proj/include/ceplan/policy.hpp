#pragma once

#include <span>
#include <string>
#include <vector>

#include "ceplan/rng.hpp"

namespace ceplan {

// Finite-memory stochastic policy: a stack of Lambda memory levels refreshed
// top-down at every step, then an action drawn from the level-1 memory.
//
//   level Lambda..2:  m^L_t ~ level[L-1]( . | m^{L-1}_{t-1}, m^{L+1}_t )
//   level 1:          m^1_t ~ level[0]( . | y_t, m^2_t )
//   action:           d_t   ~ decision( . | m^1_t )
//
// A conditioning value that does not exist (step 1 has no previous stack, the
// top level has nothing above it, a single-level policy has no m^2) is mapped
// to a reserved "nil" slot of the relevant axis.

// Per-level memory symbols for one time step, entry k for level k+1.
using MemoryStack = std::vector<int>;

using LevelSizes = std::vector<int>;

void validate_level_sizes(const LevelSizes& sizes);

// One family of conditional rows: p[a][b][o] = P(outcome o | context (a, b)),
// stored row-major with the outcome innermost.
struct CondTable {
    int ctx_a = 1;
    int ctx_b = 1;
    int width = 1;
    std::vector<double> p;

    void resize_uniform(int a, int b, int w) {
        ctx_a = a;
        ctx_b = b;
        width = w;
        p.assign(static_cast<std::size_t>(a) * b * w, 1.0 / w);
    }
    std::span<double> row(int a, int b) {
        return {p.data() + (static_cast<std::size_t>(a) * ctx_b + b) * width,
                static_cast<std::size_t>(width)};
    }
    std::span<const double> row(int a, int b) const {
        return {p.data() + (static_cast<std::size_t>(a) * ctx_b + b) * width,
                static_cast<std::size_t>(width)};
    }
    friend bool operator==(const CondTable&, const CondTable&) = default;
};

struct HhmmPolicy {
    LevelSizes level_sizes;
    int obs_count = 16;
    int action_count = 16;
    double smoothing = 0.0;  // smoothing used by the update that produced the tables

    CondTable decision;             // [card(M^1)][1][action_count]
    std::vector<CondTable> memory;  // memory[k] emits level k+1; see shapes below

    // memory[0]:   [obs_count][card(M^2) or 1 if Lambda=1][card(M^1)]
    // memory[k>0]: [card(M^k) + 1][card(M^{k+2}) or 1 at the top][card(M^{k+1})]
    // The +1 slot on the first axis is the nil context used at t = 1.

    int levels() const { return static_cast<int>(level_sizes.size()); }

    // All rows uniform.
    static HhmmPolicy flat(LevelSizes sizes, int obs_count = 16, int action_count = 16);

    // Draws the step-t stack and action. prev is the step t-1 stack, empty
    // exactly at t = 1. cur must have Lambda entries.
    int sample_step(int y, std::span<const int> prev, std::span<int> cur, Rng& rng) const;

    // Convenience form returning the stack, nullptr prev meaning t = 1.
    std::pair<MemoryStack, int> sample_step(int y, const MemoryStack* prev, Rng& rng) const;

    // log h(d, m | y) for a complete trajectory; -inf if any factor is zero.
    // memories is T x Lambda, row-major by step.
    double trajectory_log_prob(std::span<const int> actions, std::span<const int> obs,
                               std::span<const int> memories) const;

    // Throws std::logic_error unless every row is a probability vector
    // within tol.
    void validate(double tol = 1e-9) const;

    friend bool operator==(const HhmmPolicy&, const HhmmPolicy&) = default;
};

// Number of free parameters of the family, counting (width - 1) per context
// and skipping the nil contexts.
long param_count(const LevelSizes& sizes, int obs_count = 16, int action_count = 16);

// Closed-form cross-entropy update: every row becomes the smoothed count
// ratio of (outcome, context) events over the elite trajectories. Contexts
// never seen keep the old row when smoothing is zero.
struct Trajectory;  // defined in rollout.hpp
HhmmPolicy ce_update(std::span<const Trajectory* const> elite, const LevelSizes& sizes,
                     double smoothing, const HhmmPolicy& old);
HhmmPolicy ce_update(const std::vector<Trajectory>& elite, const LevelSizes& sizes,
                     double smoothing, const HhmmPolicy& old);

// Policy file I/O (JSON: format_version, level_sizes, smoothing, tables).
// Probabilities round-trip exactly.
void save_policy(const HhmmPolicy& policy, const std::string& path);
HhmmPolicy load_policy(const std::string& path);
std::string policy_to_json(const HhmmPolicy& policy);
HhmmPolicy policy_from_json(const std::string& text);

}  // namespace ceplan
