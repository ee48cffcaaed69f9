#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ceplan/grid_world.hpp"
#include "ceplan/rng.hpp"

namespace ceplan {

// Tabular Q-learning on the same benchmark: the table is indexed by the
// packed observation-state (y, mobile poses, headings) and learned on a
// continuing run with an epsilon-greedy behavior policy.

struct QHyper {
    double alpha = 0.1;
    double gamma = 0.99;
};

// Exploration schedule 1/ln(t), clamped to 1 where ln(t) <= 1 (t < 3).
double epsilon_at(long long t);

// Q-state packing, innermost last:
//   index = ((((((y * W + i_B) * H + j_B) * W + i_C) * H + j_C) * 4 + dir_B) * 4 + dir_C)
inline constexpr std::uint32_t kQStatePackingId = 1;

int qstate_count(const Scenario& sc);
int pack_qstate(const Scenario& sc, int y, const MobileState& b, const MobileState& c);
void unpack_qstate(const Scenario& sc, int index, int& y, MobileState& b, MobileState& c);

// Bytes of the dense float32 table for the scenario's grid.
std::size_t qtable_bytes(const Scenario& sc);

// Dense action-value table, float32 entries, updates done in double.
class QTable {
public:
    QTable() = default;
    QTable(int states, int actions, QHyper hyper = {});

    int states() const { return states_; }
    int actions() const { return actions_; }
    const QHyper& hyper() const { return hyper_; }

    float value(int s, int a) const { return q_[index(s, a)]; }
    void set_value(int s, int a, float v) { q_[index(s, a)] = v; }

    // Ties broken by the lowest action index.
    int greedy_action(int s) const;
    double max_value(int s) const;

    const std::vector<float>& raw() const { return q_; }
    std::vector<float>& raw() { return q_; }

private:
    std::size_t index(int s, int a) const {
        return static_cast<std::size_t>(s) * actions_ + a;
    }
    int states_ = 0;
    int actions_ = 0;
    QHyper hyper_;
    std::vector<float> q_;
};

// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)); touches no other entry.
void q_update(QTable& q, int s, int a, double r, int s_next);

// Minimal episodic task surface for the trainer: reset gives a state index,
// step applies an action and yields (next state, reward).
class QTask {
public:
    virtual ~QTask() = default;
    virtual int state_count() const = 0;
    virtual int action_count() const = 0;
    virtual int reset(Rng& rng) = 0;
    struct Step {
        int next = 0;
        int reward = 0;
    };
    virtual Step step(int action, Rng& rng) = 0;
};

// The benchmark as a QTask. The reward of (s, a) is the step reward of the
// post-action, post-target-move state, matching the rollout event order.
class PursuitQTask : public QTask {
public:
    explicit PursuitQTask(const Scenario& sc) : sc_(sc) {}
    int state_count() const override { return qstate_count(sc_); }
    int action_count() const override { return kActionCount; }
    int reset(Rng& rng) override;
    Step step(int action, Rng& rng) override;

private:
    Scenario sc_;
    WorldState world_;
};

// Continuing epsilon-greedy training; epsilon follows the global step count.
// episode_length > 0 restarts the task every that many steps.
QTable train_q_task(QTask& task, long long steps, QHyper hyper, std::uint64_t seed,
                    long long episode_length = 0);
QTable train_q(const Scenario& sc, long long steps, QHyper hyper, std::uint64_t seed,
               long long episode_length = 0);

// Greedy-policy evaluation summed over fixed-width undiscounted windows.
struct WindowStats {
    int worst = 0;
    double mean = 0.0;
    int best = 0;
    int windows = 0;
};

// Fresh-start windows: each window is an independent restart (parallel).
WindowStats evaluate_q_windows_fresh(const QTable& q, const Scenario& sc, int windows,
                                     std::uint64_t seed);
// Continuation windows: one long greedy run after a warm-up, consecutive
// windows emulating an infinite horizon.
WindowStats evaluate_q_windows_continuation(const QTable& q, const Scenario& sc, int windows,
                                            std::uint64_t seed, long long warmup_steps);

// Binary snapshot: header (magic, version, grid dims, packing id) + raw
// row-major float32 values. Loading validates the header against the
// scenario.
void save_qtable(const QTable& q, const Scenario& sc, const std::string& path);
QTable load_qtable(const Scenario& sc, const std::string& path);

}  // namespace ceplan
