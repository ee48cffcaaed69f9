#include "ceplan/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ceplan {

double epsilon_at(long long t) {
    if (t < 3) return 1.0;
    return 1.0 / std::log(static_cast<double>(t));
}

int qstate_count(const Scenario& sc) {
    const long long cells = static_cast<long long>(sc.width) * sc.height;
    const long long n = 16LL * cells * cells * 4 * 4;
    if (n > std::numeric_limits<int>::max())
        throw std::invalid_argument("qstate_count: grid too large for 32-bit state indices");
    return static_cast<int>(n);
}

int pack_qstate(const Scenario& sc, int y, const MobileState& b, const MobileState& c) {
    const int w = sc.width;
    const int h = sc.height;
    long long idx = y;
    idx = idx * w + b.pos.i;
    idx = idx * h + b.pos.j;
    idx = idx * w + c.pos.i;
    idx = idx * h + c.pos.j;
    idx = idx * 4 + static_cast<int>(b.dir);
    idx = idx * 4 + static_cast<int>(c.dir);
    return static_cast<int>(idx);
}

void unpack_qstate(const Scenario& sc, int index, int& y, MobileState& b, MobileState& c) {
    long long idx = index;
    c.dir = static_cast<Orientation>(idx % 4);
    idx /= 4;
    b.dir = static_cast<Orientation>(idx % 4);
    idx /= 4;
    c.pos.j = static_cast<int>(idx % sc.height);
    idx /= sc.height;
    c.pos.i = static_cast<int>(idx % sc.width);
    idx /= sc.width;
    b.pos.j = static_cast<int>(idx % sc.height);
    idx /= sc.height;
    b.pos.i = static_cast<int>(idx % sc.width);
    idx /= sc.width;
    y = static_cast<int>(idx);
}

std::size_t qtable_bytes(const Scenario& sc) {
    const std::size_t cells = static_cast<std::size_t>(sc.width) * sc.height;
    return 16 * cells * cells * 4 * 4 * static_cast<std::size_t>(kActionCount) * sizeof(float);
}

QTable::QTable(int states, int actions, QHyper hyper)
    : states_(states), actions_(actions), hyper_(hyper) {
    if (states <= 0 || actions <= 0)
        throw std::invalid_argument("QTable: states and actions must be positive");
    q_.assign(static_cast<std::size_t>(states) * actions, 0.0f);
}

int QTable::greedy_action(int s) const {
    const std::size_t base = static_cast<std::size_t>(s) * actions_;
    int best = 0;
    float best_v = q_[base];
    for (int a = 1; a < actions_; ++a) {
        if (q_[base + a] > best_v) {
            best_v = q_[base + a];
            best = a;
        }
    }
    return best;
}

double QTable::max_value(int s) const {
    const std::size_t base = static_cast<std::size_t>(s) * actions_;
    float best_v = q_[base];
    for (int a = 1; a < actions_; ++a) best_v = std::max(best_v, q_[base + a]);
    return best_v;
}

void q_update(QTable& q, int s, int a, double r, int s_next) {
    const QHyper& hp = q.hyper();
    const double old = q.value(s, a);
    const double target = r + hp.gamma * q.max_value(s_next);
    q.set_value(s, a, static_cast<float>(old + hp.alpha * (target - old)));
}

int PursuitQTask::reset(Rng& rng) {
    world_ = initial_state(sc_, rng);
    return pack_qstate(sc_, observe(sc_, world_), world_.b, world_.c);
}

PursuitQTask::Step PursuitQTask::step(int action, Rng& rng) {
    world_ = target_step(sc_, apply_action(sc_, world_, action), rng);
    Step out;
    out.reward = step_reward(sc_, world_);
    out.next = pack_qstate(sc_, observe(sc_, world_), world_.b, world_.c);
    return out;
}

QTable train_q_task(QTask& task, long long steps, QHyper hyper, std::uint64_t seed,
                    long long episode_length) {
    if (steps < 1) throw std::invalid_argument("train_q_task: steps must be >= 1");
    QTable q(task.state_count(), task.action_count(), hyper);
    Rng rng(seed);
    int s = task.reset(rng);
    for (long long t = 1; t <= steps; ++t) {
        int a;
        if (rng.uniform_double() < epsilon_at(t))
            a = rng.uniform_int(task.action_count());
        else
            a = q.greedy_action(s);
        const QTask::Step st = task.step(a, rng);
        q_update(q, s, a, st.reward, st.next);
        s = st.next;
        if (episode_length > 0 && t % episode_length == 0) s = task.reset(rng);
    }
    return q;
}

QTable train_q(const Scenario& sc, long long steps, QHyper hyper, std::uint64_t seed,
               long long episode_length) {
    PursuitQTask task(sc);
    return train_q_task(task, steps, hyper, seed, episode_length);
}

namespace {

int run_greedy_window(const QTable& q, PursuitQTask& task, int from_state, Rng& rng, int horizon,
                      int& end_state) {
    int s = from_state;
    int total = 0;
    for (int t = 0; t < horizon; ++t) {
        const QTask::Step st = task.step(q.greedy_action(s), rng);
        total += st.reward;
        s = st.next;
    }
    end_state = s;
    return total;
}

WindowStats summarize(const std::vector<int>& window_rewards) {
    WindowStats out;
    out.windows = static_cast<int>(window_rewards.size());
    out.worst = *std::min_element(window_rewards.begin(), window_rewards.end());
    out.best = *std::max_element(window_rewards.begin(), window_rewards.end());
    double sum = 0.0;
    for (int r : window_rewards) sum += r;
    out.mean = sum / out.windows;
    return out;
}

}  // namespace

WindowStats evaluate_q_windows_fresh(const QTable& q, const Scenario& sc, int windows,
                                     std::uint64_t seed) {
    if (windows < 1) throw std::invalid_argument("evaluate_q_windows_fresh: windows must be >= 1");
    std::vector<int> rewards(windows, 0);
#pragma omp parallel for schedule(static)
    for (int w = 0; w < windows; ++w) {
        PursuitQTask task(sc);
        Rng rng(derive_stream(seed, static_cast<std::uint64_t>(w)));
        int s = task.reset(rng);
        int end;
        rewards[w] = run_greedy_window(q, task, s, rng, sc.horizon, end);
    }
    return summarize(rewards);
}

WindowStats evaluate_q_windows_continuation(const QTable& q, const Scenario& sc, int windows,
                                            std::uint64_t seed, long long warmup_steps) {
    if (windows < 1)
        throw std::invalid_argument("evaluate_q_windows_continuation: windows must be >= 1");
    if (warmup_steps < 0)
        throw std::invalid_argument("evaluate_q_windows_continuation: warmup must be >= 0");
    PursuitQTask task(sc);
    Rng rng(derive_stream(seed, 0));
    int s = task.reset(rng);
    for (long long t = 0; t < warmup_steps; ++t) s = task.step(q.greedy_action(s), rng).next;
    std::vector<int> rewards(windows, 0);
    for (int w = 0; w < windows; ++w) {
        int end;
        rewards[w] = run_greedy_window(q, task, s, rng, sc.horizon, end);
        s = end;
    }
    return summarize(rewards);
}

namespace {

constexpr char kQMagic[4] = {'C', 'E', 'Q', 'T'};
constexpr std::uint32_t kQVersion = 1;

struct QHeader {
    char magic[4];
    std::uint32_t version;
    std::uint32_t packing;
    std::int32_t width;
    std::int32_t height;
    std::int32_t states;
    std::int32_t actions;
};

}  // namespace

void save_qtable(const QTable& q, const Scenario& sc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_qtable: cannot open " + path);
    QHeader hdr{};
    std::memcpy(hdr.magic, kQMagic, 4);
    hdr.version = kQVersion;
    hdr.packing = kQStatePackingId;
    hdr.width = sc.width;
    hdr.height = sc.height;
    hdr.states = q.states();
    hdr.actions = q.actions();
    out.write(reinterpret_cast<const char*>(&hdr), sizeof(hdr));
    out.write(reinterpret_cast<const char*>(q.raw().data()),
              static_cast<std::streamsize>(q.raw().size() * sizeof(float)));
    if (!out) throw std::runtime_error("save_qtable: write failed for " + path);
}

QTable load_qtable(const Scenario& sc, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_qtable: cannot open " + path);
    QHeader hdr{};
    in.read(reinterpret_cast<char*>(&hdr), sizeof(hdr));
    if (!in) throw std::runtime_error("load_qtable: truncated header in " + path);
    if (std::memcmp(hdr.magic, kQMagic, 4) != 0)
        throw std::runtime_error("load_qtable: bad magic in " + path);
    if (hdr.version != kQVersion)
        throw std::runtime_error("load_qtable: unsupported version in " + path);
    if (hdr.packing != kQStatePackingId)
        throw std::runtime_error("load_qtable: unknown state packing in " + path);
    if (hdr.width != sc.width || hdr.height != sc.height)
        throw std::runtime_error("load_qtable: grid dims do not match the scenario in " + path);
    if (hdr.states != qstate_count(sc) || hdr.actions != kActionCount)
        throw std::runtime_error("load_qtable: table shape does not match the scenario in " + path);
    QTable q(hdr.states, hdr.actions);
    in.read(reinterpret_cast<char*>(q.raw().data()),
            static_cast<std::streamsize>(q.raw().size() * sizeof(float)));
    if (!in) throw std::runtime_error("load_qtable: truncated data in " + path);
    for (float v : q.raw())
        if (!std::isfinite(v)) throw std::runtime_error("load_qtable: non-finite entry in " + path);
    return q;
}

}  // namespace ceplan
