#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ceplan/rollout.hpp"

using namespace ceplan;

namespace {

HhmmPolicy always_action(int code) {
    HhmmPolicy p = HhmmPolicy::flat({16});
    for (int m = 0; m < 16; ++m) {
        auto row = p.decision.row(m, 0);
        for (auto& v : row) v = 0.0;
        row[code] = 1.0;
    }
    return p;
}

int count_fields(const std::string& line) {
    int n = 1;
    for (char ch : line) n += ch == ',';
    return n;
}

}  // namespace

TEST_CASE("episodes have the advertised shape and internal consistency") {
    Scenario sc;
    const HhmmPolicy policy = HhmmPolicy::flat({16, 2});
    Rng rng(314159);
    const Trajectory tr = run_episode(sc, policy, rng);

    CHECK(tr.horizon == 100);
    CHECK(tr.levels == 2);
    CHECK(tr.states.size() == 100);
    CHECK(tr.obs.size() == 100);
    CHECK(tr.actions.size() == 100);
    CHECK(tr.memories.size() == 200);

    int reward = 0;
    for (int t = 0; t < tr.horizon; ++t) {
        const WorldState& s = tr.states[t];
        CHECK(s.t == t + 1);
        CHECK(tr.obs[t] == observe(sc, s));
        CHECK(tr.obs[t] >= 0);
        CHECK(tr.obs[t] < 16);
        CHECK(tr.actions[t] >= 0);
        CHECK(tr.actions[t] < 16);
        CHECK(tr.memory_at(t)[0] >= 0);
        CHECK(tr.memory_at(t)[0] < 16);
        CHECK(tr.memory_at(t)[1] >= 0);
        CHECK(tr.memory_at(t)[1] < 2);
        reward += step_reward(sc, s);

        if (t + 1 < tr.horizon) {
            // The mobiles of the next state are exactly the moved mobiles;
            // only the target cell differs by at most one king step.
            const WorldState moved = apply_action(sc, s, tr.actions[t]);
            CHECK(tr.states[t + 1].b == moved.b);
            CHECK(tr.states[t + 1].c == moved.c);
            CHECK(d_inf(tr.states[t + 1].target, s.target) <= 1);
        }
    }
    CHECK(tr.reward == reward);
    CHECK(tr.reward >= 0);
    CHECK(tr.reward <= tr.horizon);
}

TEST_CASE("episode layout respects a custom horizon") {
    Scenario sc;
    sc.horizon = 7;
    const HhmmPolicy policy = HhmmPolicy::flat({16});
    Rng rng(8);
    const Trajectory tr = run_episode(sc, policy, rng);
    CHECK(tr.horizon == 7);
    CHECK(tr.states.size() == 7);
    CHECK(tr.memories.size() == 7);
}

TEST_CASE("blind scenario feeds the policy a constant observation") {
    Scenario sc;
    sc.kind = CaseKind::Case2Blind;
    const HhmmPolicy policy = HhmmPolicy::flat({16, 16});
    Rng rng(99);
    const Trajectory tr = run_episode(sc, policy, rng);
    for (int y : tr.obs) CHECK(y == 0);
}

TEST_CASE("standing still on the fixed-target case never pays") {
    Scenario sc;
    sc.kind = CaseKind::Case1Fixed;
    const HhmmPolicy policy = always_action(encode_action(Move::NoMove, Move::NoMove));
    Rng rng(4);
    const Trajectory tr = run_episode(sc, policy, rng);
    CHECK(tr.reward == 0);
    for (const WorldState& s : tr.states) {
        CHECK(s.b.pos == LatticePoint{0, 19});
        CHECK(s.c.pos == LatticePoint{19, 19});
        CHECK(s.target == LatticePoint{10, 10});
    }
}

TEST_CASE("batch episode k replays the per-episode stream") {
    Scenario sc;
    const HhmmPolicy policy = HhmmPolicy::flat({16, 16});
    const std::uint64_t seed = 20240901;
    const auto batch = batch_rollouts(sc, policy, 8, seed);
    REQUIRE(batch.size() == 8);
    for (int k = 0; k < 8; ++k) {
        Rng rng(derive_stream(seed, static_cast<std::uint64_t>(k)));
        CHECK(batch[k] == run_episode(sc, policy, rng));
    }
}

TEST_CASE("parallel and serial batches are identical") {
    Scenario sc;
    const HhmmPolicy policy = HhmmPolicy::flat({16, 2});
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
    for (std::uint64_t seed : {1ull, 7ull, 123456789ull}) {
        const auto par = batch_rollouts(sc, policy, 64, seed);
        const auto ser = batch_rollouts_serial(sc, policy, 64, seed);
        REQUIRE(par.size() == ser.size());
        for (std::size_t k = 0; k < par.size(); ++k) CHECK(par[k] == ser[k]);
    }
}

TEST_CASE("batches of different seeds differ") {
    Scenario sc;
    const HhmmPolicy policy = HhmmPolicy::flat({16});
    const auto a = batch_rollouts(sc, policy, 4, 1);
    const auto b = batch_rollouts(sc, policy, 4, 2);
    CHECK(a != b);
}

TEST_CASE("trajectory CSV layout") {
    Scenario sc;
    const HhmmPolicy policy = HhmmPolicy::flat({16, 2});
    Rng rng(31337);
    const Trajectory tr = run_episode(sc, policy, rng);

    std::ostringstream out;
    write_trajectory_csv(out, sc, tr);
    std::istringstream in(out.str());
    std::string line;

    REQUIRE(std::getline(in, line));
    CHECK(line == "t,target_i,target_j,b_i,b_j,b_dir,c_i,c_j,c_dir,y,d,m1,m2,cumV");

    int rows = 0;
    std::string last;
    while (std::getline(in, line)) {
        CHECK(count_fields(line) == 14);
        ++rows;
        last = line;
    }
    CHECK(rows == 100);
    // The cumulative column ends at the episode score.
    const std::string tail = last.substr(last.rfind(',') + 1);
    CHECK(std::stoi(tail) == tr.reward);
    CHECK(last.substr(0, last.find(',')) == "100");
}

TEST_CASE("flat-policy batch mean is reproducible") {
    Scenario sc;
    const HhmmPolicy policy = HhmmPolicy::flat({16});
    const auto batch = batch_rollouts(sc, policy, 1000, 42);
    double mean = 0.0;
    for (const Trajectory& tr : batch) mean += tr.reward;
    mean /= static_cast<double>(batch.size());
    // Pinned output of this exact build; catches accidental changes to the
    // sampling order anywhere in the episode loop.
    CHECK(mean == doctest::Approx(2.186).epsilon(1e-12));
}
