// Times the parallel batch sampler against its serial reference on the
// default benchmark and double-checks that both produce identical episodes.
//
//   bench_rollouts [episodes] [repetitions]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ceplan/grid_world.hpp"
#include "ceplan/policy.hpp"
#include "ceplan/rollout.hpp"

using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double best_ms(int reps, F&& body) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        body();
        const auto t1 = Clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const int episodes = argc > 1 ? std::atoi(argv[1]) : 2000;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
    if (episodes < 1 || reps < 1) {
        std::fprintf(stderr, "usage: bench_rollouts [episodes >= 1] [repetitions >= 1]\n");
        return 2;
    }

    ceplan::Scenario sc;
    const ceplan::HhmmPolicy policy = ceplan::HhmmPolicy::flat({16, 16});
    const std::uint64_t seed = 42;

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled in this build\n");
#endif
    std::printf("episodes per batch: %d, horizon: %d, repetitions: %d\n", episodes, sc.horizon,
                reps);

    std::vector<ceplan::Trajectory> parallel_out, serial_out;
    const double par_ms =
        best_ms(reps, [&] { parallel_out = ceplan::batch_rollouts(sc, policy, episodes, seed); });
    const double ser_ms = best_ms(
        reps, [&] { serial_out = ceplan::batch_rollouts_serial(sc, policy, episodes, seed); });

    if (parallel_out != serial_out) {
        std::fprintf(stderr, "FAIL: parallel and serial batches differ\n");
        return 1;
    }

    std::printf("serial:   %9.2f ms (%.1f episodes/ms)\n", ser_ms, episodes / ser_ms);
    std::printf("parallel: %9.2f ms (%.1f episodes/ms)\n", par_ms, episodes / par_ms);
    std::printf("speedup:  %.2fx, outputs identical\n", ser_ms / par_ms);
    return 0;
}
