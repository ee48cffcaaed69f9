#include "ceplan/ce_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ceplan {

namespace {

// Sub-stream domains hung off the run seed.
constexpr std::uint64_t kRolloutDomain = 1;
constexpr std::uint64_t kHoldoutDomain = 2;

void validate_config(const CeConfig& config) {
    if (config.n_samples < 1) throw std::invalid_argument("ce: n_samples must be >= 1");
    if (!(config.rho > 0.0 && config.rho < 1.0)) {
        throw std::invalid_argument("ce: rho must lie strictly between 0 and 1");
    }
    if (config.smoothing < 0.0) throw std::invalid_argument("ce: smoothing must be >= 0");
    if (config.patience < 1) throw std::invalid_argument("ce: patience must be >= 1");
    if (config.max_iterations < 0) throw std::invalid_argument("ce: max_iterations must be >= 0");
}

double mean_reward(const std::vector<Trajectory>& batch) {
    double sum = 0.0;
    for (const Trajectory& tr : batch) sum += tr.reward;
    return sum / static_cast<double>(batch.size());
}

}  // namespace

std::vector<std::size_t> select_elite(std::span<const int> rewards, double rho) {
    if (rewards.empty()) throw std::invalid_argument("select_elite: empty sample list");
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("select_elite: rho must lie strictly between 0 and 1");
    }
    const std::size_t n = rewards.size();
    const std::size_t k = static_cast<std::size_t>(
        std::ceil(rho * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rewards[a] != rewards[b]) return rewards[a] > rewards[b];
        return a < b;
    });
    order.resize(std::max<std::size_t>(1, std::min(k, n)));
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<std::size_t> select_elite(const std::vector<Trajectory>& trajectories, double rho) {
    std::vector<int> rewards;
    rewards.reserve(trajectories.size());
    for (const Trajectory& tr : trajectories) rewards.push_back(tr.reward);
    return select_elite(std::span<const int>(rewards), rho);
}

EvalSummary evaluate(const Scenario& sc, const HhmmPolicy& policy, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("evaluate: n must be >= 1");
    const std::vector<Trajectory> batch = batch_rollouts(sc, policy, n, seed);
    EvalSummary s;
    s.episodes = n;
    s.min = batch[0].reward;
    s.max = batch[0].reward;
    double sum = 0.0;
    for (const Trajectory& tr : batch) {
        sum += tr.reward;
        s.min = std::min(s.min, tr.reward);
        s.max = std::max(s.max, tr.reward);
    }
    s.mean = sum / n;
    double var = 0.0;
    for (const Trajectory& tr : batch) {
        const double d = tr.reward - s.mean;
        var += d * d;
    }
    s.stddev = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    return s;
}

std::pair<HhmmPolicy, CeHistory> optimize_with(const RolloutFn& sample, const LevelSizes& sizes,
                                               const CeConfig& config, int obs_count,
                                               int action_count) {
    validate_config(config);
    HhmmPolicy policy = HhmmPolicy::flat(sizes, obs_count, action_count);
    CeHistory history;

    HhmmPolicy best_policy = policy;
    double best_holdout = -std::numeric_limits<double>::infinity();
    bool have_checkpoint = false;

    int best_threshold = std::numeric_limits<int>::min();
    int best_so_far = std::numeric_limits<int>::min();
    int unsuccessful = 0;

    auto holdout_mean = [&](const HhmmPolicy& h, int iter) {
        const auto batch =
            sample(h, config.n_samples, derive_stream(config.seed, kHoldoutDomain, iter));
        return mean_reward(batch);
    };

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        const std::uint64_t batch_seed = derive_stream(config.seed, kRolloutDomain, iter);
        const std::vector<Trajectory> batch = sample(policy, config.n_samples, batch_seed);
        const std::vector<std::size_t> elite_idx = select_elite(batch, config.rho);

        int batch_best = batch[0].reward;
        for (const Trajectory& tr : batch) batch_best = std::max(batch_best, tr.reward);
        int threshold = batch[elite_idx[0]].reward;
        double elite_sum = 0.0;
        std::vector<const Trajectory*> elite;
        elite.reserve(elite_idx.size());
        for (std::size_t idx : elite_idx) {
            elite.push_back(&batch[idx]);
            threshold = std::min(threshold, batch[idx].reward);
            elite_sum += batch[idx].reward;
        }

        policy = ce_update(std::span<const Trajectory* const>(elite), sizes, config.smoothing,
                           policy);
        policy.validate(1e-9);
        ++history.validated_iterations;

        const bool success = threshold > best_threshold;
        if (success) {
            best_threshold = threshold;
            unsuccessful = 0;
            // Candidate checkpoint: keep the policy with the best held-out mean.
            const double holdout = holdout_mean(policy, iter);
            if (holdout > best_holdout) {
                best_holdout = holdout;
                best_policy = policy;
                have_checkpoint = true;
                history.chosen_iteration = iter;
                history.chosen_holdout_mean = holdout;
            }
        } else {
            ++unsuccessful;
        }
        best_so_far = std::max(best_so_far, batch_best);
        history.rows.push_back({iter, batch_best, threshold,
                                elite_sum / static_cast<double>(elite_idx.size()), best_so_far,
                                unsuccessful});

        if (unsuccessful >= config.patience) break;
    }

    // The last iterate competes with the checkpoints.
    if (!history.rows.empty()) {
        const int final_iter = history.rows.back().iter;
        const double holdout = holdout_mean(policy, final_iter + 1);
        if (!have_checkpoint || holdout > best_holdout) {
            best_holdout = holdout;
            best_policy = policy;
            history.chosen_iteration = final_iter;
            history.chosen_holdout_mean = holdout;
        }
    }
    return {std::move(best_policy), std::move(history)};
}

std::pair<HhmmPolicy, CeHistory> optimize(const Scenario& sc, const LevelSizes& sizes,
                                          const CeConfig& config) {
    RolloutFn sample = [&sc](const HhmmPolicy& h, int n, std::uint64_t seed) {
        return batch_rollouts(sc, h, n, seed);
    };
    return optimize_with(sample, sizes, config);
}

void write_history_csv(std::ostream& out, const CeHistory& history) {
    out << "iter,best,threshold,elite_mean,best_so_far,unsuccessful\n";
    for (const CeIterationStats& row : history.rows) {
        out << row.iter << ',' << row.best << ',' << row.threshold << ',' << row.elite_mean
            << ',' << row.best_so_far << ',' << row.unsuccessful << '\n';
    }
}

}  // namespace ceplan
