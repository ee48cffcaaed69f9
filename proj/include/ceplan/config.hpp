#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ceplan/ce_optimizer.hpp"
#include "ceplan/grid_world.hpp"
#include "ceplan/policy.hpp"

namespace ceplan {

// One structured-text (JSON) config file drives every command. Unknown keys
// are rejected, and validation failures name the offending key, e.g.
// "ce.rho: must be in (0, 1)".

struct ScenarioSection {
    CaseKind kind = CaseKind::Case3Full;
    int horizon = 100;
    int radius = 3;
    int width = 20;
    int height = 20;

    Scenario to_scenario() const;
    bool operator==(const ScenarioSection&) const = default;
};

struct PolicySection {
    LevelSizes level_sizes{16, 16};
    double smoothing = 1e-3;
    bool operator==(const PolicySection&) const = default;
};

struct CeSection {
    int n_samples = 1000;
    double rho = 0.5;
    // Successive unsuccessful tries before stopping; "weak" = 100,
    // "strong" = 500 in the file.
    int criterion = 100;
    long long max_iterations = 5000;
    std::uint64_t seed = 1;
    bool operator==(const CeSection&) const = default;
};

struct QlearningSection {
    long long steps = 1000000;
    double alpha = 0.1;
    double gamma = 0.99;
    std::uint64_t seed = 1;
    // 0 = continuing task, no restarts.
    long long episode_length = 0;
    int windows = 100;
    long long warmup_steps = 0;
    // "fresh" or "continuation".
    std::string eval_mode = "fresh";
    double memory_budget_mb = 4096.0;
    bool operator==(const QlearningSection&) const = default;
};

struct EvaluationSection {
    int episodes = 1000;
    std::uint64_t seed = 777;
    bool operator==(const EvaluationSection&) const = default;
};

struct SweepSection {
    std::vector<LevelSizes> level_sizes_grid;
    std::vector<int> criteria;
    bool operator==(const SweepSection&) const = default;
};

struct OutputSection {
    std::string dir = "out";
    // Denominator for the reported reward percentage.
    double reference_reward = 85.0;
    bool operator==(const OutputSection&) const = default;
};

struct ExperimentConfig {
    ScenarioSection scenario;
    PolicySection policy;
    CeSection ce;
    QlearningSection qlearning;
    EvaluationSection evaluation;
    SweepSection sweep;
    OutputSection output;
    bool operator==(const ExperimentConfig&) const = default;

    CeConfig ce_config() const;
};

// "weak" -> 100, "strong" -> 500, otherwise a positive integer.
int parse_criterion(const nlohmann::ordered_json& value, const std::string& key);
std::string criterion_label(int criterion);

std::string case_label(CaseKind kind);
CaseKind parse_case(const std::string& label, const std::string& key);

// Throws std::runtime_error listing every problem, one per line.
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

}  // namespace ceplan
