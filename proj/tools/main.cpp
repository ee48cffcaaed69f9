#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ceplan/config.hpp"
#include "ceplan/harness.hpp"
#include "ceplan/policy.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string policy_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool has_out = false;
};

ceplan::ExperimentConfig load_or_default(const CommonArgs& args) {
    if (args.config_path.empty()) return {};
    return ceplan::load_config(args.config_path);
}

std::string resolve_out(const CommonArgs& args, const ceplan::ExperimentConfig& cfg) {
    return args.has_out ? args.out_dir : cfg.output.dir;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required, bool with_policy,
                bool with_seed) {
    auto* opt = cmd->add_option("--config", args.config_path, "experiment config file (JSON)");
    if (config_required) opt->required();
    if (with_policy)
        cmd->add_option("--policy", args.policy_path, "policy / table file")->required();
    if (with_seed)
        cmd->add_option("--seed", args.seed, "override the command's random seed")
            ->each([&args](const std::string&) { args.has_seed = true; });
    cmd->add_option("--out", args.out_dir, "output directory (default: output.dir from config)")
        ->each([&args](const std::string&) { args.has_out = true; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Cross-entropy training of finite-memory layered controllers on a "
        "two-pursuers grid benchmark, with a tabular Q-learning baseline"};
    app.require_subcommand(1);

    CommonArgs args;
    std::vector<int> sizes_arg;

    auto* train = app.add_subcommand("train", "train a controller and write policy + history");
    add_common(train, args, true, false, true);
    auto* eval = app.add_subcommand("eval", "evaluate a saved policy over many episodes");
    add_common(eval, args, true, true, true);
    auto* replay = app.add_subcommand("replay", "export one episode of a saved policy as CSV");
    add_common(replay, args, true, true, true);
    auto* sweep = app.add_subcommand("sweep", "train+eval over a grid of (levels, criterion)");
    add_common(sweep, args, true, false, true);
    auto* qtrain = app.add_subcommand("qtrain", "train the tabular Q baseline");
    add_common(qtrain, args, true, false, true);
    auto* qeval = app.add_subcommand("qeval", "evaluate a saved Q table over reward windows");
    add_common(qeval, args, true, true, true);
    auto* pcount = app.add_subcommand("param-count", "print the free-parameter count of a model");
    add_common(pcount, args, false, false, false);
    pcount->add_option("sizes", sizes_arg, "memory level sizes, e.g. 16 2 2");

    CLI11_PARSE(app, argc, argv);

    try {
        ceplan::ExperimentConfig cfg = load_or_default(args);
        const std::string out = resolve_out(args, cfg);
        if (train->parsed()) {
            if (args.has_seed) cfg.ce.seed = args.seed;
            ceplan::run_train(cfg, out, std::cout);
        } else if (eval->parsed()) {
            if (args.has_seed) cfg.evaluation.seed = args.seed;
            ceplan::run_eval(cfg, args.policy_path, out, std::cout);
        } else if (replay->parsed()) {
            ceplan::run_replay(cfg, args.policy_path, args.has_seed ? args.seed : 0, out,
                               std::cout);
        } else if (sweep->parsed()) {
            if (args.has_seed) cfg.ce.seed = args.seed;
            const int failures = ceplan::run_sweep(cfg, out, std::cout);
            if (failures > 0) {
                std::cerr << "error: " << failures << " sweep cell(s) failed\n";
                return 1;
            }
        } else if (qtrain->parsed()) {
            if (args.has_seed) cfg.qlearning.seed = args.seed;
            ceplan::run_qtrain(cfg, out, std::cout);
        } else if (qeval->parsed()) {
            if (args.has_seed) cfg.evaluation.seed = args.seed;
            ceplan::run_qeval(cfg, args.policy_path, out, std::cout);
        } else if (pcount->parsed()) {
            const ceplan::LevelSizes sizes =
                sizes_arg.empty() ? cfg.policy.level_sizes : ceplan::LevelSizes(sizes_arg);
            ceplan::validate_level_sizes(sizes);
            std::cout << "levels " << ceplan::level_sizes_tag(sizes) << ": "
                      << ceplan::param_count(sizes) << " parameters\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
