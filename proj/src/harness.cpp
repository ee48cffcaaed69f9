#include "ceplan/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ceplan/ce_optimizer.hpp"
#include "ceplan/qlearn.hpp"
#include "ceplan/rollout.hpp"

namespace fs = std::filesystem;

namespace ceplan {

namespace {

std::string ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " + ec.message());
    return out_dir;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

std::string fmt(double v, int digits = 2) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

long percent_of(double mean, double reference) {
    return std::lround(100.0 * mean / reference);
}

std::string stop_reason(const CeHistory& history, const CeConfig& cc) {
    if (history.rows.empty()) return "no iterations requested";
    if (history.rows.back().unsuccessful >= cc.patience)
        return "criterion (" + std::to_string(cc.patience) + " successive unsuccessful tries)";
    return "iteration cap (" + std::to_string(cc.max_iterations) + ")";
}

void write_eval_block(std::ostream& out, const EvalSummary& es, double reference) {
    out << "  eval episodes:  " << es.episodes << "\n";
    out << "  mean reward:    " << fmt(es.mean) << "  (stddev " << fmt(es.stddev) << ", min "
        << es.min << ", max " << es.max << ")\n";
    out << "  % of reference: " << percent_of(es.mean, reference) << "%  (reference "
        << fmt(reference, 0) << ")\n";
}

}  // namespace

std::string level_sizes_tag(const LevelSizes& sizes) {
    std::string tag;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (i) tag += "x";
        tag += std::to_string(sizes[i]);
    }
    return tag;
}

void run_train(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
    const std::string dir = ensure_out_dir(out_dir);
    const Scenario sc = cfg.scenario.to_scenario();
    const CeConfig cc = cfg.ce_config();

    auto [policy, history] = optimize(sc, cfg.policy.level_sizes, cc);

    save_policy(policy, (fs::path(dir) / "policy.json").string());
    {
        auto out = open_out(dir, "history.csv");
        write_history_csv(out, history);
    }

    const EvalSummary es = evaluate(sc, policy, cfg.evaluation.episodes, cfg.evaluation.seed);

    std::ostringstream summary;
    summary << "training summary\n";
    summary << "  case:           " << case_label(sc.kind) << "\n";
    summary << "  level sizes:    " << level_sizes_tag(cfg.policy.level_sizes) << "\n";
    summary << "  parameters:     " << param_count(cfg.policy.level_sizes) << "\n";
    summary << "  iterations run: " << history.rows.size() << "\n";
    if (history.chosen_iteration >= 0)
        summary << "  chosen iterate: " << history.chosen_iteration << "  (holdout mean "
                << fmt(history.chosen_holdout_mean) << ")\n";
    else
        summary << "  chosen iterate: initial (no improvement found)\n";
    summary << "  stop reason:    " << stop_reason(history, cc) << "\n";
    write_eval_block(summary, es, cfg.output.reference_reward);

    open_out(dir, "summary.txt") << summary.str();
    log << summary.str();
}

void run_eval(const ExperimentConfig& cfg, const std::string& policy_path,
              const std::string& out_dir, std::ostream& log) {
    const std::string dir = ensure_out_dir(out_dir);
    const Scenario sc = cfg.scenario.to_scenario();
    const HhmmPolicy policy = load_policy(policy_path);

    const auto batch = batch_rollouts(sc, policy, cfg.evaluation.episodes, cfg.evaluation.seed);
    {
        auto out = open_out(dir, "episodes.csv");
        out << "episode,reward\n";
        for (std::size_t k = 0; k < batch.size(); ++k) out << k << "," << batch[k].reward << "\n";
    }

    EvalSummary es;
    es.episodes = static_cast<int>(batch.size());
    es.min = batch.front().reward;
    es.max = batch.front().reward;
    double sum = 0.0;
    for (const auto& tr : batch) {
        sum += tr.reward;
        es.min = std::min(es.min, tr.reward);
        es.max = std::max(es.max, tr.reward);
    }
    es.mean = sum / es.episodes;
    double ss = 0.0;
    for (const auto& tr : batch) ss += (tr.reward - es.mean) * (tr.reward - es.mean);
    es.stddev = es.episodes > 1 ? std::sqrt(ss / (es.episodes - 1)) : 0.0;

    std::ostringstream summary;
    summary << "evaluation summary\n";
    summary << "  case:           " << case_label(sc.kind) << "\n";
    summary << "  policy:         " << policy_path << "  (levels "
            << level_sizes_tag(policy.level_sizes) << ")\n";
    write_eval_block(summary, es, cfg.output.reference_reward);

    open_out(dir, "eval_summary.txt") << summary.str();
    log << summary.str();
}

void run_replay(const ExperimentConfig& cfg, const std::string& policy_path, std::uint64_t seed,
                const std::string& out_dir, std::ostream& log) {
    const std::string dir = ensure_out_dir(out_dir);
    const Scenario sc = cfg.scenario.to_scenario();
    const HhmmPolicy policy = load_policy(policy_path);

    Rng rng(derive_stream(seed, 0));  // matches episode 0 of an eval batch with this seed
    const Trajectory tr = run_episode(sc, policy, rng);
    {
        auto out = open_out(dir, "trajectory.csv");
        write_trajectory_csv(out, sc, tr);
    }
    log << "replay: seed " << seed << ", reward " << tr.reward << " / " << sc.horizon << ", wrote "
        << (fs::path(dir) / "trajectory.csv").string() << "\n";
}

int run_sweep(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
    const std::string dir = ensure_out_dir(out_dir);
    const Scenario sc = cfg.scenario.to_scenario();

    struct Cell {
        LevelSizes sizes;
        int criterion = 0;
        long params = 0;
        bool ok = false;
        std::string error;
        double mean = 0.0;
        long percent = 0;
        std::size_t iterations = 0;
    };
    std::vector<Cell> cells;

    int failures = 0;
    std::uint64_t cell_index = 0;
    for (const auto& sizes : cfg.sweep.level_sizes_grid) {
        for (int criterion : cfg.sweep.criteria) {
            Cell cell;
            cell.sizes = sizes;
            cell.criterion = criterion;
            cell.params = param_count(sizes);
            CeConfig cc = cfg.ce_config();
            cc.patience = criterion;
            cc.seed = derive_stream(cfg.ce.seed, cell_index);
            log << "sweep cell " << level_sizes_tag(sizes) << " / " << criterion_label(criterion)
                << " ..." << std::flush;
            try {
                auto [policy, history] = optimize(sc, sizes, cc);
                const EvalSummary es =
                    evaluate(sc, policy, cfg.evaluation.episodes, cfg.evaluation.seed);
                cell.ok = true;
                cell.mean = es.mean;
                cell.percent = percent_of(es.mean, cfg.output.reference_reward);
                cell.iterations = history.rows.size();
                log << " mean " << fmt(es.mean) << " (" << cell.percent << "%)\n";
            } catch (const std::exception& e) {
                cell.error = e.what();
                ++failures;
                log << " FAILED: " << e.what() << "\n";
            }
            cells.push_back(std::move(cell));
            ++cell_index;
        }
    }

    {
        auto csv = open_out(dir, "sweep.csv");
        csv << "level_sizes,criterion,param_count,iterations,mean_reward,percent_of_reference,"
               "status\n";
        for (const auto& c : cells) {
            csv << level_sizes_tag(c.sizes) << "," << criterion_label(c.criterion) << ","
                << c.params << ",";
            if (c.ok)
                csv << c.iterations << "," << fmt(c.mean, 4) << "," << c.percent << ",ok\n";
            else
                csv << ",,,failed\n";
        }
    }

    std::ostringstream table;
    table << "levels        criterion  params  mean     %of" << fmt(cfg.output.reference_reward, 0)
          << "\n";
    for (const auto& c : cells) {
        table << std::left << std::setw(14) << level_sizes_tag(c.sizes) << std::setw(11)
              << criterion_label(c.criterion) << std::setw(8) << c.params;
        if (c.ok)
            table << std::setw(9) << fmt(c.mean) << c.percent << "%\n";
        else
            table << "failed: " << c.error << "\n";
    }
    open_out(dir, "sweep.txt") << table.str();
    log << table.str();
    return failures;
}

namespace {

void emit_window_table(std::ostream& out, const Scenario& sc, const WindowStats& ws,
                       const std::string& mode) {
    out << "greedy-policy reward over " << ws.windows << " windows of " << sc.horizon
        << " steps (" << mode << ")\n";
    out << "  worst  mean    best\n";
    out << "  " << std::left << std::setw(7) << ws.worst << std::setw(8) << fmt(ws.mean)
        << ws.best << "\n";
}

void report_table_size(std::ostream& log, const Scenario& sc) {
    const std::size_t bytes = qtable_bytes(sc);
    log << "Q table: " << qstate_count(sc) << " states x " << kActionCount
        << " actions, float32 = " << bytes << " bytes (" << fmt(bytes / 1e9, 2) << " GB)\n";
}

WindowStats evaluate_windows(const ExperimentConfig& cfg, const QTable& q, const Scenario& sc) {
    if (cfg.qlearning.eval_mode == "continuation")
        return evaluate_q_windows_continuation(q, sc, cfg.qlearning.windows,
                                               cfg.evaluation.seed, cfg.qlearning.warmup_steps);
    return evaluate_q_windows_fresh(q, sc, cfg.qlearning.windows, cfg.evaluation.seed);
}

}  // namespace

void run_qtrain(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
    const std::string dir = ensure_out_dir(out_dir);
    const Scenario sc = cfg.scenario.to_scenario();

    report_table_size(log, sc);
    const double budget_bytes = cfg.qlearning.memory_budget_mb * 1024.0 * 1024.0;
    if (static_cast<double>(qtable_bytes(sc)) > budget_bytes)
        throw std::runtime_error(
            "Q table exceeds the configured memory budget (qlearning.memory_budget_mb = " +
            fmt(cfg.qlearning.memory_budget_mb, 1) +
            "); reduce scenario.width/scenario.height or raise the budget");

    QHyper hyper;
    hyper.alpha = cfg.qlearning.alpha;
    hyper.gamma = cfg.qlearning.gamma;
    const QTable q = train_q(sc, cfg.qlearning.steps, hyper, cfg.qlearning.seed,
                             cfg.qlearning.episode_length);
    save_qtable(q, sc, (fs::path(dir) / "qtable.bin").string());
    log << "trained " << cfg.qlearning.steps << " steps (alpha " << fmt(hyper.alpha, 3)
        << ", gamma " << fmt(hyper.gamma, 3) << ")\n";

    const WindowStats ws = evaluate_windows(cfg, q, sc);
    std::ostringstream table;
    emit_window_table(table, sc, ws, cfg.qlearning.eval_mode);
    open_out(dir, "q_windows.txt") << table.str();
    log << table.str();
}

void run_qeval(const ExperimentConfig& cfg, const std::string& table_path,
               const std::string& out_dir, std::ostream& log) {
    const std::string dir = ensure_out_dir(out_dir);
    const Scenario sc = cfg.scenario.to_scenario();

    report_table_size(log, sc);
    const QTable q = load_qtable(sc, table_path);
    const WindowStats ws = evaluate_windows(cfg, q, sc);
    std::ostringstream table;
    emit_window_table(table, sc, ws, cfg.qlearning.eval_mode);
    open_out(dir, "q_windows.txt") << table.str();
    log << table.str();
}

}  // namespace ceplan
