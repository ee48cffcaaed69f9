#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "ceplan/config.hpp"

namespace ceplan {

// Command implementations behind the CLI. Each writes its artifacts under
// out_dir (created if missing), echoes a human-readable summary to `log`,
// and throws std::runtime_error on failure. File names are fixed:
//   train  -> policy.json, history.csv, summary.txt
//   eval   -> episodes.csv, eval_summary.txt
//   replay -> trajectory.csv
//   sweep  -> sweep.csv, sweep.txt
//   qtrain -> qtable.bin, q_windows.txt
//   qeval  -> q_windows.txt

void run_train(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);
void run_eval(const ExperimentConfig& cfg, const std::string& policy_path,
              const std::string& out_dir, std::ostream& log);
void run_replay(const ExperimentConfig& cfg, const std::string& policy_path, std::uint64_t seed,
                const std::string& out_dir, std::ostream& log);
// Returns the number of failed cells (0 = full success).
int run_sweep(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);
void run_qtrain(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);
void run_qeval(const ExperimentConfig& cfg, const std::string& table_path,
               const std::string& out_dir, std::ostream& log);

// "16x2x2" style tag used in tables and file names.
std::string level_sizes_tag(const LevelSizes& sizes);

}  // namespace ceplan
