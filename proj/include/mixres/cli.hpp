#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mixres/training.hpp"

namespace mixres {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_usage = 2 };

/// Reads a flat `key = value` file ('#' starts a comment). Throws
/// std::invalid_argument on malformed lines.
std::map<std::string, std::string> read_key_values(const std::string& path);

/// Cartesian product of method × problem × activation × dim × width over a
/// shared base config. With match_nop, DRM/DGM widths are chosen so their
/// NoP first reaches the Mix NoP of the same row.
struct ExperimentPlan {
  std::vector<Method> methods;
  std::vector<ProblemKind> problems;
  std::vector<Activation> activations;
  std::vector<Index> dims;
  std::vector<Index> widths;
  bool match_nop = true;
  TrainConfig base;
  std::uint64_t seed = 0;

  std::vector<TrainConfig> expand() const;
};

/// Plan keys: methods, problems, activations, dims, widths (comma lists),
/// match_nop, seed, plus any train key as a shared override.
ExperimentPlan parse_plan(const std::map<std::string, std::string>& kv);

/// Applies one train key (flag name without dashes) to a config.
void apply_train_key(TrainConfig& config, const std::string& key, const std::string& value);

std::string table_header();
std::string table_row(const TrainConfig& config, const RelativeErrors& e, double time_s);

struct SweepRun {
  TrainConfig config;
  RelativeErrors errors;
  double time_s = 0.0;
  std::string status = "ok";
};

/// Runs every config (in a pool capped by MIXRES_THREADS) and writes
/// table.csv, figure.csv and manifest.csv under out_dir in plan order.
std::vector<SweepRun> run_sweep(const ExperimentPlan& plan, const std::string& out_dir);

/// Entry point of the `mixres` tool; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace mixres
