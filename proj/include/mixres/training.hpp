#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixres/losses.hpp"
#include "mixres/network.hpp"
#include "mixres/problem.hpp"

namespace mixres {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
};

/// One bias-corrected Adam update. Moments are lazily sized on first use.
void adam_step(AdamState& state, ParamVector& params, const Eigen::VectorXd& grad, double lr,
               const AdamConfig& adam = {});

struct TrainConfig {
  Method method = Method::mix;
  ProblemKind problem = ProblemKind::dirichlet;
  Index dim = 2;
  /// Mix: φ width, ψ gets 2·width. DRM/DGM: width of the single network.
  Index width = 10;
  Index blocks = 10;
  /// Scale on the Glorot range of the residual-block weights. Plain Glorot
  /// (1.0) lets ten stacked ReQU blocks blow up before training starts.
  double init_gain = 0.6;
  Activation activation = activations::requ;
  Index iterations = 20000;
  Index n = 1000;
  Index nbar = 1000;
  double lr = 1e-4;
  AdamConfig adam;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  /// Unset means the method default (500 for DRM Dirichlet, 1 otherwise).
  std::optional<double> lambda_b;
  std::uint64_t seed = 0;
  /// History rows (with e0/e1/e2) every this many iterations, plus the last.
  Index log_every = 100;
  Index n_quad = 10000;
  std::uint64_t eval_seed = 20240501;
  bool fixed_dataset = false;
  /// Record wall-clock times. Off by default so output bytes depend only on the config.
  bool timing = false;
  std::string history_path;
  std::string checkpoint_path;
};

/// Throws std::invalid_argument describing the first problem found.
void validate(const TrainConfig& config);

LossWeights effective_weights(const TrainConfig& config);

struct NetworkPair {
  ResNetSpec phi;
  std::optional<ResNetSpec> psi;  // Mix only

  Index param_count() const;
};

NetworkPair network_specs(const TrainConfig& config);

struct Checkpoint {
  TrainConfig config;
  Index iteration = 0;
  ParamVector params_phi;
  std::optional<ParamVector> params_psi;
  std::uint64_t rng_cursor = 0;
  LossBreakdown loss;
  /// Stands for the analytic solution (and its gradient) instead of networks.
  bool exact_oracle = false;
  bool aborted = false;
  std::string error;
};

struct HistoryRow {
  Index iter = 0;
  LossBreakdown loss;
  RelativeErrors errors;
  double wall_ms = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<HistoryRow> history;
  /// Batch loss at every iteration (before that iteration's update).
  std::vector<LossBreakdown> trace;
  RelativeErrors final_errors;
  double seconds = 0.0;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, Checkpoint diagnostic)
      : std::runtime_error(what), diagnostic_(std::move(diagnostic)) {}
  const Checkpoint& diagnostic() const { return diagnostic_; }

 private:
  Checkpoint diagnostic_;
};

/// Runs the optimisation loop. Writes history/checkpoint files when the
/// config names them. Throws TrainingError (after writing a diagnostic
/// checkpoint) if the loss or its gradient becomes non-finite.
TrainResult train(const TrainConfig& config);

/// Batch seed for iteration `iter`; batch streams and init streams never share a seed.
std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t iter);
std::uint64_t init_seed(std::uint64_t seed, std::uint64_t stream);

/// Relative errors of the networks stored in a checkpoint, on the config's
/// fixed quadrature seed.
RelativeErrors evaluate_checkpoint(const Checkpoint& checkpoint);

std::string history_header();
std::string history_line(const HistoryRow& row);

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mixres
