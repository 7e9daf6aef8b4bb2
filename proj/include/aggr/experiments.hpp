#pragma once

#include <optional>
#include <string>

#include "aggr/mixability.hpp"
#include "aggr/odds.hpp"

namespace aggr {

enum class Scenario { Example1, SyntheticRandom, OddsDataset };
enum class LearnerChoice { AA, GAA, AGAA, MetaAAAGAA };

const char* to_string(LearnerChoice c);

struct ExperimentConfig {
  Scenario scenario = Scenario::SyntheticRandom;
  std::vector<LearnerChoice> learners = {LearnerChoice::AA};
  LossKind loss = LossKind::Brier;
  int outcomes = 2;
  int experts = 2;
  EntropyKind entropy = EntropyKind::Shannon;
  double mixture_alpha = 0.5;
  double scaled_eta = 1.0;  // ScaledShannon divisor
  double eta = 1.0;
  double correction_alpha = 0.125;  // AGAA average-loss coefficient
  unsigned long long seed = 0;
  int rounds = 100;
  int grid_resolution = 1001;
  double grid_epsilon = 1e-4;
  std::string dataset_path;
  std::string column_map_path;
  std::vector<std::string> bookmakers;
  std::string output_path;  // directory for the CSV/JSON outputs

  static ExperimentConfig from_json_file(const std::string& path);
  void validate() const;

  LossSpec make_loss() const;
  Entropy make_entropy(int k) const;
};

struct AlgorithmSummary {
  LearnerChoice learner;
  double final_learner_loss = 0.0;
  Vec final_expert_losses;
  double regret_vs_best = 0.0;
  double bound = 0.0;         // R^phi for the configured entropy
  double delta_regret = 0.0;  // running correction term at the horizon
  double eta = 0.0;
  double eta_phi = 0.0;
  GameTrace trace;
};

struct ExperimentResult {
  std::vector<AlgorithmSummary> summaries;
  long dataset_rows = 0;
  long dropped_rows = 0;
};

struct Example1Result {
  GameTrace agaa;
  GameTrace aa;
  int best_expert = 0;
  double bound = 0.0;              // R^S = log 2 at eta = 1
  double delta_regret_best = 0.0;  // Delta R_{theta*}(T)
  double bound_plus_delta = 0.0;
  double agaa_regret_vs_best = 0.0;
  double aa_regret_vs_best = 0.0;
};

/// Two-expert Brier game: one expert stays at (1/2,1/2), the other plays
/// (1/4,3/4) for 50 rounds then (3/4,1/4); the outcome is always 0. The
/// adaptive learner runs with v^t = -(alpha/t) sum of realized losses.
std::vector<GameRound> example1_rounds(int total_rounds);
Example1Result run_example1(int total_rounds, double correction_alpha = 0.125);

std::vector<GameRound> synthetic_rounds(int experts, int outcomes, int total_rounds,
                                        unsigned long long seed);

/// Runs every configured learner, writes one per-round CSV per learner plus
/// a JSON summary into output_path, and returns the summaries.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace aggr
