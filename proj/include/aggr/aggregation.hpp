#pragma once

#include <memory>
#include <utility>

#include "aggr/entropy.hpp"
#include "aggr/losses.hpp"

namespace aggr {

enum class Algorithm { AA, GAA, AGAA };

/// Policy supplying the adaptive correction vector v^t from the public
/// history of realized expert losses (entry s holds ell_{x^s}(A^s); the
/// current round's losses are already appended when the policy is asked).
class CorrectionProtocol {
 public:
  virtual ~CorrectionProtocol() = default;
  virtual Vec correction(const std::vector<Vec>& realized_losses) const = 0;
};

class ZeroCorrection final : public CorrectionProtocol {
 public:
  Vec correction(const std::vector<Vec>& realized_losses) const override;
};

/// v^t = -(alpha/t) sum_{s<=t} ell_{x^s}(A^s).
class AverageLossCorrection final : public CorrectionProtocol {
 public:
  explicit AverageLossCorrection(double alpha);
  Vec correction(const std::vector<Vec>& realized_losses) const override;

 private:
  double alpha_;
};

struct LearnerState {
  Algorithm algorithm;
  Entropy entropy;
  double eta;
  Distribution q;
  Distribution prior;
  Vec dual_iterate;  // cumulative -eta * realized losses
  std::vector<Vec> loss_history;
  std::vector<Vec> correction_history;
  int round = 0;
};

LearnerState make_learner(Algorithm algorithm, const Entropy& entropy, double eta,
                          const Distribution& prior);

/// AA prediction: substitutes s_x = -(1/eta) log <q, e^{-eta ell_x(A)}>.
Distribution aa_predict(const LearnerState& state,
                        const std::vector<Distribution>& experts, const LossSpec& loss);

/// Multiplicative-weights update; experts with infinite loss drop to weight
/// exactly 0 and never return. DegenerateError when nothing survives.
LearnerState aa_update(const LearnerState& state, const Vec& expert_losses);

/// GAA prediction: substitutes the Mix vector at the current prior,
/// face-restricted to the surviving experts (steep entropies only).
Distribution gaa_predict(const LearnerState& state,
                         const std::vector<Distribution>& experts, const LossSpec& loss);

/// Mirror step q <- argmin <mu, ell> + D_phi(mu, q)/eta via the reduced dual.
LearnerState gaa_update(const LearnerState& state, const Vec& expert_losses);

/// One full AGAA round: predict, observe the outcome, pick v^t from the
/// public history and apply the corrected mirror step.
std::pair<Distribution, LearnerState> agaa_step(const LearnerState& state,
                                                const std::vector<Distribution>& experts,
                                                const LossSpec& loss,
                                                const CorrectionProtocol& protocol,
                                                int outcome);

/// sum_t (v^t_theta - <v^t, q^t>) over the provided aligned histories.
double delta_regret(const std::vector<Vec>& corrections,
                    const std::vector<Distribution>& q_history, int theta);

struct GameRound {
  std::vector<Distribution> expert_predictions;
  int outcome;
};

struct RoundRecord {
  std::vector<Distribution> expert_predictions;
  Distribution learner_prediction;
  int outcome;
  Vec expert_losses;
  double learner_loss;
};

struct GameTrace {
  std::vector<RoundRecord> rounds;
  Vec cumulative_expert_losses;
  double cumulative_learner_loss = 0.0;
  std::vector<Distribution> q_history;   // q^t after each update
  std::vector<Vec> correction_history;   // v^t (empty for AA/GAA)
};

GameTrace run_game(LearnerState state, const LossSpec& loss,
                   const std::vector<GameRound>& rounds,
                   const CorrectionProtocol* protocol = nullptr);

/// AA over two meta-experts whose per-round predictions are the component
/// learners' predictions; both traces must share the outcome sequence.
GameTrace meta_aa(const GameTrace& first, const GameTrace& second,
                  const LossSpec& loss, double eta);

}  // namespace aggr
