#include "aggr/aggregation.hpp"

#include <cmath>

#include "aggr/mixability.hpp"

namespace aggr {

namespace {

std::vector<int> support(const Distribution& q) {
  std::vector<int> idx;
  for (int i = 0; i < q.dim(); ++i)
    if (q[i] > 0.0) idx.push_back(i);
  return idx;
}

Distribution embed(const Vec& face_weights, const std::vector<int>& idx, int k) {
  Vec full = Vec::Zero(k);
  for (size_t i = 0; i < idx.size(); ++i)
    full(idx[i]) = face_weights(static_cast<Eigen::Index>(i));
  return Distribution(full);
}

// Reduced mirror step on the surviving face: the new distribution is the
// dual argmax at grad phi~(q~) - eta * J^T shifted_losses, with experts of
// infinite loss projected out first.
Distribution mirror_step(const Entropy& phi, double eta, const Distribution& q,
                         const Vec& shifted_losses) {
  const int k = q.dim();
  const std::vector<int> old_active = support(q);
  std::vector<int> active;
  for (int i : old_active)
    if (!std::isinf(shifted_losses(i))) active.push_back(i);
  if (active.empty())
    throw DegenerateError("mirror_step: all surviving experts have infinite loss");
  if (active.size() == 1) return Distribution::vertex(k, active[0]);

  if (active.size() < static_cast<size_t>(k) && !phi.boundary_steep())
    throw DomainError("mirror_step: face restriction requires a steep entropy");

  // Full-coordinate gradient representative over the old face (last old
  // coordinate pinned to 0); constant shifts cancel in the differences.
  const int ko = static_cast<int>(old_active.size());
  Vec qo(ko);
  for (int i = 0; i < ko; ++i) qo(i) = q[old_active[i]];
  Vec g = Vec::Zero(ko);
  if (ko >= 2) {
    const Entropy old_face = phi.face_restrict(ko);
    g.head(ko - 1) = old_face.tilde_gradient(TildePoint(qo.head(ko - 1), ko));
  }
  std::vector<double> rep(k, 0.0);
  for (int i = 0; i < ko; ++i)
    rep[old_active[i]] = g(i) - eta * shifted_losses(old_active[i]);

  const int ka = static_cast<int>(active.size());
  Vec w(ka - 1);
  for (int i = 0; i + 1 < ka; ++i) w(i) = rep[active[i]] - rep[active[ka - 1]];
  const TildeDual td = tilde_dual(phi.face_restrict(ka), w);
  return embed(amalg(TildePoint(td.argmax, ka)).weights(), active, k);
}

// Generalized prediction of the GAA on the surviving face, then substitute.
Distribution predict_via_mix(const LearnerState& state,
                             const std::vector<Distribution>& experts,
                             const LossSpec& loss) {
  const int k = state.q.dim();
  if (static_cast<int>(experts.size()) != k)
    throw DimensionError("predict: expert count mismatch");
  const std::vector<int> active = support(state.q);
  if (active.size() < static_cast<size_t>(k) && active.size() > 1 &&
      !state.entropy.boundary_steep())
    throw DomainError("predict: eliminated experts require a steep entropy");

  std::vector<Distribution> acts;
  Vec qf(active.size());
  for (size_t i = 0; i < active.size(); ++i) {
    acts.push_back(experts[active[i]]);
    qf(static_cast<Eigen::Index>(i)) = state.q[active[i]];
  }
  const Entropy face = state.entropy.face_restrict(static_cast<int>(active.size()));
  const Distribution qface(qf);

  Vec s(loss.outcomes());
  for (int x = 0; x < loss.outcomes(); ++x)
    s(x) = mix(face, state.eta, loss.loss_row(x, acts), qface).value;
  return loss.substitute(s);
}

}  // namespace

Vec ZeroCorrection::correction(const std::vector<Vec>& realized_losses) const {
  if (realized_losses.empty()) throw LengthMismatchError("correction: empty history");
  return Vec::Zero(realized_losses.back().size());
}

AverageLossCorrection::AverageLossCorrection(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0)) throw ConfigError("AverageLossCorrection: alpha must be > 0");
}

Vec AverageLossCorrection::correction(const std::vector<Vec>& realized_losses) const {
  if (realized_losses.empty()) throw LengthMismatchError("correction: empty history");
  Vec acc = Vec::Zero(realized_losses.back().size());
  for (const Vec& l : realized_losses) acc += l;
  return -(alpha_ / static_cast<double>(realized_losses.size())) * acc;
}

LearnerState make_learner(Algorithm algorithm, const Entropy& entropy, double eta,
                          const Distribution& prior) {
  if (!(eta > 0.0)) throw ConfigError("make_learner: eta must be > 0");
  if (entropy.dim() != prior.dim())
    throw DimensionError("make_learner: prior and entropy dimensions differ");
  return LearnerState{algorithm, entropy, eta, prior, prior,
                      Vec::Zero(prior.dim()), {}, {}, 0};
}

Distribution aa_predict(const LearnerState& state,
                        const std::vector<Distribution>& experts, const LossSpec& loss) {
  const int k = state.q.dim();
  if (static_cast<int>(experts.size()) != k)
    throw DimensionError("aa_predict: expert count mismatch");
  Vec s(loss.outcomes());
  for (int x = 0; x < loss.outcomes(); ++x) {
    double lmin = kInf;
    for (int t = 0; t < k; ++t)
      if (state.q[t] > 0.0) lmin = std::min(lmin, loss.loss(x, experts[t]));
    if (std::isinf(lmin)) {
      s(x) = kInf;
      continue;
    }
    double z = 0.0;
    for (int t = 0; t < k; ++t) {
      if (state.q[t] == 0.0) continue;
      const double l = loss.loss(x, experts[t]);
      z += std::isinf(l) ? 0.0 : state.q[t] * std::exp(-state.eta * (l - lmin));
    }
    s(x) = lmin - std::log(z) / state.eta;
  }
  return loss.substitute(s);
}

LearnerState aa_update(const LearnerState& state, const Vec& expert_losses) {
  const int k = state.q.dim();
  if (expert_losses.size() != k) throw DimensionError("aa_update: loss vector mismatch");
  double lmin = kInf;
  for (int t = 0; t < k; ++t)
    if (state.q[t] > 0.0) lmin = std::min(lmin, expert_losses(t));
  if (std::isinf(lmin))
    throw DegenerateError("aa_update: every surviving expert has infinite loss");

  Vec w = Vec::Zero(k);
  for (int t = 0; t < k; ++t) {
    if (state.q[t] == 0.0 || std::isinf(expert_losses(t))) continue;
    w(t) = state.q[t] * std::exp(-state.eta * (expert_losses(t) - lmin));
  }
  LearnerState next = state;
  next.q = Distribution(w / w.sum());
  next.dual_iterate -= state.eta * expert_losses;
  next.loss_history.push_back(expert_losses);
  next.round += 1;
  return next;
}

Distribution gaa_predict(const LearnerState& state,
                         const std::vector<Distribution>& experts, const LossSpec& loss) {
  return predict_via_mix(state, experts, loss);
}

LearnerState gaa_update(const LearnerState& state, const Vec& expert_losses) {
  if (expert_losses.size() != state.q.dim())
    throw DimensionError("gaa_update: loss vector mismatch");
  LearnerState next = state;
  next.q = mirror_step(state.entropy, state.eta, state.q, expert_losses);
  next.dual_iterate -= state.eta * expert_losses;
  next.loss_history.push_back(expert_losses);
  next.round += 1;
  return next;
}

std::pair<Distribution, LearnerState> agaa_step(const LearnerState& state,
                                                const std::vector<Distribution>& experts,
                                                const LossSpec& loss,
                                                const CorrectionProtocol& protocol,
                                                int outcome) {
  const Distribution prediction = predict_via_mix(state, experts, loss);
  const Vec losses = loss.loss_row(outcome, experts);

  LearnerState next = state;
  next.loss_history.push_back(losses);
  const Vec v = protocol.correction(next.loss_history);
  Vec shifted(losses.size());
  for (Eigen::Index i = 0; i < losses.size(); ++i)
    shifted(i) = std::isinf(losses(i)) ? losses(i) : losses(i) + v(i);
  next.q = mirror_step(state.entropy, state.eta, state.q, shifted);
  next.dual_iterate -= state.eta * losses;
  next.correction_history.push_back(v);
  next.round += 1;
  return {prediction, next};
}

double delta_regret(const std::vector<Vec>& corrections,
                    const std::vector<Distribution>& q_history, int theta) {
  if (corrections.size() != q_history.size())
    throw LengthMismatchError("delta_regret: history lengths differ");
  double acc = 0.0;
  for (size_t t = 0; t < corrections.size(); ++t) {
    if (theta < 0 || theta >= q_history[t].dim() ||
        corrections[t].size() != q_history[t].dim())
      throw LengthMismatchError("delta_regret: dimension mismatch");
    acc += corrections[t](theta) - corrections[t].dot(q_history[t].weights());
  }
  return acc;
}

GameTrace run_game(LearnerState state, const LossSpec& loss,
                   const std::vector<GameRound>& rounds,
                   const CorrectionProtocol* protocol) {
  const ZeroCorrection zero;
  if (state.algorithm == Algorithm::AGAA && protocol == nullptr) protocol = &zero;

  GameTrace trace;
  trace.cumulative_expert_losses = Vec::Zero(state.q.dim());
  for (const GameRound& round : rounds) {
    const Vec losses = loss.loss_row(round.outcome, round.expert_predictions);

    Distribution prediction = [&] {
      switch (state.algorithm) {
        case Algorithm::AA: {
          Distribution p = aa_predict(state, round.expert_predictions, loss);
          state = aa_update(state, losses);
          return p;
        }
        case Algorithm::GAA: {
          Distribution p = gaa_predict(state, round.expert_predictions, loss);
          state = gaa_update(state, losses);
          return p;
        }
        case Algorithm::AGAA:
        default: {
          auto [p, next] = agaa_step(state, round.expert_predictions, loss, *protocol,
                                     round.outcome);
          state = std::move(next);
          return p;
        }
      }
    }();

    RoundRecord rec{round.expert_predictions, prediction, round.outcome, losses,
                    loss.loss(round.outcome, prediction)};
    trace.cumulative_expert_losses += rec.expert_losses;
    trace.cumulative_learner_loss += rec.learner_loss;
    trace.q_history.push_back(state.q);
    if (state.algorithm == Algorithm::AGAA)
      trace.correction_history.push_back(state.correction_history.back());
    trace.rounds.push_back(std::move(rec));
  }
  return trace;
}

GameTrace meta_aa(const GameTrace& first, const GameTrace& second,
                  const LossSpec& loss, double eta) {
  if (first.rounds.size() != second.rounds.size())
    throw LengthMismatchError("meta_aa: trace lengths differ");
  std::vector<GameRound> rounds;
  rounds.reserve(first.rounds.size());
  for (size_t t = 0; t < first.rounds.size(); ++t) {
    if (first.rounds[t].outcome != second.rounds[t].outcome)
      throw LengthMismatchError("meta_aa: outcome sequences differ");
    rounds.push_back(GameRound{
        {first.rounds[t].learner_prediction, second.rounds[t].learner_prediction},
        first.rounds[t].outcome});
  }
  const LearnerState init =
      make_learner(Algorithm::AA, Entropy::shannon(2), eta, Distribution::uniform(2));
  return run_game(init, loss, rounds);
}

}  // namespace aggr
