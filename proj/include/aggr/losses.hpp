#pragma once

#include <functional>
#include <limits>

#include "aggr/simplex.hpp"

namespace aggr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LossKind { Brier, Log, Custom };
enum class HessianMode { Analytic, FiniteDifference };

double brier_loss(int outcome, const Distribution& p);
/// -log p_x, +inf when p_x == 0.
double log_loss(int outcome, const Distribution& p);

/// An n-outcome proper loss with evaluators, Bayes-risk and Hessian
/// accessors, and a substitution function mapping generalized predictions
/// (one candidate loss value per outcome, +inf allowed) back to actions.
class LossSpec {
 public:
  using Evaluator = std::function<double(int, const Distribution&)>;

  static LossSpec brier(int n_outcomes);
  static LossSpec log(int n_outcomes);
  /// Custom losses must be proper; properness is grid-checked on
  /// construction (resolution 13) and rejected with DomainError otherwise.
  static LossSpec custom(int n_outcomes, Evaluator eval,
                         HessianMode mode = HessianMode::FiniteDifference);

  int outcomes() const { return n_; }
  LossKind kind() const { return kind_; }
  HessianMode hessian_mode() const { return mode_; }

  double loss(int outcome, const Distribution& p) const;
  /// ell(p): the loss profile over all outcomes.
  Vec loss_profile(const Distribution& p) const;
  /// ell_x(A): one loss per expert action, for a fixed outcome.
  Vec loss_row(int outcome, const std::vector<Distribution>& actions) const;

  /// <p, ell(p)> with the convention 0 * inf = 0.
  double bayes_risk(const Distribution& p) const;

  /// Hessian of the Bayes risk in reduced coordinates; negative
  /// semidefinite on the interior. Requires min implied coordinate >= 1e-6.
  Mat bayes_hessian_tilde(const TildePoint& pt) const;
  Mat bayes_hessian_tilde(const TildePoint& pt, HessianMode mode) const;

  /// Substitution: returns an action a with ell_x(a) <= s_x + 1e-7 for all
  /// x. Closed form for the log loss; min-max search otherwise. Throws
  /// InfeasibleError when the achieved min-max exceeds 1e-6 (s was not a
  /// superprediction).
  Distribution substitute(const Vec& s) const;

 private:
  LossSpec(int n, LossKind kind, Evaluator eval, HessianMode mode);

  int n_;
  LossKind kind_;
  Evaluator eval_;
  HessianMode mode_;
};

}  // namespace aggr
