#pragma once

#include "aggr/entropy.hpp"
#include "aggr/losses.hpp"

namespace aggr {

enum class Execution { Serial, Parallel };

struct MixValue {
  double value;
  Distribution minimizer;
};

/// Mix^eta_phi(d, q): the entropy-regularized infimum
///   inf_mu <mu, d> + D_phi(mu, q) / eta
/// over mixture distributions mu. Closed form for the Shannon family,
/// reduced Fenchel-dual identity for other entropies at interior q, and the
/// vertex shortcut Mix(d, e_theta) = d_theta for steep entropies. Entries
/// of d may be +inf; the affected experts are dropped (exact for Shannon,
/// a documented face restriction otherwise).
MixValue mix(const Entropy& phi, double eta, const Vec& d, const Distribution& q);

/// The same value through the reduced dual identity
///   Mix = d_k + (1/eta) [phi~*(grad phi~(q~)) - phi~*(grad phi~(q~) - eta J^T d)].
/// mix() routes generic entropies here; it stays public as the second route
/// for cross-checking the Shannon closed form.
MixValue mix_via_dual(const Entropy& phi, double eta, const Vec& d, const Distribution& q);

/// Independent oracle: minimizes over an interior grid plus the k vertices.
/// Upper bound on the infimum, converging as the resolution grows.
double mix_bruteforce(const Entropy& phi, double eta, const Vec& d,
                      const Distribution& q, int resolution, double epsilon = 1e-4,
                      Execution exec = Execution::Parallel);

/// The same grid oracle with candidates and their entropy values cached,
/// for repeated queries against one entropy at scale.
class BruteForceOracle {
 public:
  BruteForceOracle(const Entropy& phi, int resolution, double epsilon = 1e-4);

  double value(double eta, const Vec& d, const Distribution& q,
               Execution exec = Execution::Parallel) const;
  long candidates() const { return count_; }

 private:
  Entropy phi_;
  SimplexGrid grid_;
  long count_;                      // grid points + k vertices
  std::vector<double> weights_;     // row-major candidate coordinates
  std::vector<double> phi_values_;  // entropy value per candidate
};

/// Mixability constant: grid infimum of 1/lambda_max([H L~_log]^{-1} H L~_loss),
/// the eigenvalue computed on the symmetrized congruent product
/// G^{-1} (-H L~_loss) G^{-1} with G G = -H L~_log. Returns 0 when the
/// pencil degenerates (lambda_max <= 0 at some grid point).
double mixability_constant(const LossSpec& loss, const SimplexGrid& grid,
                           Execution exec = Execution::Parallel);

/// Generalized mixability constant: eta_lower times the grid infimum of
/// lambda_min(H phi~ (H S~)^{-1}), using (H S~)^{-1} = Diag q~ - q~ q~^T.
/// Exact for the Shannon family (no scan).
double generalized_mixability_constant(const LossSpec& loss, const Entropy& phi,
                                       const SimplexGrid& loss_grid,
                                       const SimplexGrid& entropy_grid,
                                       Execution exec = Execution::Parallel);

enum class Verdict { Mixable, NotMixable, Inconclusive };

const char* to_string(Verdict v);

struct MixabilityCertificate {
  double eta_lower = 0.0;
  double eta_phi = 0.0;
  double convexity_margin = 0.0;  // min over grid of lambda_min(eta_lower*H phi~ - H S~)
  double refined_margin = 0.0;    // same at the nested refinement 2R-1
  SimplexGrid loss_grid;
  SimplexGrid entropy_grid;
  Verdict verdict = Verdict::Inconclusive;
};

/// Convexity certificate for eta_lower * phi - S on the expert simplex.
/// Mixable iff the margin clears -1e-8 with eta_lower > 0; Inconclusive when
/// the nested grid refinement moves the margin by 1e-3 or more.
MixabilityCertificate certify_phi_mixable(const LossSpec& loss, const Entropy& phi,
                                          const SimplexGrid& loss_grid,
                                          const SimplexGrid& entropy_grid,
                                          Execution exec = Execution::Parallel);

struct RegretBound {
  double bound;
  Distribution prior;
};

/// inf_q max_theta D_phi(e_theta, q) / eta_phi with the minimizing prior;
/// exact (log k)/eta for the Shannon family, grid-minimized otherwise.
RegretBound regret_bound(const Entropy& phi, double eta_phi, int k,
                         const SimplexGrid& grid, Execution exec = Execution::Parallel);

}  // namespace aggr
