#pragma once

#include "aggr/simplex.hpp"

namespace aggr {

enum class EntropyKind { Shannon, Quadratic, Mixture, LegendreCounterexample, ScaledShannon };

struct DualResult {
  double value;
  Distribution maximizer;
};

/// A convex function on the expert simplex with value, gradient and Hessian
/// in reduced (tilde) coordinates, plus its entropic dual
///   phi*(z) = sup_{q in simplex} <q, z> - phi(q).
///
/// Shannon here is sum q_i log q_i (convex, no minus sign); Quadratic is
/// 0.5*||q||^2 and is the one non-steep entropy of the family; Mixture(a)
/// is a*Shannon + (1-a)*Quadratic.
class Entropy {
 public:
  static Entropy shannon(int k);
  static Entropy quadratic(int k);
  static Entropy mixture(int k, double alpha);
  static Entropy scaled_shannon(int k, double eta);
  /// k=2 entropy with second derivative -1/(q log q) - 1/((1-q) log(1-q));
  /// its value is obtained by quadrature of the stated derivative.
  static Entropy legendre_counterexample();

  int dim() const { return k_; }
  EntropyKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  /// Multiplier applied to the base entropy (1/eta for ScaledShannon).
  double scale() const { return scale_; }
  /// Directional derivatives blow up to -inf at the relative boundary.
  bool boundary_steep() const { return kind_ != EntropyKind::Quadratic; }

  /// Same entropy family on a face with new_k coordinates.
  Entropy face_restrict(int new_k) const;
  /// The entropy multiplied by a positive factor (phi/eta is scaled(1/eta)).
  Entropy scaled(double factor) const;

  double value(const Distribution& q) const;
  Vec tilde_gradient(const TildePoint& q) const;
  Mat tilde_hessian(const TildePoint& q) const;

  /// Bregman-style gap phi(v) - phi(u) - phi'(u; v-u). Interior u uses the
  /// tilde gradient; boundary u yields 0 when v == u, +inf for steep
  /// entropies, and DomainError otherwise (face-relative derivatives are
  /// not computed).
  double divergence(const Distribution& v, const Distribution& u) const;

  /// Entropic dual with certified maximizer. Entries of z may be -inf
  /// (forcing weight 0). Closed form for Shannon, exact simplex projection
  /// for Quadratic, mirror ascent + Newton polish otherwise.
  DualResult entropic_dual(const Vec& z) const;
  /// The dual maximizer (the mirror dual-to-primal map for strictly convex phi).
  Distribution dual_gradient(const Vec& z) const;

 private:
  Entropy(EntropyKind kind, int k, double alpha, double scale);

  EntropyKind kind_;
  int k_;
  double alpha_;  // Mixture weight on the Shannon part
  double scale_;  // overall multiplier
};

/// Reduced Fenchel dual sup_{q in reduced simplex} <q, w> - phi~(q),
/// together with its maximizer in reduced coordinates.
struct TildeDual {
  double value;
  Vec argmax;
};
TildeDual tilde_dual(const Entropy& phi, const Vec& w);

/// Closed-form second derivative of the Legendre counterexample (k=2).
double legendre_counterexample_hessian(double q);

}  // namespace aggr
