#include "aggr/entropy.hpp"

#include <cmath>
#include <limits>

namespace aggr {

namespace {

constexpr double kInfVal = std::numeric_limits<double>::infinity();

double shannon_value(const Vec& w) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) > 0.0) acc += w(i) * std::log(w(i));
  return acc;
}

// Integrand of the Legendre counterexample: log(log(1-t)/log t).
double legendre_slope(double t) {
  return std::log(std::log1p(-t) / std::log(t));
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth,
                        double (*f)(double)) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(a, m, fa, flm, fm, left, tol / 2.0, depth - 1, f) +
         adaptive_simpson(m, b, fm, frm, fb, right, tol / 2.0, depth - 1, f);
}

// Integral of the counterexample slope from 1/2 to q, absolute tol 1e-10.
double legendre_value_1d(double q) {
  const double lo = 0.5;
  const double hi = std::min(std::max(q, 1e-13), 1.0 - 1e-13);
  if (hi == lo) return 0.0;
  const double fa = legendre_slope(lo), fb = legendre_slope(hi);
  const double fm = legendre_slope(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(lo, hi, fa, fm, fb, whole, 1e-10, 48, &legendre_slope);
}

Vec lift(const Vec& w) {
  Vec z(w.size() + 1);
  z.head(w.size()) = w;
  z(w.size()) = 0.0;
  return z;
}

// Stable softmax over z; entries of -inf get weight 0.
Vec softmax(const Vec& z) {
  const double m = z.maxCoeff();
  Vec e = (z.array() - m).exp();
  return e / e.sum();
}

// sup <q~, w> - S~(q~) = log(sum exp w + 1), maximizer exp(w)/(sum+1).
TildeDual tilde_dual_shannon(const Vec& w) {
  const double m = std::max(w.size() ? w.maxCoeff() : 0.0, 0.0);
  const double denom = (w.array() - m).exp().sum() + std::exp(-m);
  TildeDual out;
  out.value = m + std::log(denom);
  out.argmax = (w.array() - m).exp() / denom;
  return out;
}

// sup <q~, w> - s/2 ||q||^2: exact via Euclidean projection of w/s.
TildeDual tilde_dual_quadratic(const Vec& w, double s) {
  const Vec q = project_to_simplex(lift(w) / s);
  const Eigen::Index d = w.size();
  TildeDual out;
  out.argmax = q.head(d);
  out.value = out.argmax.dot(w) - 0.5 * s * q.squaredNorm();
  return out;
}

double tilde_objective(const Entropy& phi, const Vec& w, const Vec& u) {
  return u.dot(w) - phi.value(amalg(TildePoint(u, phi.dim())));
}

// Mirror ascent with a Newton polish for smooth steep entropies; the
// maximizer is interior, so the unconstrained reduced Newton step applies.
TildeDual tilde_dual_generic(const Entropy& phi, const Vec& w) {
  const int k = phi.dim();
  Vec q = Vec::Constant(k, 1.0 / k);
  double step = 1.0;
  double obj = tilde_objective(phi, w, q.head(k - 1));
  for (int it = 0; it < 400; ++it) {
    Vec dir = lift(w - phi.tilde_gradient(TildePoint(q.head(k - 1), k)));
    dir.array() -= dir.maxCoeff();
    bool improved = false;
    for (int half = 0; half < 60; ++half) {
      Vec qc = softmax((q.array().log() + step * dir.array()).matrix()).cwiseMax(1e-300);
      qc /= qc.sum();
      const double oc = tilde_objective(phi, w, qc.head(k - 1));
      if (oc >= obj) {
        improved = oc > obj + 1e-16;
        q = qc;
        obj = oc;
        step = std::min(step * 1.5, 1e3);
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }

  // Newton refinement in reduced coordinates.
  Vec u = q.head(k - 1);
  for (int it = 0; it < 100; ++it) {
    const TildePoint t(u, k);
    const Vec r = w - phi.tilde_gradient(t);
    if (r.lpNorm<Eigen::Infinity>() <= 1e-13 * std::max(1.0, w.lpNorm<Eigen::Infinity>()))
      break;
    const Vec delta = phi.tilde_hessian(t).ldlt().solve(r);
    const double base = tilde_objective(phi, w, u);
    double alpha = 1.0;
    bool moved = false;
    for (int half = 0; half < 80 && !moved; ++half) {
      const Vec cand = u + alpha * delta;
      if (cand.minCoeff() > 0.0 && cand.sum() < 1.0 &&
          tilde_objective(phi, w, cand) >= base - 1e-15) {
        u = cand;
        moved = true;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }

  TildeDual out;
  out.argmax = u;
  out.value = tilde_objective(phi, w, u);
  return out;
}

}  // namespace

Entropy::Entropy(EntropyKind kind, int k, double alpha, double scale)
    : kind_(kind), k_(k), alpha_(alpha), scale_(scale) {
  if (k_ < 1) throw DimensionError("Entropy: dim must be >= 1");
  if (!(scale_ > 0.0)) throw ConfigError("Entropy: scale must be > 0");
}

Entropy Entropy::shannon(int k) { return Entropy(EntropyKind::Shannon, k, 1.0, 1.0); }
Entropy Entropy::quadratic(int k) { return Entropy(EntropyKind::Quadratic, k, 0.0, 1.0); }

Entropy Entropy::mixture(int k, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("Entropy::mixture: alpha must be in [0,1]");
  return Entropy(EntropyKind::Mixture, k, alpha, 1.0);
}

Entropy Entropy::scaled_shannon(int k, double eta) {
  if (!(eta > 0.0)) throw ConfigError("Entropy::scaled_shannon: eta must be > 0");
  return Entropy(EntropyKind::ScaledShannon, k, 1.0, 1.0 / eta);
}

Entropy Entropy::legendre_counterexample() {
  return Entropy(EntropyKind::LegendreCounterexample, 2, 0.0, 1.0);
}

Entropy Entropy::face_restrict(int new_k) const {
  if (new_k < 1 || new_k > k_) throw DimensionError("face_restrict: bad dimension");
  if (kind_ == EntropyKind::LegendreCounterexample && new_k != 2)
    throw DomainError("face_restrict: Legendre counterexample is k=2 only");
  return Entropy(kind_, new_k, alpha_, scale_);
}

Entropy Entropy::scaled(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("Entropy::scaled: factor must be > 0");
  return Entropy(kind_, k_, alpha_, scale_ * factor);
}

double Entropy::value(const Distribution& q) const {
  if (q.dim() != k_) throw DimensionError("Entropy::value: dimension mismatch");
  double base = 0.0;
  switch (kind_) {
    case EntropyKind::Shannon:
    case EntropyKind::ScaledShannon:
      base = shannon_value(q.weights());
      break;
    case EntropyKind::Quadratic:
      base = 0.5 * q.weights().squaredNorm();
      break;
    case EntropyKind::Mixture:
      base = alpha_ * shannon_value(q.weights()) +
             (1.0 - alpha_) * 0.5 * q.weights().squaredNorm();
      break;
    case EntropyKind::LegendreCounterexample:
      base = legendre_value_1d(q[0]);
      break;
  }
  return scale_ * base;
}

Vec Entropy::tilde_gradient(const TildePoint& q) const {
  if (q.dim_full() != k_) throw DimensionError("tilde_gradient: dimension mismatch");
  const Vec& c = q.coords();
  const double last = q.residual();
  Vec g;
  switch (kind_) {
    case EntropyKind::Shannon:
    case EntropyKind::ScaledShannon:
      g = (c.array().log() - std::log(last)).matrix();
      break;
    case EntropyKind::Quadratic:
      g = (c.array() - last).matrix();
      break;
    case EntropyKind::Mixture:
      g = alpha_ * (c.array().log() - std::log(last)).matrix() +
          (1.0 - alpha_) * (c.array() - last).matrix();
      break;
    case EntropyKind::LegendreCounterexample:
      g = Vec::Constant(1, legendre_slope(c(0)));
      break;
  }
  return scale_ * g;
}

Mat Entropy::tilde_hessian(const TildePoint& q) const {
  if (q.dim_full() != k_) throw DimensionError("tilde_hessian: dimension mismatch");
  const int d = k_ - 1;
  const Vec& c = q.coords();
  const double last = q.residual();
  Mat h;
  switch (kind_) {
    case EntropyKind::Shannon:
    case EntropyKind::ScaledShannon: {
      h = Mat::Constant(d, d, 1.0 / last);
      for (int i = 0; i < d; ++i) h(i, i) += 1.0 / c(i);
      break;
    }
    case EntropyKind::Quadratic:
      h = Mat::Identity(d, d) + Mat::Ones(d, d);
      break;
    case EntropyKind::Mixture: {
      h = Mat::Constant(d, d, alpha_ / last);
      for (int i = 0; i < d; ++i) h(i, i) += alpha_ / c(i);
      h += (1.0 - alpha_) * (Mat::Identity(d, d) + Mat::Ones(d, d));
      break;
    }
    case EntropyKind::LegendreCounterexample: {
      h = Mat::Constant(1, 1, legendre_counterexample_hessian(c(0)));
      break;
    }
  }
  return scale_ * h;
}

double Entropy::divergence(const Distribution& v, const Distribution& u) const {
  if (v.dim() != k_ || u.dim() != k_)
    throw DimensionError("divergence: dimension mismatch");
  if (u.interior()) {
    const TildePoint ut = project_tilde(u);
    const Vec diff = v.weights().head(k_ - 1) - u.weights().head(k_ - 1);
    return value(v) - value(u) - tilde_gradient(ut).dot(diff);
  }
  if (v.weights() == u.weights()) return 0.0;
  if (boundary_steep()) return kInfVal;
  throw DomainError("divergence: boundary base point for a non-steep entropy");
}

DualResult Entropy::entropic_dual(const Vec& z) const {
  if (z.size() != k_) throw DimensionError("entropic_dual: dimension mismatch");
  std::vector<int> active;
  for (int i = 0; i < k_; ++i) {
    if (std::isnan(z(i)) || z(i) == kInfVal)
      throw DomainError("entropic_dual: entries must be finite or -inf");
    if (z(i) > -kInfVal) active.push_back(i);
  }
  if (active.empty()) throw DomainError("entropic_dual: all entries are -inf");

  if (active.size() == 1) {
    const Distribution v = Distribution::vertex(k_, active[0]);
    return {z(active[0]) - value(v), v};
  }

  const int ka = static_cast<int>(active.size());
  const Entropy face = face_restrict(ka);
  Vec zf(ka);
  for (int i = 0; i < ka; ++i) zf(i) = z(active[i]);
  Vec w(ka - 1);
  for (int i = 0; i + 1 < ka; ++i) w(i) = zf(i) - zf(ka - 1);

  const TildeDual td = tilde_dual(face, w);

  Vec full = Vec::Zero(k_);
  double acc = 0.0;
  for (int i = 0; i + 1 < ka; ++i) {
    full(active[i]) = td.argmax(i);
    acc += td.argmax(i);
  }
  full(active[ka - 1]) = std::max(0.0, 1.0 - acc);

  DualResult res{zf(ka - 1) + td.value, Distribution(full)};

  // First-order certificate: the Frank-Wolfe gap bounds the suboptimality
  // of the iteratively solved kinds.
  if (kind_ == EntropyKind::Mixture || kind_ == EntropyKind::LegendreCounterexample) {
    const Vec qf = amalg(TildePoint(td.argmax, ka)).weights();
    const Vec grad = zf - lift(face.tilde_gradient(TildePoint(td.argmax, ka)));
    const double gap = grad.maxCoeff() - grad.dot(qf);
    if (!(gap <= 1e-7))
      throw SolverError("entropic_dual: first-order optimality above tolerance");
  }
  return res;
}

Distribution Entropy::dual_gradient(const Vec& z) const {
  return entropic_dual(z).maximizer;
}

TildeDual tilde_dual(const Entropy& phi, const Vec& w) {
  if (w.size() != phi.dim() - 1) throw DimensionError("tilde_dual: dimension mismatch");
  switch (phi.kind()) {
    case EntropyKind::Shannon:
    case EntropyKind::ScaledShannon: {
      // sup <q~,w> - s S~ = s (sup <q~, w/s> - S~)
      TildeDual td = tilde_dual_shannon(w / phi.scale());
      td.value *= phi.scale();
      return td;
    }
    case EntropyKind::Quadratic:
      return tilde_dual_quadratic(w, phi.scale());
    default:
      return tilde_dual_generic(phi, w);
  }
}

double legendre_counterexample_hessian(double q) {
  if (!(q > 0.0) || !(q < 1.0))
    throw DomainError("legendre_counterexample_hessian: q must lie in (0,1)");
  return -1.0 / (q * std::log(q)) - 1.0 / ((1.0 - q) * std::log1p(-q));
}

}  // namespace aggr
