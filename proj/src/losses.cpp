#include "aggr/losses.hpp"

#include <algorithm>
#include <cmath>

namespace aggr {

namespace {

void check_outcome(int x, int n) {
  if (x < 0 || x >= n) throw IndexError("outcome index out of range");
}

// max_x (ell_x(p) - s_x), ignoring outcomes with s_x = +inf.
double minmax_objective(const LossSpec& loss, const Distribution& p, const Vec& s) {
  double worst = -kInf;
  for (int x = 0; x < loss.outcomes(); ++x) {
    if (std::isinf(s(x))) continue;
    worst = std::max(worst, loss.loss(x, p) - s(x));
  }
  return worst;
}

// Ternary search for the minimum of a unimodal f on [lo, hi].
template <typename F>
double ternary_min(F&& f, double lo, double hi, int iters = 200) {
  for (int i = 0; i < iters && hi - lo > 1e-13; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    const double f1 = f(m1), f2 = f(m2);
    if (f1 < f2) {
      hi = m2;
    } else if (f2 < f1) {
      lo = m1;
    } else {
      lo = m1;
      hi = m2;
    }
  }
  return 0.5 * (lo + hi);
}

Distribution substitute_search_n2(const LossSpec& loss, const Vec& s) {
  auto value = [&](double p1) {
    Vec w(2);
    w << p1, 1.0 - p1;
    return minmax_objective(loss, Distribution(w), s);
  };
  const double p1 = ternary_min(value, 0.0, 1.0);
  Vec w(2);
  w << p1, 1.0 - p1;
  return Distribution(w);
}

Distribution substitute_search_n3(const LossSpec& loss, const Vec& s) {
  auto value = [&](double a, double b) {
    Vec w(3);
    w << a, b, 1.0 - a - b;
    return minmax_objective(loss, Distribution(w), s);
  };

  // Coarse scan of the full simplex, lowest index wins ties.
  const int res = 41;
  double best_a = 1.0 / 3, best_b = 1.0 / 3;
  double best = value(best_a, best_b);
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j + i < res; ++j) {
      const double a = static_cast<double>(i) / (res - 1);
      const double b = static_cast<double>(j) / (res - 1);
      const double v = value(a, b);
      if (v < best) {
        best = v;
        best_a = a;
        best_b = b;
      }
    }
  }

  // Compass refinement over axis and diagonal moves with shrinking step.
  const double dirs[6][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}};
  double step = 0.05;
  int evals = 0;
  while (step > 1e-10 && evals < 10000) {
    bool moved = false;
    for (const auto& d : dirs) {
      const double a = std::clamp(best_a + step * d[0], 0.0, 1.0);
      const double b = std::clamp(best_b + step * d[1], 0.0, 1.0 - a);
      ++evals;
      const double v = value(a, b);
      if (v < best - 1e-15) {
        best = v;
        best_a = a;
        best_b = b;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }

  Vec w(3);
  w << best_a, best_b, 1.0 - best_a - best_b;
  return Distribution(w);
}

Distribution substitute_search_projected(const LossSpec& loss, const Vec& s) {
  const int n = loss.outcomes();
  Vec p = Vec::Constant(n, 1.0 / n);
  Vec best_p = p;
  double best = minmax_objective(loss, Distribution(p), s);

  const double h = 1e-6;
  for (int t = 1; t <= 10000; ++t) {
    // Subgradient of the active (lowest-index) branch, by central differences.
    const Distribution dp{p};
    int active = 0;
    double worst = -kInf;
    for (int x = 0; x < n; ++x) {
      if (std::isinf(s(x))) continue;
      const double v = loss.loss(x, dp) - s(x);
      if (v > worst) {
        worst = v;
        active = x;
      }
    }
    Vec g(n);
    for (int i = 0; i < n; ++i) {
      Vec up = p, dn = p;
      up(i) = std::min(1.0, up(i) + h);
      dn(i) = std::max(0.0, dn(i) - h);
      const double du = up(i) - p(i), dd = p(i) - dn(i);
      g(i) = (loss.loss(active, Distribution(project_to_simplex(up))) -
              loss.loss(active, Distribution(project_to_simplex(dn)))) /
             std::max(du + dd, h);
    }
    p = project_to_simplex(p - (0.5 / std::sqrt(static_cast<double>(t))) * g);
    const double v = minmax_objective(loss, Distribution(p), s);
    if (v < best) {
      best = v;
      best_p = p;
    }
  }
  return Distribution(best_p);
}

}  // namespace

double brier_loss(int outcome, const Distribution& p) {
  check_outcome(outcome, p.dim());
  double acc = 0.0;
  for (int y = 0; y < p.dim(); ++y) {
    const double d = (y == outcome ? 1.0 : 0.0) - p[y];
    acc += d * d;
  }
  return acc;
}

double log_loss(int outcome, const Distribution& p) {
  check_outcome(outcome, p.dim());
  const double px = p[outcome];
  return px > 0.0 ? -std::log(px) : kInf;
}

LossSpec::LossSpec(int n, LossKind kind, Evaluator eval, HessianMode mode)
    : n_(n), kind_(kind), eval_(std::move(eval)), mode_(mode) {
  if (n_ < 2) throw DimensionError("LossSpec: need at least 2 outcomes");
}

LossSpec LossSpec::brier(int n_outcomes) {
  return LossSpec(n_outcomes, LossKind::Brier,
                  [](int x, const Distribution& p) { return brier_loss(x, p); },
                  HessianMode::Analytic);
}

LossSpec LossSpec::log(int n_outcomes) {
  return LossSpec(n_outcomes, LossKind::Log,
                  [](int x, const Distribution& p) { return log_loss(x, p); },
                  HessianMode::Analytic);
}

LossSpec LossSpec::custom(int n_outcomes, Evaluator eval, HessianMode mode) {
  LossSpec spec(n_outcomes, LossKind::Custom, std::move(eval), mode);
  const auto grid = interior_grid({n_outcomes, 13, 0.01});
  for (const auto& p : grid) {
    const double risk = spec.bayes_risk(p);
    for (const auto& q : grid) {
      double cross = 0.0;
      for (int x = 0; x < n_outcomes; ++x) {
        if (p[x] == 0.0) continue;
        cross += p[x] * spec.loss(x, q);
      }
      if (risk > cross + 1e-9)
        throw DomainError("LossSpec::custom: loss is not proper on the check grid");
    }
  }
  return spec;
}

double LossSpec::loss(int outcome, const Distribution& p) const {
  check_outcome(outcome, n_);
  if (p.dim() != n_) throw DimensionError("loss: action dimension mismatch");
  const double v = eval_(outcome, p);
  if (std::isnan(v) || v < 0.0) throw DomainError("loss: evaluator returned invalid value");
  return v;
}

Vec LossSpec::loss_profile(const Distribution& p) const {
  Vec out(n_);
  for (int x = 0; x < n_; ++x) out(x) = loss(x, p);
  return out;
}

Vec LossSpec::loss_row(int outcome, const std::vector<Distribution>& actions) const {
  Vec out(actions.size());
  for (size_t i = 0; i < actions.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = loss(outcome, actions[i]);
  return out;
}

double LossSpec::bayes_risk(const Distribution& p) const {
  double acc = 0.0;
  for (int x = 0; x < n_; ++x) {
    if (p[x] == 0.0) continue;  // 0 * inf = 0
    acc += p[x] * loss(x, p);
  }
  return acc;
}

Mat LossSpec::bayes_hessian_tilde(const TildePoint& pt) const {
  return bayes_hessian_tilde(pt, mode_);
}

Mat LossSpec::bayes_hessian_tilde(const TildePoint& pt, HessianMode mode) const {
  if (pt.dim_full() != n_) throw DimensionError("bayes_hessian_tilde: dimension mismatch");
  const int d = n_ - 1;
  const Vec& c = pt.coords();
  const double pn = pt.residual();
  const double minc = std::min(c.size() ? c.minCoeff() : 1.0, pn);
  if (minc < 1e-6)
    throw DomainError("bayes_hessian_tilde: point too close to the boundary");

  if (mode == HessianMode::Analytic) {
    switch (kind_) {
      case LossKind::Brier:
        return -2.0 * (Mat::Identity(d, d) + Mat::Ones(d, d));
      case LossKind::Log: {
        Mat h = Mat::Constant(d, d, -1.0 / pn);
        for (int i = 0; i < d; ++i) h(i, i) -= 1.0 / c(i);
        return h;
      }
      case LossKind::Custom:
        break;  // no analytic form; fall through to differences
    }
  }

  // Central second differences of the reduced Bayes risk, step 1e-5 shrunk
  // so every evaluation point keeps implied coordinates >= 1e-6.
  const double h = std::min(1e-5, (minc - 1e-6) / 2.0);
  if (h < 1e-9)
    throw DomainError("bayes_hessian_tilde: no room for finite differences");
  auto f = [&](const Vec& u) { return bayes_risk(amalg(TildePoint(u, n_))); };
  Mat out(d, d);
  const double f0 = f(c);
  for (int i = 0; i < d; ++i) {
    Vec up = c, dn = c;
    up(i) += h;
    dn(i) -= h;
    out(i, i) = (f(up) - 2.0 * f0 + f(dn)) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      Vec pp = c, pm = c, mp = c, mm = c;
      pp(i) += h; pp(j) += h;
      pm(i) += h; pm(j) -= h;
      mp(i) -= h; mp(j) += h;
      mm(i) -= h; mm(j) -= h;
      const double v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Distribution LossSpec::substitute(const Vec& s) const {
  if (s.size() != n_) throw DimensionError("substitute: dimension mismatch");
  for (Eigen::Index x = 0; x < s.size(); ++x)
    if (std::isnan(s(x)) || s(x) < 0.0)
      throw DomainError("substitute: generalized prediction entries must be >= 0");

  bool all_inf = true;
  for (Eigen::Index x = 0; x < s.size(); ++x) all_inf = all_inf && std::isinf(s(x));
  if (all_inf) return Distribution::uniform(n_);  // any action is dominated

  if (kind_ == LossKind::Log) {
    // a_x = e^{-s_x} / Z; on the superprediction set Z <= 1 and the
    // achieved min-max equals log Z.
    const double m = s.minCoeff();
    Vec e = (-(s.array() - m)).exp();
    const double zshift = e.sum();  // Z = e^{-m} * zshift
    const double logz = std::log(zshift) - m;
    if (logz > 1e-6)
      throw InfeasibleError("substitute: log-loss prediction outside the superprediction set");
    return Distribution(e / zshift);
  }

  Distribution a = n_ == 2   ? substitute_search_n2(*this, s)
                   : n_ == 3 ? substitute_search_n3(*this, s)
                             : substitute_search_projected(*this, s);
  if (minmax_objective(*this, a, s) > 1e-6)
    throw InfeasibleError("substitute: generalized prediction is not a superprediction");
  return a;
}

}  // namespace aggr
