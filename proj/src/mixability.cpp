#include "aggr/mixability.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace aggr {

namespace {

// Indexed min scan with a serial reference and an OpenMP kernel. Ties break
// to the lowest index in both paths, so the results are identical.
template <typename F>
std::pair<double, long> scan_min_indexed(long n, F&& f, Execution exec) {
  double best = kInf;
  long best_idx = -1;
#ifdef AGGR_HAVE_OPENMP
  if (exec == Execution::Parallel) {
#pragma omp parallel
    {
      double loc = kInf;
      long loc_idx = -1;
#pragma omp for nowait
      for (long i = 0; i < n; ++i) {
        const double v = f(i);
        if (v < loc || (v == loc && i < loc_idx)) {
          loc = v;
          loc_idx = i;
        }
      }
#pragma omp critical
      {
        if (loc_idx >= 0 &&
            (best_idx < 0 || loc < best || (loc == best && loc_idx < best_idx))) {
          best = loc;
          best_idx = loc_idx;
        }
      }
    }
    return {best, best_idx};
  }
#else
  (void)exec;
#endif
  for (long i = 0; i < n; ++i) {
    const double v = f(i);
    if (v < best) {
      best = v;
      best_idx = i;
    }
  }
  return {best, best_idx};
}

bool is_shannon_family(const Entropy& phi) {
  return phi.kind() == EntropyKind::Shannon || phi.kind() == EntropyKind::ScaledShannon;
}

// Folds the scale of s*S into the learning rate: D_{sS} = s * D_S.
double effective_eta(const Entropy& phi, double eta) {
  return eta / phi.scale();
}

MixValue mix_shannon(double eta, const Vec& d, const Distribution& q) {
  const int k = q.dim();
  double dmin = kInf;
  for (int i = 0; i < k; ++i)
    if (q[i] > 0.0 && d(i) < dmin) dmin = d(i);
  if (std::isinf(dmin)) return {kInf, q};

  double z = 0.0;
  Vec w = Vec::Zero(k);
  for (int i = 0; i < k; ++i) {
    if (q[i] == 0.0) continue;
    const double e = std::isinf(d(i)) ? 0.0 : std::exp(-eta * (d(i) - dmin));
    w(i) = q[i] * e;
    z += w(i);
  }
  return {dmin - std::log(z) / eta, Distribution(w / z)};
}

// -H L~_log(p~) = Diag(1/p~) + (1/p_n) 11^T, shared by the constant scans.
Mat neg_log_loss_hessian(const TildePoint& pt) {
  const int d = pt.dim_full() - 1;
  Mat a = Mat::Constant(d, d, 1.0 / pt.residual());
  for (int i = 0; i < d; ++i) a(i, i) += 1.0 / pt.coords()(i);
  return a;
}

// lambda_max of A^{-1} B through the congruence G^{-1} B G^{-1}, G = A^{1/2}.
double pencil_lambda_max(const Mat& a, const Mat& b) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw LinAlgError("pencil_lambda_max: base Hessian is not positive definite");
  const Mat isqrt = es.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<Mat> em(isqrt * b * isqrt);
  return em.eigenvalues().maxCoeff();
}

double pencil_lambda_min(const Mat& m_sqrt_outer, const Mat& inner) {
  Eigen::SelfAdjointEigenSolver<Mat> em(m_sqrt_outer * inner * m_sqrt_outer);
  return em.eigenvalues().minCoeff();
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Mixable: return "Mixable";
    case Verdict::NotMixable: return "NotMixable";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

MixValue mix_via_dual(const Entropy& phi, double eta, const Vec& d, const Distribution& q) {
  if (!q.interior())
    throw DomainError("mix_via_dual: the prior must be interior");
  const int k = q.dim();
  const TildePoint qt = project_tilde(q);
  const Vec w0 = phi.tilde_gradient(qt);
  // First dual term is exact by Fenchel inversion at w0 = grad phi~(q~).
  const double first = qt.coords().dot(w0) - phi.value(q);
  const TildeDual shifted = tilde_dual(phi, w0 - eta * reduced_diff(d));
  return {d(k - 1) + (first - shifted.value) / eta,
          amalg(TildePoint(shifted.argmax, k))};
}

MixValue mix(const Entropy& phi, double eta, const Vec& d, const Distribution& q) {
  if (!(eta > 0.0)) throw ConfigError("mix: eta must be > 0");
  if (d.size() != q.dim() || q.dim() != phi.dim())
    throw DimensionError("mix: dimension mismatch");
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (std::isnan(d(i)) || d(i) < 0.0)
      throw DomainError("mix: losses must be nonnegative");

  if (is_shannon_family(phi)) return mix_shannon(effective_eta(phi, eta), d, q);

  int vertex_of = -1;
  if (q.is_vertex(&vertex_of)) {
    if (!phi.boundary_steep())
      throw DomainError("mix: boundary prior with a non-steep entropy");
    return {d(vertex_of), Distribution::vertex(q.dim(), vertex_of)};
  }

  std::vector<int> active;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!std::isinf(d(i))) active.push_back(static_cast<int>(i));
  if (active.empty()) return {kInf, q};

  if (static_cast<int>(active.size()) == q.dim()) {
    if (!q.interior())
      throw DomainError("mix: boundary non-vertex prior with a generic entropy");
    return mix_via_dual(phi, eta, d, q);
  }

  // Drop experts with infinite loss; the prior must stay interior on the
  // surviving face after renormalization.
  Vec df(active.size()), qf(active.size());
  double mass = 0.0;
  for (size_t i = 0; i < active.size(); ++i) {
    df(static_cast<Eigen::Index>(i)) = d(active[i]);
    qf(static_cast<Eigen::Index>(i)) = q[active[i]];
    mass += q[active[i]];
  }
  if (qf.minCoeff() <= 0.0 || mass <= 0.0)
    throw DomainError("mix: surviving experts do not keep the prior interior");
  const Entropy face = phi.face_restrict(static_cast<int>(active.size()));
  MixValue inner = mix(face, eta, df, Distribution(qf / mass));
  Vec full = Vec::Zero(q.dim());
  for (size_t i = 0; i < active.size(); ++i)
    full(active[i]) = inner.minimizer[static_cast<int>(i)];
  return {inner.value, Distribution(full)};
}

BruteForceOracle::BruteForceOracle(const Entropy& phi, int resolution, double epsilon)
    : phi_(phi), grid_({phi.dim(), resolution, epsilon}) {
  const int k = phi_.dim();
  const long grid_points = interior_grid_size(grid_);
  count_ = grid_points + k;
  weights_.resize(static_cast<size_t>(count_) * k);
  for_each_grid_point(grid_, [&](long i, const double* w) {
    std::copy(w, w + k, weights_.begin() + static_cast<size_t>(i) * k);
  });
  for (int v = 0; v < k; ++v) {
    double* row = weights_.data() + static_cast<size_t>(grid_points + v) * k;
    std::fill(row, row + k, 0.0);
    row[v] = 1.0;
  }

  phi_values_.resize(static_cast<size_t>(count_));
#ifdef AGGR_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long i = 0; i < count_; ++i) {
    const double* row = weights_.data() + static_cast<size_t>(i) * k;
    phi_values_[static_cast<size_t>(i)] =
        phi_.value(Distribution(Eigen::Map<const Vec>(row, k)));
  }
}

double BruteForceOracle::value(double eta, const Vec& d, const Distribution& q,
                               Execution exec) const {
  if (!(eta > 0.0)) throw ConfigError("BruteForceOracle: eta must be > 0");
  const int k = phi_.dim();
  if (d.size() != k || q.dim() != k)
    throw DimensionError("BruteForceOracle: dimension mismatch");

  bool has_inf = false;
  for (int j = 0; j < k; ++j) has_inf = has_inf || std::isinf(d(j));

  if (q.interior()) {
    // div(mu) = phi(mu) - c0 - <g, mu~> with c0 = phi(q) - <g, q~>
    const TildePoint qt = project_tilde(q);
    const Vec g = phi_.tilde_gradient(qt);
    const double c0 = phi_.value(q) - g.dot(qt.coords());
    auto objective = [&](long i) {
      const double* mu = weights_.data() + static_cast<size_t>(i) * k;
      double lin = 0.0, gdot = 0.0;
      for (int j = 0; j < k; ++j) {
        if (mu[j] != 0.0) {
          lin += mu[j] * d(j);  // 0 * inf = 0
          if (std::isinf(lin)) return kInf;
        }
        if (j < k - 1) gdot += g(j) * mu[j];
      }
      return lin + (phi_values_[static_cast<size_t>(i)] - c0 - gdot) / eta;
    };
    if (has_inf) return scan_min_indexed(count_, objective, exec).first;
    // finite-loss fast path without per-term branching
    auto fast = [&](long i) {
      const double* mu = weights_.data() + static_cast<size_t>(i) * k;
      double lin = 0.0, gdot = 0.0;
      for (int j = 0; j < k - 1; ++j) {
        lin += mu[j] * d(j);
        gdot += g(j) * mu[j];
      }
      lin += mu[k - 1] * d(k - 1);
      return lin + (phi_values_[static_cast<size_t>(i)] - c0 - gdot) / eta;
    };
    return scan_min_indexed(count_, fast, exec).first;
  }

  // Boundary priors fall back to the full divergence per candidate.
  auto slow = [&](long i) {
    const double* mu = weights_.data() + static_cast<size_t>(i) * k;
    double lin = 0.0;
    for (int j = 0; j < k; ++j) {
      if (mu[j] == 0.0) continue;
      lin += mu[j] * d(j);
      if (std::isinf(lin)) return kInf;
    }
    const double div = phi_.divergence(Distribution(Eigen::Map<const Vec>(mu, k)), q);
    return lin + div / eta;
  };
  return scan_min_indexed(count_, slow, exec).first;
}

double mix_bruteforce(const Entropy& phi, double eta, const Vec& d,
                      const Distribution& q, int resolution, double epsilon,
                      Execution exec) {
  return BruteForceOracle(phi, resolution, epsilon).value(eta, d, q, exec);
}

double mixability_constant(const LossSpec& loss, const SimplexGrid& grid, Execution exec) {
  // The log loss pencil is the identity: eta_lower = 1 exactly.
  if (loss.kind() == LossKind::Log) return 1.0;

  const auto points = interior_grid(grid.with_dim(loss.outcomes()));
  auto candidate = [&](long i) {
    const TildePoint pt = project_tilde(points[static_cast<size_t>(i)]);
    const Mat a = neg_log_loss_hessian(pt);
    const Mat b = -loss.bayes_hessian_tilde(pt);
    const double lmax = pencil_lambda_max(a, b);
    if (lmax <= 0.0) return -kInf;  // degenerate pencil; flag via -inf
    return 1.0 / lmax;
  };
  const double best = scan_min_indexed(static_cast<long>(points.size()), candidate, exec).first;
  return std::isinf(best) ? 0.0 : best;
}

double generalized_mixability_constant(const LossSpec& loss, const Entropy& phi,
                                       const SimplexGrid& loss_grid,
                                       const SimplexGrid& entropy_grid,
                                       Execution exec) {
  const double eta_lower = mixability_constant(loss, loss_grid, exec);
  // The Shannon family has H phi~ (H S~)^{-1} = scale * I everywhere.
  if (is_shannon_family(phi)) return eta_lower * phi.scale();

  const auto points = interior_grid(entropy_grid.with_dim(phi.dim()));
  auto candidate = [&](long i) {
    const TildePoint qt = project_tilde(points[static_cast<size_t>(i)]);
    const Vec& c = qt.coords();
    Mat m = -c * c.transpose();
    for (Eigen::Index j = 0; j < c.size(); ++j) m(j, j) += c(j);
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw LinAlgError("generalized_mixability_constant: singular Shannon inverse");
    return pencil_lambda_min(es.operatorSqrt(), phi.tilde_hessian(qt));
  };
  const double inf_ratio =
      scan_min_indexed(static_cast<long>(points.size()), candidate, exec).first;
  return eta_lower * std::max(0.0, inf_ratio);
}

namespace {

double convexity_margin_scan(double eta_lower, const Entropy& phi,
                             const SimplexGrid& entropy_grid, Execution exec) {
  const Entropy shan = Entropy::shannon(phi.dim());
  const auto points = interior_grid(entropy_grid.with_dim(phi.dim()));
  auto margin = [&](long i) {
    const TildePoint qt = project_tilde(points[static_cast<size_t>(i)]);
    const Mat h = eta_lower * phi.tilde_hessian(qt) - shan.tilde_hessian(qt);
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    return es.eigenvalues().minCoeff();
  };
  return scan_min_indexed(static_cast<long>(points.size()), margin, exec).first;
}

}  // namespace

MixabilityCertificate certify_phi_mixable(const LossSpec& loss, const Entropy& phi,
                                          const SimplexGrid& loss_grid,
                                          const SimplexGrid& entropy_grid,
                                          Execution exec) {
  MixabilityCertificate cert;
  cert.loss_grid = loss_grid.with_dim(loss.outcomes());
  cert.entropy_grid = entropy_grid.with_dim(phi.dim());
  cert.eta_lower = mixability_constant(loss, loss_grid, exec);
  cert.eta_phi = generalized_mixability_constant(loss, phi, loss_grid, entropy_grid, exec);
  cert.convexity_margin = convexity_margin_scan(cert.eta_lower, phi, entropy_grid, exec);

  // Refinement stability on the nested grid (2R-1 halves the spacing and
  // keeps every point of the R grid).
  SimplexGrid refined = entropy_grid;
  refined.resolution = 2 * entropy_grid.resolution - 1;
  cert.refined_margin = convexity_margin_scan(cert.eta_lower, phi, refined, exec);

  if (std::abs(cert.refined_margin - cert.convexity_margin) >= 1e-3 &&
      std::abs(cert.refined_margin - cert.convexity_margin) >=
          1e-3 * std::abs(cert.convexity_margin)) {
    cert.verdict = Verdict::Inconclusive;
  } else if (cert.eta_lower > 0.0 && cert.convexity_margin >= -1e-8) {
    cert.verdict = Verdict::Mixable;
  } else {
    cert.verdict = Verdict::NotMixable;
  }
  return cert;
}

RegretBound regret_bound(const Entropy& phi, double eta_phi, int k,
                         const SimplexGrid& grid, Execution exec) {
  if (!(eta_phi > 0.0)) throw ConfigError("regret_bound: eta_phi must be > 0");
  if (phi.dim() != k) throw DimensionError("regret_bound: dimension mismatch");

  if (is_shannon_family(phi)) {
    // D_{sS}(e_theta, uniform) = s log k, minimized at the uniform prior.
    return {phi.scale() * std::log(static_cast<double>(k)) / eta_phi,
            Distribution::uniform(k)};
  }

  const auto points = interior_grid(grid.with_dim(k));
  std::vector<Distribution> vertices;
  for (int t = 0; t < k; ++t) vertices.push_back(Distribution::vertex(k, t));
  auto worst_div = [&](long i) {
    const Distribution& q = points[static_cast<size_t>(i)];
    double worst = 0.0;
    for (int t = 0; t < k; ++t) worst = std::max(worst, phi.divergence(vertices[t], q));
    return worst;
  };
  const auto [value, idx] = scan_min_indexed(static_cast<long>(points.size()), worst_div, exec);
  return {value / eta_phi, points[static_cast<size_t>(idx)]};
}

}  // namespace aggr
