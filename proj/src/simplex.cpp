#include "aggr/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace aggr {

namespace {
constexpr double kNegClamp = 1e-12;
constexpr double kSumTol = 1e-9;
}  // namespace

Distribution::Distribution(Vec weights) : w_(std::move(weights)) {
  if (w_.size() < 1) throw DimensionError("Distribution: dim must be >= 1");
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    if (std::isnan(w_(i))) throw DomainError("Distribution: NaN weight");
    if (w_(i) < 0.0) {
      if (w_(i) < -kNegClamp)
        throw DomainError("Distribution: negative weight " + std::to_string(w_(i)));
      w_(i) = 0.0;
    }
  }
  const double s = w_.sum();
  if (std::abs(s - 1.0) > kSumTol)
    throw DomainError("Distribution: weights sum to " + std::to_string(s));
  if (s != 1.0) w_ /= s;
}

Distribution Distribution::uniform(int dim) {
  if (dim < 1) throw DimensionError("uniform: dim must be >= 1");
  return Distribution(Vec::Constant(dim, 1.0 / dim));
}

Distribution Distribution::vertex(int dim, int index) {
  if (dim < 1) throw DimensionError("vertex: dim must be >= 1");
  if (index < 0 || index >= dim) throw IndexError("vertex: index out of range");
  Vec w = Vec::Zero(dim);
  w(index) = 1.0;
  return Distribution(std::move(w));
}

bool Distribution::is_vertex(int* which) const {
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    if (w_(i) == 1.0) {
      if (which) *which = static_cast<int>(i);
      return true;
    }
    if (w_(i) != 0.0) return false;
  }
  return false;
}

TildePoint::TildePoint(Vec coords, int dim_full)
    : c_(std::move(coords)), dim_full_(dim_full) {
  if (dim_full_ < 1) throw DimensionError("TildePoint: dim_full must be >= 1");
  if (c_.size() != dim_full_ - 1)
    throw DimensionError("TildePoint: coords must have dim_full-1 entries");
  for (Eigen::Index i = 0; i < c_.size(); ++i) {
    if (std::isnan(c_(i))) throw DomainError("TildePoint: NaN coordinate");
    if (c_(i) < 0.0) {
      if (c_(i) < -kNegClamp)
        throw DomainError("TildePoint: negative coordinate");
      c_(i) = 0.0;
    }
  }
  if (c_.sum() > 1.0 + kNegClamp)
    throw DomainError("TildePoint: coordinate sum exceeds 1");
}

Distribution amalg(const TildePoint& u) {
  const int m = u.dim_full();
  Vec w(m);
  w.head(m - 1) = u.coords();
  double r = 1.0 - u.coords().sum();
  if (r < 0.0) {
    if (r < -kNegClamp) throw DomainError("amalg: residual below -1e-12");
    r = 0.0;
  }
  w(m - 1) = r;
  return Distribution(std::move(w));
}

TildePoint project_tilde(const Distribution& p) {
  return TildePoint(p.weights().head(p.dim() - 1), p.dim());
}

Vec reduced_diff(const Vec& z) {
  const Eigen::Index m = z.size();
  return z.head(m - 1).array() - z(m - 1);
}

namespace {

void validate_grid(const SimplexGrid& grid) {
  const int m = grid.dim_full;
  if (m < 1) throw ConfigError("interior_grid: dim_full must be >= 1");
  if (m == 1) return;
  if (grid.resolution < 2) throw ConfigError("interior_grid: resolution must be >= 2");
  if (!(grid.epsilon > 0.0) || !(grid.epsilon < 1.0 / m))
    throw ConfigError("interior_grid: epsilon must lie in (0, 1/m)");
}

void enumerate_compositions(int part, int remaining, std::vector<int>& cur,
                            const SimplexGrid& grid, double* row, long& index,
                            const std::function<void(long, const double*)>& fn) {
  const int m = grid.dim_full;
  if (part == m - 1) {
    cur.push_back(remaining);
    const double span = 1.0 - m * grid.epsilon;
    const int denom = grid.resolution - 1;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      row[i] = grid.epsilon + span * (static_cast<double>(cur[i]) / denom);
      sum += row[i];
    }
    for (int i = 0; i < m; ++i) row[i] /= sum;
    fn(index++, row);
    cur.pop_back();
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    cur.push_back(c);
    enumerate_compositions(part + 1, remaining - c, cur, grid, row, index, fn);
    cur.pop_back();
  }
}

}  // namespace

void for_each_grid_point(const SimplexGrid& grid,
                         const std::function<void(long, const double*)>& fn) {
  validate_grid(grid);
  if (grid.dim_full == 1) {
    const double one = 1.0;
    fn(0, &one);
    return;
  }
  std::vector<int> cur;
  std::vector<double> row(static_cast<size_t>(grid.dim_full));
  long index = 0;
  enumerate_compositions(0, grid.resolution - 1, cur, grid, row.data(), index, fn);
}

long interior_grid_size(const SimplexGrid& grid) {
  validate_grid(grid);
  if (grid.dim_full == 1) return 1;
  // C(resolution - 1 + m - 1, m - 1) compositions
  long n = 1;
  for (int i = 1; i <= grid.dim_full - 1; ++i)
    n = n * (grid.resolution - 1 + i) / i;
  return n;
}

Vec project_to_simplex(const Vec& z) {
  const Eigen::Index m = z.size();
  std::vector<double> u(z.data(), z.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  return (z.array() - tau).cwiseMax(0.0);
}

std::vector<Distribution> interior_grid(const SimplexGrid& grid) {
  std::vector<Distribution> out;
  out.reserve(static_cast<size_t>(interior_grid_size(grid)));
  for_each_grid_point(grid, [&](long, const double* w) {
    out.push_back(Distribution(Eigen::Map<const Vec>(w, grid.dim_full)));
  });
  return out;
}

}  // namespace aggr
