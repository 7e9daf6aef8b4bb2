#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "aggr/errors.hpp"

namespace aggr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point of the probability simplex. Weights are nonnegative and sum to 1;
/// construction renormalizes drift up to 1e-9 and rejects anything larger.
class Distribution {
 public:
  explicit Distribution(Vec weights);

  static Distribution uniform(int dim);
  static Distribution vertex(int dim, int index);

  const Vec& weights() const { return w_; }
  int dim() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_(i); }
  double min_coord() const { return w_.minCoeff(); }
  bool interior() const { return w_.minCoeff() > 0.0; }

  // Vertex test is exact: a single coordinate carrying all the mass.
  bool is_vertex(int* which = nullptr) const;

 private:
  Vec w_;
};

/// Reduced coordinates: the first dim_full-1 weights of a distribution.
class TildePoint {
 public:
  TildePoint(Vec coords, int dim_full);

  const Vec& coords() const { return c_; }
  int dim_full() const { return dim_full_; }
  int dim_reduced() const { return dim_full_ - 1; }
  double residual() const { return 1.0 - c_.sum(); }

 private:
  Vec c_;
  int dim_full_;
};

/// Affine embedding of reduced coordinates back into the simplex:
/// [u_1,...,u_{m-1}, 1 - sum u_i], with the residual clamped at 0 when it
/// lies in [-1e-12, 0).
Distribution amalg(const TildePoint& u);

/// Drops the last coordinate. amalg(project_tilde(p)) == p exactly.
TildePoint project_tilde(const Distribution& p);

/// J_m^T z for the embedding Jacobian J_m = [I; -1^T]: (z_i - z_m)_{i<m}.
Vec reduced_diff(const Vec& z);

struct SimplexGrid {
  int dim_full = 2;
  int resolution = 2;     // points per axis
  double epsilon = 1e-4;  // interior margin: every coordinate >= epsilon

  SimplexGrid with_dim(int m) const { return {m, resolution, epsilon}; }
};

/// Deterministic enumeration of the epsilon-shrunk simplex: integer
/// compositions of resolution-1 parts mapped affinely so that for m=2 the
/// points are `resolution` evenly spaced values on [epsilon, 1-epsilon].
std::vector<Distribution> interior_grid(const SimplexGrid& grid);

/// Number of points interior_grid produces without materializing them.
long interior_grid_size(const SimplexGrid& grid);

/// Streams the same points in the same order as row buffers of length
/// dim_full, without allocating per-point vectors.
void for_each_grid_point(const SimplexGrid& grid,
                         const std::function<void(long index, const double* weights)>& fn);

/// Euclidean projection onto the probability simplex (sort-based, exact).
Vec project_to_simplex(const Vec& z);

}  // namespace aggr
