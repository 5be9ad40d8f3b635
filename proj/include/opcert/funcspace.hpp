#pragma once

#include <functional>

#include "opcert/common.hpp"

namespace opcert {

// Uniform grid on [-L, L] with an odd number of nodes, so the origin is a
// node and x -> -x is an exact grid symmetry. Nodes are x_j = -L + j*spacing,
// evaluated symmetrically about the centre so that x_mid == 0 and
// x_{mid+t} == -x_{mid-t} hold bit for bit.
struct Grid {
  double half_width = 0.0;
  int n_points = 0;
  double spacing = 0.0;

  double node(int j) const { return spacing * (j - (n_points - 1) / 2); }
  RVector nodes() const;

  bool operator==(const Grid& o) const {
    return half_width == o.half_width && n_points == o.n_points;
  }
};

Grid make_grid(double half_width, int n_points);

// Halve the spacing, keep [-L, L]. n -> 2n - 1 stays odd.
Grid refine(const Grid& g);

// A sampled complex function. Values are stored dense; compact support is
// represented by exact zeros.
struct GridFunction {
  Grid grid;
  CVector values;

  bool is_real(double tol = 0.0) const;
  RVector real_values() const;
};

GridFunction sample(const std::function<Complex(double)>& f, const Grid& g);
GridFunction sample_real(const std::function<double(double)>& f, const Grid& g);

// Trapezoid-weighted Hermitian inner product: sum_j w_j conj(u_j) v_j with
// w_j = spacing except half weight at the two boundary nodes.
Complex inner(const GridFunction& u, const GridFunction& v);

double norm_sq(const GridFunction& u);

// Quadrature of |u|^2 over |x| > R, trapezoid on the included node range.
// tail_mass(u, 0) accumulates exactly the same weighted sum as inner(u, u).
double tail_mass(const GridFunction& u, double R);

}  // namespace opcert
