#include "opcert/funcspace.hpp"

#include <cmath>

namespace opcert {

RVector Grid::nodes() const {
  RVector x(n_points);
  for (int j = 0; j < n_points; ++j) x[j] = node(j);
  return x;
}

Grid make_grid(double half_width, int n_points) {
  if (!(half_width > 0.0)) throw PreconditionError("make_grid: half_width must be positive");
  if (n_points < 3) throw PreconditionError("make_grid: need at least 3 points");
  if (n_points % 2 == 0) throw PreconditionError("make_grid: n_points must be odd");
  Grid g;
  g.half_width = half_width;
  g.n_points = n_points;
  g.spacing = 2.0 * half_width / (n_points - 1);
  return g;
}

Grid refine(const Grid& g) { return make_grid(g.half_width, 2 * g.n_points - 1); }

bool GridFunction::is_real(double tol) const {
  for (int j = 0; j < values.size(); ++j)
    if (std::abs(values[j].imag()) > tol) return false;
  return true;
}

RVector GridFunction::real_values() const {
  RVector r(values.size());
  for (int j = 0; j < values.size(); ++j) r[j] = values[j].real();
  return r;
}

GridFunction sample(const std::function<Complex(double)>& f, const Grid& g) {
  GridFunction u;
  u.grid = g;
  u.values.resize(g.n_points);
  for (int j = 0; j < g.n_points; ++j) {
    Complex v = f(g.node(j));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw PreconditionError("sample: non-finite value at node x=" + std::to_string(g.node(j)));
    u.values[j] = v;
  }
  return u;
}

GridFunction sample_real(const std::function<double(double)>& f, const Grid& g) {
  return sample([&f](double x) { return Complex(f(x), 0.0); }, g);
}

Complex inner(const GridFunction& u, const GridFunction& v) {
  if (!(u.grid == v.grid)) throw PreconditionError("inner: grid mismatch");
  const int n = u.grid.n_points;
  const double h = u.grid.spacing;
  Complex acc(0.0, 0.0);
  for (int j = 0; j < n; ++j) {
    double w = (j == 0 || j == n - 1) ? 0.5 * h : h;
    acc += w * std::conj(u.values[j]) * v.values[j];
  }
  return acc;
}

double norm_sq(const GridFunction& u) { return inner(u, u).real(); }

double tail_mass(const GridFunction& u, double R) {
  const Grid& g = u.grid;
  if (R < 0.0 || R > g.half_width) throw PreconditionError("tail_mass: R out of [0, half_width]");
  const int n = g.n_points;
  const double h = g.spacing;
  // Per-node weight: trapezoid on each tail segment; a node that is the inner
  // endpoint of a tail gets h/2 per incident tail, so R = 0 reproduces the
  // inner(u,u) weights node for node.
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    double ax = std::abs(g.node(j));
    if (ax < R) continue;
    double w;
    if (ax == R) {
      w = (R == 0.0) ? h : 0.5 * h;
    } else {
      w = (j == 0 || j == n - 1) ? 0.5 * h : h;
      // first included node per side acts as segment endpoint
      bool inner_edge = false;
      if (j > 0 && j < n - 1) {
        double prev = std::abs(g.node(g.node(j) > 0 ? j - 1 : j + 1));
        inner_edge = prev < R;
      }
      if (inner_edge) w = 0.5 * h;
    }
    acc += w * std::norm(u.values[j]);
  }
  return acc;
}

}  // namespace opcert
