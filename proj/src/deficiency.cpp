#include "opcert/deficiency.hpp"

#include <algorithm>
#include <cmath>

namespace opcert {

std::string to_string(EndpointClass c) {
  switch (c) {
    case EndpointClass::regular: return "regular";
    case EndpointClass::limit_point: return "limit_point";
    case EndpointClass::limit_circle: return "limit_circle";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Rhs = std::function<void(double, const RVector&, RVector&)>;

// Dormand-Prince 5(4) adaptive step from x to x_end.
void rk45(const Rhs& f, double x0, double x1, RVector& y, double tol) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                      e6 = 22.0 / 525, e7 = -1.0 / 40;

  const int dir = (x1 >= x0) ? 1 : -1;
  double x = x0;
  double hstep = dir * std::min(0.1, std::abs(x1 - x0));
  const int dim = static_cast<int>(y.size());
  RVector k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), yt(dim), y5(dim);
  f(x, y, k1);
  int steps = 0;
  while (dir * (x1 - x) > 0.0) {
    if (++steps > 20'000'000) throw NumericalError("rk45: step budget exhausted");
    if (dir * (x + hstep - x1) > 0.0) hstep = x1 - x;
    yt = y + hstep * a21 * k1;
    f(x + c2 * hstep, yt, k2);
    yt = y + hstep * (a31 * k1 + a32 * k2);
    f(x + c3 * hstep, yt, k3);
    yt = y + hstep * (a41 * k1 + a42 * k2 + a43 * k3);
    f(x + c4 * hstep, yt, k4);
    yt = y + hstep * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(x + c5 * hstep, yt, k5);
    yt = y + hstep * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(x + hstep, yt, k6);
    y5 = y + hstep * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(x + hstep, y5, k7);
    RVector err = hstep * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double sc = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double s = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      sc = std::max(sc, std::abs(err[i]) / s);
    }
    if (sc <= 1.0) {
      x += hstep;
      y = y5;
      k1 = k7;
    }
    double fac = 0.9 * std::pow(std::max(sc, 1e-10), -0.2);
    fac = std::min(5.0, std::max(0.2, fac));
    hstep *= fac;
    if (std::abs(hstep) < 1e-14 * std::max(1.0, std::abs(x)))
      throw NumericalError("rk45: step size underflow");
  }
}

double checked_eval(const std::function<double(double)>& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v))
    throw PreconditionError("potential not evaluable (non-finite) at x=" + std::to_string(x));
  return v;
}

// One half-line shoot toward an endpoint at distance r_max from the anchor.
// Returns per-window log-masses of |u|^2 with per-window renormalization:
// only ratios are meaningful.
struct WindowTrace {
  std::vector<double> log_mass;
};

// First-order equation (i u' + f u) = s i u, integrated in log-polar form:
// the modulus satisfies (log|u|)' = s exactly, the potential enters the phase
// only. Each window is integrated in the local parameter t in [0, W] with
// x = xa + dir * t. State: [log|u| relative to the window start, window mass].
WindowTrace shoot_first_order(const ContinuumOp& op, int sign, double anchor, int dir,
                              const IntegrationParams& p) {
  WindowTrace tr;
  const int n_windows = std::max(4, static_cast<int>(std::ceil(p.r_max / p.window)));
  double log_amp = 0.0;  // cumulative log|u| at the current window start
  for (int w = 0; w < n_windows; ++w) {
    const double xa = anchor + dir * w * p.window;
    RVector y = RVector::Zero(2);
    auto rhs = [&](double t, const RVector& s, RVector& ds) {
      checked_eval(op.potential, xa + dir * t);  // evaluability; enters the phase only
      ds[0] = sign * dir;
      ds[1] = std::exp(2.0 * s[0]);
    };
    rk45(rhs, 0.0, p.window, y, p.ode_tolerance);
    tr.log_mass.push_back(std::log(std::max(y[1], 1e-300)) + 2.0 * log_amp);
    log_amp += y[0];
  }
  return tr;
}

// Sturm-Liouville (-u'' + V u) = s i u. State: [Re u, Im u, Re u', Im u',
// window mass]; the solution is renormalized at every window boundary so
// super-exponential growth only moves the log ledger, never overflows.
WindowTrace shoot_sturm_liouville(const ContinuumOp& op, int sign, double anchor, int dir,
                                  RVector init, const IntegrationParams& p) {
  WindowTrace tr;
  const int n_windows = std::max(4, static_cast<int>(std::ceil(p.r_max / p.window)));
  RVector y(5);
  y << init[0], init[1], init[2], init[3], 0.0;
  double log_scale = 0.0;
  for (int w = 0; w < n_windows; ++w) {
    const double xa = anchor + dir * w * p.window;
    y[4] = 0.0;
    auto rhs = [&](double t, const RVector& s, RVector& ds) {
      const double v = checked_eval(op.potential, xa + dir * t);
      // d/dt = dir * d/dx
      ds[0] = dir * s[2];
      ds[1] = dir * s[3];
      ds[2] = dir * (v * s[0] + sign * s[1]);
      ds[3] = dir * (v * s[1] - sign * s[0]);
      ds[4] = s[0] * s[0] + s[1] * s[1];
    };
    rk45(rhs, 0.0, p.window, y, p.ode_tolerance);
    tr.log_mass.push_back(std::log(std::max(y[4], 1e-300)) + 2.0 * log_scale);
    const double amp = std::max(std::max(std::abs(y[0]), std::abs(y[1])),
                                std::max(std::abs(y[2]), std::abs(y[3])));
    if (amp > 0.0) {
      log_scale += std::log(amp);
      y.head(4) /= amp;
    }
  }
  return tr;
}

// Geometric tail test on the last three window ratios.
// ratio <= 0.9 for all three: square-integrable; ratio >= 1.02 for any:
// not square-integrable; otherwise inconclusive.
bool classify_l2(const WindowTrace& tr, TailDiagnostics& diag) {
  const int n = static_cast<int>(tr.log_mass.size());
  if (n < 4) throw InconclusiveError("tail classification needs at least 4 windows");
  diag.log_window_mass = tr.log_mass;
  bool all_decay = true, any_grow = false;
  for (int i = n - 3; i < n; ++i) {
    const double ratio = std::exp(tr.log_mass[i] - tr.log_mass[i - 1]);
    diag.last_ratios.push_back(ratio);
    if (!(ratio <= 0.9)) all_decay = false;
    if (ratio >= 1.02) any_grow = true;
  }
  if (all_decay) {
    diag.square_integrable = true;
    return true;
  }
  if (any_grow) {
    diag.square_integrable = false;
    return false;
  }
  throw InconclusiveError("tail ratios in the inconclusive band (0.9, 1.02); increase r_max");
}

// Number of linearly independent solutions of (tau - s*i) u = 0 that are
// square-integrable near the given endpoint.
int l2_count_at_end(const ContinuumOp& op, int sign, bool right_end, const IntegrationParams& p,
                    std::vector<TailDiagnostics>& diags) {
  const double endpoint = right_end ? op.b : op.a;
  const int dir = right_end ? +1 : -1;
  const std::string side = right_end ? "right" : "left";
  const std::string sgn = (sign > 0) ? "+i" : "-i";

  if (std::isfinite(endpoint)) {
    // Regular endpoint: potential bounded near it forces the limit-circle
    // alternative, every solution is L^2 near a finite regular endpoint.
    const double other = right_end ? op.a : op.b;
    const double inner = std::isfinite(other) ? 0.5 * (endpoint + other) : endpoint - dir;
    for (int i = 1; i <= 16; ++i) {
      const double x = endpoint + (inner - endpoint) * (i / 16.0);
      checked_eval(op.potential, x);
    }
    return (op.kind == ContinuumKind::first_order_iddx_plus_f) ? 1 : 2;
  }

  // anchor inside the interval (the endpoint under study is infinite here)
  double anchor = 0.0;
  if (std::isfinite(op.a)) anchor = op.a + 1.0;
  if (std::isfinite(op.b)) anchor = op.b - 1.0;

  if (op.kind == ContinuumKind::first_order_iddx_plus_f) {
    WindowTrace tr = shoot_first_order(op, sign, anchor, dir, p);
    TailDiagnostics d;
    d.which = side + "," + sgn + ",sol0";
    const bool l2 = classify_l2(tr, d);
    diags.push_back(d);
    return l2 ? 1 : 0;
  }

  // Sturm-Liouville: integrate two independent solutions; all of them are
  // L^2 iff the generic (dominant) one is, and at least one always is (Weyl).
  int both = 0;
  for (int s0 = 0; s0 < 2; ++s0) {
    RVector init(4);
    init << (s0 == 0 ? 1.0 : 0.0), 0.0, (s0 == 0 ? 0.0 : 1.0), 0.0;
    WindowTrace tr = shoot_sturm_liouville(op, sign, anchor, dir, init, p);
    TailDiagnostics d;
    d.which = side + "," + sgn + ",sol" + std::to_string(s0);
    if (classify_l2(tr, d)) ++both;
    diags.push_back(d);
  }
  return (both == 2) ? 2 : 1;
}

}  // namespace

DeficiencyReport deficiency_indices(const ContinuumOp& op, const IntegrationParams& p) {
  if (p.r_max < 10.0) throw PreconditionError("deficiency_indices: r_max must be >= 10");
  if (!(op.a < op.b)) throw PreconditionError("deficiency_indices: empty interval");

  DeficiencyReport rep;
  rep.operator_label = (op.kind == ContinuumKind::first_order_iddx_plus_f)
                           ? ("i d/dx + " + op.potential_label)
                           : ("-d2/dx2 + " + op.potential_label);
  const int order = (op.kind == ContinuumKind::first_order_iddx_plus_f) ? 1 : 2;

  int d_left[2], d_right[2];  // per sign {+i, -i}
  for (int si = 0; si < 2; ++si) {
    const int sign = (si == 0) ? +1 : -1;
    d_left[si] = l2_count_at_end(op, sign, /*right=*/false, p, rep.tails);
    d_right[si] = l2_count_at_end(op, sign, /*right=*/true, p, rep.tails);
  }

  auto classify_end = [&](int d_plus, int d_minus, double endpoint) -> EndpointClass {
    if (std::isfinite(endpoint)) return EndpointClass::regular;
    const int dmax = std::max(d_plus, d_minus);
    if (order == 1) return (d_plus + d_minus >= 2) ? EndpointClass::limit_circle : EndpointClass::limit_point;
    return (dmax == 2) ? EndpointClass::limit_circle : EndpointClass::limit_point;
  };
  rep.left_class = classify_end(d_left[0], d_left[1], op.a);
  rep.right_class = classify_end(d_right[0], d_right[1], op.b);

  rep.n_plus = std::max(0, d_left[0] + d_right[0] - order);
  rep.n_minus = std::max(0, d_left[1] + d_right[1] - order);

  if (order == 2 && rep.n_plus != rep.n_minus)
    throw InconclusiveError("Sturm-Liouville conjugation symmetry violated: n+ != n-");
  rep.esa = (rep.n_plus == 0 && rep.n_minus == 0);
  return rep;
}

bool esa_verdict(const ContinuumOp& op, const IntegrationParams& p) {
  return deficiency_indices(op, p).esa;
}

std::vector<SweepRow> perturbation_sweep(const ContinuumOp& base,
                                         const std::vector<NamedPotential>& potentials,
                                         const IntegrationParams& p, int jobs) {
  std::vector<SweepRow> rows(potentials.size());
  parallel_for(static_cast<int>(potentials.size()), jobs, [&](int i) {
    ContinuumOp op = base;
    op.potential = potentials[i].fn;
    op.potential_label = potentials[i].label;
    rows[i].potential_label = potentials[i].label;
    try {
      // local boundedness validated on windows: evaluability checks run
      // during the shoot itself
      rows[i].report = deficiency_indices(op, p);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  return rows;
}

}  // namespace opcert
