#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "opcert/common.hpp"

namespace opcert {

// Continuum 1D symmetric operators. Deficiency indices are computed here, on
// the continuum, never from truncated matrices: a finite Hermitian matrix has
// indices (0, 0) unconditionally and would trivialize every test.
enum class ContinuumKind { first_order_iddx_plus_f, sturm_liouville_minus_dxx_plus_V };

struct ContinuumOp {
  ContinuumKind kind = ContinuumKind::first_order_iddx_plus_f;
  std::function<double(double)> potential = [](double) { return 0.0; };
  std::string potential_label = "0";
  double a = -std::numeric_limits<double>::infinity();
  double b = std::numeric_limits<double>::infinity();
};

struct IntegrationParams {
  double r_max = 40.0;        // outermost window edge
  double ode_tolerance = 1e-10;
  double window = 5.0;        // window width in length units
};

enum class EndpointClass { regular, limit_point, limit_circle };

std::string to_string(EndpointClass c);

// Log-scale window integrals of |u|^2 for one integrated solution, plus the
// classification the last-three-window ratio test produced.
struct TailDiagnostics {
  std::string which;                    // e.g. "right,+i,sol0"
  std::vector<double> log_window_mass;  // log of per-window integral of |u|^2
  std::vector<double> last_ratios;
  bool square_integrable = false;
};

struct DeficiencyReport {
  int n_plus = 0;
  int n_minus = 0;
  EndpointClass left_class = EndpointClass::regular;
  EndpointClass right_class = EndpointClass::regular;
  bool esa = false;  // n_plus == n_minus == 0
  std::vector<TailDiagnostics> tails;
  std::string operator_label;
};

// Weyl classification by windowed ODE shooting: integrate (tau -+ i)u = 0
// outward with adaptive RK (Dormand-Prince 4/5), renormalizing each window;
// a solution is L^2 at an endpoint iff the windowed tail integrals decrease
// geometrically (ratio <= 0.9 over the last 3 windows). Ratios trapped in
// (0.9, 1.02) are inconclusive and raise InconclusiveError.
DeficiencyReport deficiency_indices(const ContinuumOp& op, const IntegrationParams& p = {});

bool esa_verdict(const ContinuumOp& op, const IntegrationParams& p = {});

struct SweepRow {
  std::string potential_label;
  std::optional<DeficiencyReport> report;
  std::optional<std::string> error;  // inconclusive entries are flagged, not guessed
};

struct NamedPotential {
  std::function<double(double)> fn;
  std::string label;
};

std::vector<SweepRow> perturbation_sweep(const ContinuumOp& base,
                                         const std::vector<NamedPotential>& potentials,
                                         const IntegrationParams& p = {}, int jobs = 1);

}  // namespace opcert
