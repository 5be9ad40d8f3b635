#pragma once

#include <vector>

#include "opcert/operators.hpp"

namespace opcert {

// Cutoff profile chi(s) for s >= 0: 0 <= chi <= 1, chi(0) = 1, |chi'| <= 1.
// The second argument is a smoothing width; profiles that do not support
// smoothing may ignore it.
struct Profile {
  std::function<double(double s, double smoothing)> fn;
  std::string name;

  double operator()(double s, double w = 0.0) const { return fn(s, w); }
};

// Piecewise-linear plateau (1 on [0,1], linear to 0 at 2) mollified by one
// box-smoothing pass of the given width; |chi'| <= 1 for every width.
Profile plateau_profile();

struct ProperFunction {
  std::function<double(double)> fn;
  std::string name;
};

ProperFunction abs_proper();         // rho(x) = |x|
ProperFunction smooth_abs_proper();  // rho(x) = sqrt(x^2 + 1) - 1, |rho'| < 1

// The realized approximate identity phi_k = chi(rho(x)/k). Realized values
// are stored per index; the profile data allows re-realization on any grid.
struct CutoffFamily {
  Profile profile;
  ProperFunction rho;
  std::vector<int> indices;
  Grid grid;
  double smoothing_cap = 0.25;  // mollification width min(4h/k, cap)
  std::vector<AlgebraElement> realized;

  const AlgebraElement& at(int slot) const { return realized.at(slot); }
  int index(int slot) const { return indices.at(slot); }
  int size() const { return static_cast<int>(indices.size()); }

  CutoffFamily realize_on(const Grid& g) const;
  CutoffFamily subfamily(const std::vector<int>& raw_indices) const;
};

// Validates the profile bounds by sampling (0 <= chi <= 1, finite-difference
// slope <= 1 + 1e-6, chi(0) = 1), then realizes phi_k on the grid.
CutoffFamily cutoff_family(const Profile& chi, const ProperFunction& rho, std::vector<int> ks,
                           const Grid& g);

struct AdequacyReport {
  std::vector<int> ks;
  std::vector<double> commutator_norms;  // c_k = ||[D, phi_k]||
  std::vector<double> slope_sups;        // finite-difference sup |phi_k'|
  double sup_bound = 0.0;                // max_k c_k
  bool decay_verdict = false;            // c_k * k within [0.8, 1.2] x slope scale
  double window_lo = 0.8, window_hi = 1.2;
  bool domain_check = true;  // discrete proxy; structurally satisfied at finite level
  bool zero_family = false;  // all commutators exactly zero
};

AdequacyReport certify_adequate(const SymOp& d, const CutoffFamily& f);

struct LocalBoundednessReport {
  std::vector<int> ks;
  std::vector<double> m_phi_norms;  // ||M phi_k||
  std::vector<double> comm_norms;   // ||[M, phi_k]||
  double uniform_comm_bound = 0.0;
};

LocalBoundednessReport certify_locally_bounded(const SymOp& m, const CutoffFamily& f);
// Generic variant for explicitly given (possibly matrix-valued) cutoffs.
LocalBoundednessReport certify_locally_bounded(const SpMat& m, const std::vector<SpMat>& phis);

}  // namespace opcert
