#include "opcert/approxid.hpp"

#include <cmath>

namespace opcert {

namespace {

// Antiderivative of the plain plateau on s >= 0.
double plateau_int(double t) {
  if (t <= 1.0) return t;
  if (t >= 2.0) return 1.5;
  return t - 0.5 * (t - 1.0) * (t - 1.0);
}

double plateau_eval(double s, double w) {
  s = std::abs(s);
  if (w <= 0.0) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    return 2.0 - s;
  }
  // exact plateau values outside the smoothing zone keep the "phi = 1 here"
  // and compact-support identities exact in floating point
  if (s + 0.5 * w <= 1.0) return 1.0;
  if (s - 0.5 * w >= 2.0) return 0.0;
  const double lo = s - 0.5 * w, hi = s + 0.5 * w;
  if (lo < 0.0) return (plateau_int(-lo) + plateau_int(hi)) / w;  // even extension
  return (plateau_int(hi) - plateau_int(lo)) / w;
}

}  // namespace

Profile plateau_profile() { return Profile{plateau_eval, "plateau"}; }

ProperFunction abs_proper() {
  return ProperFunction{[](double x) { return std::abs(x); }, "abs"};
}

ProperFunction smooth_abs_proper() {
  return ProperFunction{[](double x) { return std::sqrt(x * x + 1.0) - 1.0; }, "smooth_abs"};
}

namespace {

void validate_profile(const Profile& chi) {
  const double ds = 1e-4;
  if (std::abs(chi(0.0, 0.0) - 1.0) > 1e-9) throw PreconditionError("cutoff profile: chi(0) != 1");
  double prev = chi(0.0, 0.0);
  for (int i = 1; i <= 40000; ++i) {
    const double s = i * ds;
    const double v = chi(s, 0.0);
    if (v < -1e-12 || v > 1.0 + 1e-12) throw PreconditionError("cutoff profile: range outside [0, 1]");
    if (std::abs(v - prev) / ds > 1.0 + 1e-6)
      throw PreconditionError("cutoff profile: slope bound |chi'| <= 1 violated");
    prev = v;
  }
}

AlgebraElement realize_phi(const Profile& chi, const ProperFunction& rho, int k, const Grid& g,
                           double cap) {
  const double w = std::min(4.0 * g.spacing / k, cap);
  AlgebraElement a;
  a.fn = sample_real([&](double x) { return chi(rho.fn(x) / k, w); }, g);
  auto chifn = chi.fn;
  auto rhofn = rho.fn;
  a.sampler = [chifn, rhofn, k, w](double x) { return chifn(rhofn(x) / k, w); };
  // measured support radius (exact zeros beyond the cutoff)
  double r = 0.0;
  for (int j = 0; j < g.n_points; ++j)
    if (a.fn.values[j] != Complex(0, 0)) r = std::max(r, std::abs(g.node(j)));
  if (r < g.half_width) a.compact_support_radius = r;
  return a;
}

}  // namespace

CutoffFamily cutoff_family(const Profile& chi, const ProperFunction& rho, std::vector<int> ks,
                           const Grid& g) {
  validate_profile(chi);
  for (size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] <= 0) throw PreconditionError("cutoff_family: indices must be positive");
    if (i > 0 && ks[i] <= ks[i - 1]) throw PreconditionError("cutoff_family: indices must increase");
  }
  CutoffFamily f;
  f.profile = chi;
  f.rho = rho;
  f.indices = std::move(ks);
  f.grid = g;
  f.realized.reserve(f.indices.size());
  for (int k : f.indices) f.realized.push_back(realize_phi(chi, rho, k, g, f.smoothing_cap));
  return f;
}

CutoffFamily CutoffFamily::realize_on(const Grid& g) const {
  CutoffFamily f;
  f.profile = profile;
  f.rho = rho;
  f.indices = indices;
  f.grid = g;
  f.smoothing_cap = smoothing_cap;
  f.realized.reserve(indices.size());
  for (int k : indices) f.realized.push_back(realize_phi(profile, rho, k, g, smoothing_cap));
  return f;
}

CutoffFamily CutoffFamily::subfamily(const std::vector<int>& raw_indices) const {
  CutoffFamily f;
  f.profile = profile;
  f.rho = rho;
  f.indices = raw_indices;
  f.grid = grid;
  f.smoothing_cap = smoothing_cap;
  f.realized.reserve(raw_indices.size());
  for (int k : raw_indices) {
    auto it = std::find(indices.begin(), indices.end(), k);
    if (it == indices.end()) throw PreconditionError("subfamily: index not in family");
    f.realized.push_back(realized[it - indices.begin()]);
  }
  return f;
}

namespace {

double slope_sup(const GridFunction& phi) {
  const int n = phi.grid.n_points;
  const double h = phi.grid.spacing;
  double s = 0.0;
  for (int j = 1; j + 1 < n; ++j)
    s = std::max(s, std::abs(phi.values[j + 1].real() - phi.values[j - 1].real()) / (2.0 * h));
  return s;
}

}  // namespace

AdequacyReport certify_adequate(const SymOp& d, const CutoffFamily& f) {
  if (!(d.grid == f.grid)) throw PreconditionError("certify_adequate: grid mismatch");
  AdequacyReport r;
  r.ks = f.indices;
  r.commutator_norms.resize(f.size());
  r.slope_sups.resize(f.size());
  for (int i = 0; i < f.size(); ++i) {
    r.commutator_norms[i] = op_norm(commutator(d, f.at(i)));
    r.slope_sups[i] = slope_sup(f.at(i).fn);
  }
  r.sup_bound = 0.0;
  for (double c : r.commutator_norms) r.sup_bound = std::max(r.sup_bound, c);
  r.zero_family = (r.sup_bound == 0.0);
  if (r.zero_family) {
    r.decay_verdict = true;
    return r;
  }
  double slope_scale = 0.0;
  for (int i = 0; i < f.size(); ++i) slope_scale = std::max(slope_scale, r.slope_sups[i] * f.index(i));
  if (slope_scale == 0.0) slope_scale = 1.0;
  r.decay_verdict = true;
  for (int i = 0; i < f.size(); ++i) {
    const double ckk = r.commutator_norms[i] * f.index(i) / slope_scale;
    if (ckk < r.window_lo || ckk > r.window_hi) r.decay_verdict = false;
  }
  return r;
}

LocalBoundednessReport certify_locally_bounded(const SymOp& m, const CutoffFamily& f) {
  LocalBoundednessReport r;
  r.ks = f.indices;
  r.m_phi_norms.resize(f.size());
  r.comm_norms.resize(f.size());
  for (int i = 0; i < f.size(); ++i) {
    const SpMat prod = m.matrix * f.at(i).as_matrix(m.multiplicity);
    r.m_phi_norms[i] = op_norm(prod);
    r.comm_norms[i] = op_norm(commutator(m, f.at(i)));
  }
  r.uniform_comm_bound = 0.0;
  for (double c : r.comm_norms) r.uniform_comm_bound = std::max(r.uniform_comm_bound, c);
  return r;
}

LocalBoundednessReport certify_locally_bounded(const SpMat& m, const std::vector<SpMat>& phis) {
  LocalBoundednessReport r;
  for (size_t i = 0; i < phis.size(); ++i) {
    r.ks.push_back(static_cast<int>(i) + 1);
    r.m_phi_norms.push_back(op_norm(SpMat((m * phis[i]).pruned())));
    SpMat c = commutator(m, phis[i]);
    r.comm_norms.push_back(op_norm(c));
  }
  r.uniform_comm_bound = 0.0;
  for (double c : r.comm_norms) r.uniform_comm_bound = std::max(r.uniform_comm_bound, c);
  return r;
}

}  // namespace opcert
