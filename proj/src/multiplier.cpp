#include "opcert/multiplier.hpp"

#include <algorithm>
#include <cmath>

#include "opcert/banded.hpp"

namespace opcert {

namespace {

double sup_abs_product(const GridFunction& f, const GridFunction& g) {
  double s = 0.0;
  for (int j = 0; j < f.grid.n_points; ++j)
    s = std::max(s, std::abs(f.values[j]) * std::abs(g.values[j]));
  return s;
}

GridFunction diff(const GridFunction& a, const GridFunction& b) {
  GridFunction d;
  d.grid = a.grid;
  d.values = a.values - b.values;
  return d;
}

}  // namespace

CutoffSelection select_subsequence(const CutoffFamily& raw, const std::vector<AlgebraElement>& totals,
                                   const SymOp& d, int slots) {
  if (slots < 1) throw PreconditionError("select_subsequence: need at least one slot");
  for (const auto& a : totals)
    if (!a.compact_support_radius)
      throw PreconditionError("select_subsequence: totals must be compactly supported");

  // cache commutator norms per raw slot
  std::vector<double> comm(raw.size(), -1.0);
  auto comm_norm = [&](int slot) {
    if (comm[slot] < 0.0) comm[slot] = op_norm(commutator(d, raw.at(slot)));
    return comm[slot];
  };

  std::vector<int> chosen_slots;
  std::vector<double> comm_norms;
  std::vector<std::vector<double>> prod_norms(slots);

  for (int k = 1; k <= slots; ++k) {
    // plateau of the slot-k choice must cover supp(a_j) for j < k, otherwise
    // the later difference products could never meet their bounds
    double guard = 0.0;
    for (int j = 0; j + 1 < k && j < static_cast<int>(totals.size()); ++j)
      guard = std::max(guard, *totals[j].compact_support_radius);

    const double bound_k = std::pow(4.0, -k);
    int found = -1;
    std::vector<double> pn;
    for (int s = chosen_slots.empty() ? 0 : chosen_slots.back() + 1; s < raw.size(); ++s) {
      if (k >= 2 && raw.index(s) < guard) continue;
      if (!(comm_norm(s) < bound_k)) continue;
      if (!chosen_slots.empty()) {
        const double pair_bound = std::pow(4.0, -(k - 1));
        const GridFunction dphi = diff(raw.at(s).fn, raw.at(chosen_slots.back()).fn);
        pn.clear();
        bool ok = true;
        // the pair (k-1, k) carries the level-(k-1) bound, with totals j < k-1
        for (int j = 0; j < k - 2 && j < static_cast<int>(totals.size()); ++j) {
          const double v = sup_abs_product(dphi, totals[j].fn);
          pn.push_back(v);
          if (!(v < pair_bound)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
      }
      found = s;
      break;
    }
    if (found < 0)
      throw NumericalError("select_subsequence: raw family exhausted before the 4^-" +
                           std::to_string(k) + " bound was achievable");
    chosen_slots.push_back(found);
    comm_norms.push_back(comm_norm(found));
    if (k >= 2) prod_norms[k - 2] = pn;  // bounds at level k-1 belong to the pair (k-1, k)
  }

  CutoffSelection sel;
  std::vector<int> raw_indices;
  for (int s : chosen_slots) raw_indices.push_back(raw.index(s));
  sel.family = raw.subfamily(raw_indices);
  sel.certificate.selected = raw_indices;
  sel.certificate.comm_norms = comm_norms;
  sel.certificate.prod_norms.assign(prod_norms.begin(), prod_norms.begin() + std::max(0, slots - 1));

  // independent re-verification of every stored bound
  sel.certificate.all_bounds_strict = true;
  for (int k = 1; k <= slots; ++k) {
    const double reval = op_norm(commutator(d, sel.family.at(k - 1)));
    if (!(reval < std::pow(4.0, -k))) sel.certificate.all_bounds_strict = false;
  }
  for (int k = 1; k + 1 <= slots; ++k) {
    const GridFunction dphi = diff(sel.family.at(k).fn, sel.family.at(k - 1).fn);
    for (int j = 0; j < k - 1 && j < static_cast<int>(totals.size()); ++j)
      if (!(sup_abs_product(dphi, totals[j].fn) < std::pow(4.0, -k)))
        sel.certificate.all_bounds_strict = false;
  }
  return sel;
}

MultiplierSeries build_multiplier(const CutoffSelection& sel, int n_trunc) {
  if (n_trunc < 0) throw PreconditionError("build_multiplier: negative truncation depth");
  if (n_trunc + 1 > sel.family.size())
    throw PreconditionError("build_multiplier: truncation depth exceeds the selected indices");
  MultiplierSeries s;
  s.selection = sel;
  s.depth = n_trunc;
  const Grid& g = sel.family.grid;
  GridFunction acc;
  acc.grid = g;
  acc.values = CVector::Zero(g.n_points);
  for (int k = 1; k <= n_trunc; ++k) {
    const double w = std::pow(2.0, k);
    acc.values += w * (sel.family.at(k).fn.values - sel.family.at(k - 1).fn.values);
    AlgebraElement trunc;
    trunc.fn = acc;
    s.truncations.push_back(std::move(trunc));
  }
  if (n_trunc == 0) {
    AlgebraElement zero;
    zero.fn = acc;
    s.truncations.push_back(std::move(zero));
  }
  s.growth_profile = s.truncations.back().fn;
  return s;
}

AlgebraElement MultiplierSeries::deepest_on(const Grid& g) const {
  const CutoffFamily fam = selection.family.realize_on(g);
  AlgebraElement m;
  m.fn.grid = g;
  m.fn.values = CVector::Zero(g.n_points);
  for (int k = 1; k <= depth; ++k)
    m.fn.values += std::pow(2.0, k) * (fam.at(k).fn.values - fam.at(k - 1).fn.values);
  return m;
}

ResolventTailReport resolvent_in_A(const MultiplierSeries& series) {
  const CutoffFamily& fam = series.selection.family;
  const Grid& g = fam.grid;
  const GridFunction& m = series.growth_profile;
  ResolventTailReport rep;
  if (series.depth == 0) {
    // zero multiplier: the resolvent does not vanish at infinity
    double sup = 0.0;
    for (int j = 0; j < g.n_points; ++j) {
      const double mv = m.values[j].real();
      sup = std::max(sup, 1.0 / std::sqrt(mv * mv + 1.0));
    }
    rep.ks.push_back(0);
    rep.radii.push_back(0.0);
    rep.tail_sups.push_back(sup);
    rep.bounds.push_back(0.0);
    rep.verdict = false;
    return rep;
  }
  int visible = 0;
  for (int k = 1; k <= series.depth; ++k) {
    const GridFunction& phi = fam.at(k - 1).fn;
    double radius = -1.0;
    bool dips_inside = false;
    for (int j = 0; j < g.n_points; ++j) {
      if (phi.values[j].real() >= rep.level) radius = std::max(radius, std::abs(g.node(j)));
      else dips_inside = true;
    }
    if (!dips_inside || radius < 0.0) continue;  // level set leaves the grid
    ++visible;
    double sup = 0.0;
    for (int j = 0; j < g.n_points; ++j) {
      if (std::abs(g.node(j)) <= radius) continue;
      const double mv = m.values[j].real();
      sup = std::max(sup, 1.0 / std::sqrt(mv * mv + 1.0));
    }
    rep.ks.push_back(k);
    rep.radii.push_back(radius);
    rep.tail_sups.push_back(sup);
    rep.bounds.push_back(std::pow(2.0, -(k - 1)));
  }
  if (visible < 2) throw PreconditionError("resolvent_in_A: grid too small to see two annuli");
  rep.verdict = true;
  for (size_t i = 0; i < rep.ks.size(); ++i)
    if (!(rep.tail_sups[i] <= rep.bounds[i])) rep.verdict = false;
  return rep;
}

namespace {

// Real tridiagonal data of P = iD + diag(m); requires iD real (purely
// imaginary entries in D).
struct RealBlock {
  RVector diag;  // m
  RVector up;    // P(j, j+1)
  RVector lo;    // P(j+1, j)
};

RealBlock real_block(const SymOp& d, const RVector& m) {
  const int n = d.dim();
  RealBlock b;
  b.diag = m;
  b.up = RVector::Zero(std::max(0, n - 1));
  b.lo = RVector::Zero(std::max(0, n - 1));
  {
    // manual extraction keeps both triangles
    RMatrix probe = RMatrix::Zero(2, std::max(0, n - 1));
    for (int k = 0; k < d.matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(d.matrix, k); it; ++it) {
        const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
        const Complex iv = Complex(0, 1) * it.value();  // entry of iD
        if (std::abs(iv.imag()) != 0.0)
          throw PreconditionError("compact_resolvent_certify: D must have purely imaginary entries");
        if (i == j) {
          if (iv.real() != 0.0)
            throw PreconditionError("compact_resolvent_certify: D must have zero diagonal");
        } else if (j == i + 1) {
          probe(0, i) = iv.real();
        } else if (i == j + 1) {
          probe(1, j) = iv.real();
        } else {
          throw PreconditionError("compact_resolvent_certify: D must be tridiagonal");
        }
      }
    for (int j = 0; j + 1 < n; ++j) {
      b.up[j] = probe(0, j);
      b.lo[j] = probe(1, j);
    }
  }
  return b;
}

// A = P^T P as a pentadiagonal symmetric band.
SymBand gram_band(const RealBlock& p) {
  const int n = static_cast<int>(p.diag.size());
  SymBand a(n, 2);
  for (int j = 0; j < n; ++j) {
    double v = p.diag[j] * p.diag[j];
    if (j > 0) v += p.up[j - 1] * p.up[j - 1];
    if (j + 1 < n) v += p.lo[j] * p.lo[j];
    a.at(0, j) = v;
  }
  for (int j = 0; j + 1 < n; ++j)
    a.at(1, j) = p.diag[j] * p.up[j] + p.lo[j] * p.diag[j + 1];
  for (int j = 0; j + 2 < n; ++j) a.at(2, j) = p.up[j + 1] * p.lo[j];
  return a;
}

RVector apply_p(const RealBlock& p, const RVector& v) {
  const int n = static_cast<int>(v.size());
  RVector r = RVector::Zero(n);
  for (int j = 0; j < n; ++j) {
    r[j] += p.diag[j] * v[j];
    if (j + 1 < n) {
      r[j] += p.up[j] * v[j + 1];
      r[j + 1] += p.lo[j] * v[j];
    }
  }
  return r;
}

struct DomainData {
  Grid grid;
  RVector m;
  RealBlock block;
  Tridiag tri;  // of P^T P
};

DomainData domain_data(const SymOp& d_proto, const std::function<RVector(const Grid&)>& m_of,
                       const Grid& g) {
  DomainData dd;
  dd.grid = g;
  const SymOp d = realize_on(d_proto, g);
  dd.m = m_of(g);
  dd.block = real_block(d, dd.m);
  dd.tri = tridiagonalize(gram_band(dd.block));
  return dd;
}

long count_leq(const Tridiag& t, double lambda) {
  // eigenvalues of the doubled operator in [-lambda, lambda]:
  // 2 * #(sigma^2 <= lambda^2), threshold nudged consistently on both domains
  const double tau = lambda * lambda * (1.0 + 1e-12) + 1e-300;
  return 2L * sturm_count(t, tau);
}

CompactResolventReport certify_from(const SymOp& d_proto,
                                    const std::function<RVector(const Grid&)>& m_of,
                                    const CompactResolventOptions& opt) {
  const Grid g1 = d_proto.grid;
  const int grown_half = static_cast<int>(std::round(opt.growth_factor * (g1.n_points - 1) / 2.0));
  const Grid g2 = make_grid(grown_half * g1.spacing, 2 * grown_half + 1);

  const DomainData a = domain_data(d_proto, m_of, g1);
  const DomainData b = domain_data(d_proto, m_of, g2);

  CompactResolventReport rep;
  for (double lam = 1.0; lam <= opt.lambda_max * (1 + 1e-12); lam *= 2.0) rep.lambdas.push_back(lam);
  for (double lam : rep.lambdas) {
    rep.counts_base.push_back(count_leq(a.tri, lam));
    rep.counts_grown.push_back(count_leq(b.tri, lam));
  }
  rep.counting_stable = true;
  rep.smallest_escaping = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < rep.lambdas.size(); ++i)
    if (rep.counts_base[i] != rep.counts_grown[i]) {
      rep.counting_stable = false;
      rep.smallest_escaping = std::min(rep.smallest_escaping, rep.lambdas[i]);
    }
  if (rep.counting_stable) {
    // frontier estimate: the smallest multiplier value on either boundary
    double frontier = std::numeric_limits<double>::infinity();
    for (const DomainData* dd : {&a, &b}) {
      const int n = dd->grid.n_points;
      const int strip = std::max(1, static_cast<int>(opt.boundary_fraction * n));
      for (int j = 0; j < strip; ++j) {
        frontier = std::min(frontier, std::abs(dd->m[j]));
        frontier = std::min(frontier, std::abs(dd->m[n - 1 - j]));
      }
    }
    rep.smallest_escaping = frontier;
  }

  // boundary mass of every counted eigenvector, both domains
  rep.max_boundary_mass = 0.0;
  rep.outside_level_set_mass = 0.0;
  const double lam_max = rep.lambdas.back();
  for (const DomainData* dd : {&a, &b}) {
    const int n = dd->grid.n_points;
    const double tau = lam_max * lam_max * (1.0 + 1e-12);
    std::vector<double> eigs = eigenvalues_in(dd->tri, -1.0, tau, opt.eig_tol);
    const SymBand band = gram_band(dd->block);
    const int strip = std::max(1, static_cast<int>(opt.boundary_fraction * n));
    std::vector<double> masses(eigs.size(), 0.0), outside(eigs.size(), 0.0);
    parallel_for(static_cast<int>(eigs.size()), opt.jobs, [&](int i) {
      const double s2 = std::max(eigs[i], 0.0);
      const double sigma = std::sqrt(s2);
      RVector v = inverse_iteration(band, eigs[i] + i * 1e-13, mix_seed(0xb42d5eedULL, i));
      RVector u;
      if (sigma > 1e-6) {
        u = apply_p(dd->block, v) / sigma;
      } else {
        u = RVector::Zero(n);
      }
      double total = v.squaredNorm() + u.squaredNorm();
      double bm = 0.0, om = 0.0;
      for (int j = 0; j < n; ++j) {
        const double w = v[j] * v[j] + u[j] * u[j];
        if (j < strip || j >= n - strip) bm += w;
        if (std::abs(dd->m[j]) > lam_max) om += w;
      }
      masses[i] = bm / total;
      outside[i] = om / total;
    });
    for (double mmass : masses) rep.max_boundary_mass = std::max(rep.max_boundary_mass, mmass);
    for (double om : outside) rep.outside_level_set_mass = std::max(rep.outside_level_set_mass, om);
  }

  rep.verdict = rep.counting_stable && (rep.max_boundary_mass <= opt.boundary_mass_tol);
  return rep;
}

}  // namespace

CompactResolventReport compact_resolvent_certify(const SymOp& d, const MultiplierSeries& series,
                                                 const CompactResolventOptions& opt) {
  if (d.graded) throw PreconditionError("compact_resolvent_certify: D must be ungraded");
  auto m_of = [&series](const Grid& g) { return series.deepest_on(g).fn.real_values(); };
  return certify_from(d, m_of, opt);
}

CompactResolventReport compact_resolvent_certify(const SymOp& d, const AlgebraElement& m,
                                                 const CompactResolventOptions& opt) {
  if (d.graded) throw PreconditionError("compact_resolvent_certify: D must be ungraded");
  auto m_of = [&m](const Grid& g) {
    if (g == m.fn.grid) return m.fn.real_values();
    return m.realize_on(g).fn.real_values();
  };
  return certify_from(d, m_of, opt);
}

namespace {

// Generic banded path for the even variant: assemble the real symmetric
// doubled matrix, interleave blocks to a narrow band, then slice.
struct EvenData {
  Grid grid;
  RVector m;
  SymBand band;  // interleaved
  Tridiag tri;
  int blocks;  // number of size-n blocks
  std::vector<int> perm;  // banded index -> original index
};

EvenData even_data(const SymOp& d_proto, const std::function<RVector(const Grid&)>& m_of,
                   const Grid& g) {
  EvenData ed;
  ed.grid = g;
  SymOp d = realize_on(d_proto, g);
  if (d_proto.graded && !d.graded) throw PreconditionError("even_variant: grading lost on re-realization");
  ed.m = m_of(g);
  AlgebraElement ma;
  ma.fn.grid = g;
  ma.fn.values = ed.m.cast<Complex>();
  SymOp mop;
  mop.grid = g;
  mop.multiplicity = d.multiplicity;
  mop.matrix = ma.as_matrix(d.multiplicity);
  mop.descriptor.kind = OpKind::multiplication;
  const SymOp doubled = graded_tensor_double(d, mop);

  const int big = doubled.dim();
  const int n = g.n_points;
  const int blocks = big / n;
  ed.blocks = blocks;
  // interleave: original index b*n + j -> j*blocks + b
  auto inter = [&](int idx) {
    const int bb = idx / n, j = idx % n;
    return j * blocks + bb;
  };
  ed.perm.resize(big);
  for (int idx = 0; idx < big; ++idx) ed.perm[inter(idx)] = idx;

  SpMatR real(big, big);
  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(doubled.matrix.nonZeros());
  for (int k = 0; k < doubled.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(doubled.matrix, k); it; ++it) {
      if (it.value().imag() != 0.0)
        throw PreconditionError("even_variant_certify: doubled operator must be real");
      ts.emplace_back(inter(static_cast<int>(it.row())), inter(static_cast<int>(it.col())),
                      it.value().real());
    }
  real.setFromTriplets(ts.begin(), ts.end());
  ed.band = SymBand::from_sparse(real);
  ed.tri = tridiagonalize(ed.band);
  return ed;
}

long count_leq_sym(const Tridiag& t, double lambda) {
  const double eps = lambda * 1e-12 + 1e-300;
  return sturm_count(t, lambda + eps) - sturm_count(t, -lambda - eps);
}

CompactResolventReport even_certify_from(const SymOp& d_proto,
                                         const std::function<RVector(const Grid&)>& m_of,
                                         const CompactResolventOptions& opt) {
  const Grid g1 = d_proto.grid;
  const int grown_half = static_cast<int>(std::round(opt.growth_factor * (g1.n_points - 1) / 2.0));
  const Grid g2 = make_grid(grown_half * g1.spacing, 2 * grown_half + 1);
  const EvenData a = even_data(d_proto, m_of, g1);
  const EvenData b = even_data(d_proto, m_of, g2);

  CompactResolventReport rep;
  for (double lam = 1.0; lam <= opt.lambda_max * (1 + 1e-12); lam *= 2.0) rep.lambdas.push_back(lam);
  for (double lam : rep.lambdas) {
    rep.counts_base.push_back(count_leq_sym(a.tri, lam));
    rep.counts_grown.push_back(count_leq_sym(b.tri, lam));
  }
  rep.counting_stable = true;
  rep.smallest_escaping = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < rep.lambdas.size(); ++i)
    if (rep.counts_base[i] != rep.counts_grown[i]) {
      rep.counting_stable = false;
      rep.smallest_escaping = std::min(rep.smallest_escaping, rep.lambdas[i]);
    }
  if (rep.counting_stable) {
    double frontier = std::numeric_limits<double>::infinity();
    for (const EvenData* ed : {&a, &b}) {
      const int n = ed->grid.n_points;
      const int strip = std::max(1, static_cast<int>(opt.boundary_fraction * n));
      for (int j = 0; j < strip; ++j)
        frontier = std::min({frontier, std::abs(ed->m[j]), std::abs(ed->m[n - 1 - j])});
    }
    rep.smallest_escaping = frontier;
  }

  const double lam_max = rep.lambdas.back();
  for (const EvenData* ed : {&a, &b}) {
    const int n = ed->grid.n_points;
    const int strip = std::max(1, static_cast<int>(opt.boundary_fraction * n));
    std::vector<double> eigs =
        eigenvalues_in(ed->tri, -lam_max * (1 + 1e-12) - 1e-300, lam_max * (1 + 1e-12) + 1e-300, opt.eig_tol);
    std::vector<double> masses(eigs.size(), 0.0), outside(eigs.size(), 0.0);
    parallel_for(static_cast<int>(eigs.size()), opt.jobs, [&](int i) {
      RVector v = inverse_iteration(ed->band, eigs[i] + i * 1e-13, mix_seed(0xe7e45eedULL, i));
      double total = v.squaredNorm(), bm = 0.0, om = 0.0;
      for (int p = 0; p < static_cast<int>(v.size()); ++p) {
        const int orig = ed->perm[p];
        const int j = orig % n;
        if (j < strip || j >= n - strip) bm += v[p] * v[p];
        if (std::abs(ed->m[j]) > lam_max) om += v[p] * v[p];
      }
      masses[i] = bm / total;
      outside[i] = om / total;
    });
    for (double mmass : masses) rep.max_boundary_mass = std::max(rep.max_boundary_mass, mmass);
    for (double om : outside) rep.outside_level_set_mass = std::max(rep.outside_level_set_mass, om);
  }
  rep.verdict = rep.counting_stable && (rep.max_boundary_mass <= opt.boundary_mass_tol);
  return rep;
}

}  // namespace

CompactResolventReport even_variant_certify(const SymOp& d_graded, const MultiplierSeries& series,
                                            const CompactResolventOptions& opt) {
  if (!d_graded.graded) throw PreconditionError("even_variant_certify: D must be graded");
  auto m_of = [&series](const Grid& g) { return series.deepest_on(g).fn.real_values(); };
  return even_certify_from(d_graded, m_of, opt);
}

CompactResolventReport even_variant_certify(const SymOp& d_graded, const AlgebraElement& m,
                                            const CompactResolventOptions& opt) {
  if (!d_graded.graded) throw PreconditionError("even_variant_certify: D must be graded");
  auto m_of = [&m](const Grid& g) {
    if (g == m.fn.grid) return m.fn.real_values();
    return m.realize_on(g).fn.real_values();
  };
  return even_certify_from(d_graded, m_of, opt);
}

CounterexampleReport counterexample_commutator(const std::function<double(double)>& m,
                                               const CutoffFamily& family) {
  const Grid& g = family.grid;
  const GridFunction mf = sample_real(m, g);
  const int n = g.n_points;
  CounterexampleReport rep;
  for (int slot = 0; slot < family.size(); ++slot) {
    const int k = family.index(slot);
    const GridFunction& phi = family.at(slot).fn;
    // m~ = [[0, i m], [-i m, 0]], phi~_k = [[1, 1/k], [1/k, 1]] phi_k
    std::vector<Eigen::Triplet<Complex>> tm, tp;
    for (int j = 0; j < n; ++j) {
      const Complex mv = mf.values[j];
      if (mv != Complex(0, 0)) {
        tm.emplace_back(j, n + j, Complex(0, 1) * mv);
        tm.emplace_back(n + j, j, Complex(0, -1) * mv);
      }
      const Complex pv = phi.values[j];
      if (pv != Complex(0, 0)) {
        tp.emplace_back(j, j, pv);
        tp.emplace_back(n + j, n + j, pv);
        tp.emplace_back(j, n + j, pv / static_cast<double>(k));
        tp.emplace_back(n + j, j, pv / static_cast<double>(k));
      }
    }
    SpMat mt(2 * n, 2 * n), pt(2 * n, 2 * n);
    mt.setFromTriplets(tm.begin(), tm.end());
    pt.setFromTriplets(tp.begin(), tp.end());
    const SpMat c = commutator(mt, pt);
    rep.ks.push_back(k);
    rep.matrix_norms.push_back(op_norm(c));
    double sup = 0.0;
    for (int j = 0; j < n; ++j)
      sup = std::max(sup, std::abs(mf.values[j]) * std::abs(phi.values[j]));
    rep.closed_form.push_back(2.0 * sup / k);
  }
  return rep;
}

}  // namespace opcert
