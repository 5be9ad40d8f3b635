// Acceptance suite: one certified property per section, one PASS/FAIL line
// each, exit code = number of failures. Tolerances are pinned in code next to
// the assertions they gate.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "opcert/banded.hpp"
#include "opcert/deficiency.hpp"
#include "opcert/kasparov.hpp"
#include "opcert/multiplier.hpp"
#include "opcert/finmod.hpp"

using namespace opcert;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail = "") {
  std::cout << (pass ? "PASS" : "FAIL") << " - criterion " << criterion << ": " << what;
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << std::endl;
  if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// 1. deficiency sweep: i d/dx + f has indices (0,0) on R and (0,1) on (0,inf)
//    for every potential in the menu; exact integers, under 30 s total
void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<NamedPotential> menu = {
      {[](double) { return 0.0; }, "0"},
      {[](double x) { return x; }, "x"},
      {[](double x) { return x * x * x; }, "x^3"},
      {[](double x) { return std::exp(x); }, "e^x"},
      {[](double x) { return ((x > 0) - (x < 0)) * std::log(1 + std::abs(x)); }, "sign log"},
  };
  bool ok = true;
  std::string detail;
  for (const auto& p : menu) {
    ContinuumOp line{ContinuumKind::first_order_iddx_plus_f, p.fn, p.label, -kInf, kInf};
    ContinuumOp half{ContinuumKind::first_order_iddx_plus_f, p.fn, p.label, 0.0, kInf};
    const DeficiencyReport rl = deficiency_indices(line);
    const DeficiencyReport rh = deficiency_indices(half);
    if (!(rl.n_plus == 0 && rl.n_minus == 0 && rh.n_plus == 0 && rh.n_minus == 1)) {
      ok = false;
      detail += p.label + ": (" + std::to_string(rl.n_plus) + "," + std::to_string(rl.n_minus) +
                ")/(" + std::to_string(rh.n_plus) + "," + std::to_string(rh.n_minus) + ") ";
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 30.0) {
    ok = false;
    detail += "runtime " + std::to_string(dt) + "s";
  }
  report(1, "deficiency sweep (0,0) on R and (0,1) on the half-line", ok, detail);
}

// ---------------------------------------------------------------------------
// 2. doubled oscillator: the positive spectral ladder of
//    [[0, -iD + x], [iD + x, 0]] matches sqrt(2n), n = 1..10, to 1e-2
//    relative at L = 20, n_points = 4001; under 60 s
void criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g = make_grid(20.0, 4001);
  const int n = g.n_points;
  const double h = g.spacing;
  // P = iD + diag(x) is real tridiagonal; positive doubled eigenvalues are
  // the singular values of P, i.e. sqrt of the spectrum of P^T P
  RVector diag(n), up(n - 1), lo(n - 1);
  for (int j = 0; j < n; ++j) diag[j] = g.node(j);
  up.setConstant(-1.0 / (2.0 * h));
  lo.setConstant(+1.0 / (2.0 * h));
  SymBand gram(n, 2);
  for (int j = 0; j < n; ++j) {
    double v = diag[j] * diag[j];
    if (j > 0) v += up[j - 1] * up[j - 1];
    if (j + 1 < n) v += lo[j] * lo[j];
    gram.at(0, j) = v;
  }
  for (int j = 0; j + 1 < n; ++j) gram.at(1, j) = diag[j] * up[j] + lo[j] * diag[j + 1];
  for (int j = 0; j + 2 < n; ++j) gram.at(2, j) = up[j + 1] * lo[j];
  const Tridiag tri = tridiagonalize(gram);
  const std::vector<double> s2 = eigenvalues_in(tri, -1.0, 22.0, 1e-9);

  std::vector<double> ladder;
  for (double v : s2) {
    const double s = std::sqrt(std::max(v, 0.0));
    if (s < 0.5) continue;  // the doubled operator has a near-zero mode
    if (!ladder.empty() && std::abs(s - ladder.back()) < 1e-3 * s) continue;
    ladder.push_back(s);
  }
  bool ok = ladder.size() >= 10;
  std::string detail;
  for (int k = 1; k <= 10 && ok; ++k) {
    const double rel = std::abs(ladder[k - 1] / std::sqrt(2.0 * k) - 1.0);
    if (rel > 1e-2) {
      ok = false;
      detail = "level " + std::to_string(k) + " rel err " + std::to_string(rel);
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 60.0) {
    ok = false;
    detail += " runtime " + std::to_string(dt) + "s";
  }
  report(2, "doubled oscillator ladder = sqrt(2n) to 1e-2", ok, detail);
}

// ---------------------------------------------------------------------------
// 3. adequacy scaling: ||[D, phi_k]|| * k in [0.8, 1.2] for k = 1..20 after
//    one refinement, and the report is bit-identical under added potentials
void criterion3() {
  Grid g = make_grid(44.0, 4001);
  g = refine(g);  // one refinement
  const SymOp d0 = first_order(g, [](double) { return 0.0; });
  std::vector<int> ks;
  for (int k = 1; k <= 20; ++k) ks.push_back(k);
  const CutoffFamily fam = cutoff_family(plateau_profile(), abs_proper(), ks, g);
  const AdequacyReport rep = certify_adequate(d0, fam);
  bool ok = true;
  std::string detail;
  for (size_t i = 0; i < rep.ks.size(); ++i) {
    const double ckk = rep.commutator_norms[i] * rep.ks[i];
    if (ckk < 0.8 || ckk > 1.2) {
      ok = false;
      detail += "k=" + std::to_string(rep.ks[i]) + " c*k=" + std::to_string(ckk) + " ";
    }
  }
  const SymOp df = first_order(g, [](double x) { return x * std::sin(x) + std::exp(x / 30.0); });
  const AdequacyReport rep_f = certify_adequate(df, fam);
  if (!(rep_f.commutator_norms == rep.commutator_norms && rep_f.sup_bound == rep.sup_bound)) {
    ok = false;
    detail += "potential changed the report";
  }
  report(3, "adequacy scaling c_k * k in [0.8, 1.2], potential-independent", ok, detail);
}

// ---------------------------------------------------------------------------
// 4. multiplier construction: strict 4^{-k} selection bounds for k <= 6,
//    resolvent tails <= 2^{-k+1}, and the compact-resolvent surrogate with
//    counting stable through Lambda = 32 and boundary mass <= 1e-6
void criterion4() {
  const double L = 10400.0, h = 8.0;
  const Grid g = make_grid(L, 2 * static_cast<int>(std::round(L / h)) + 1);
  const SymOp d = first_order(g, [](double) { return 0.0; });
  const std::vector<int> ladder = {2,    3,    4,    5,    6,    8,    10,   12,   16,  20,
                                   24,   32,   40,   48,   64,   80,   96,   128,  160, 192,
                                   256,  320,  384,  512,  640,  768,  1024, 1280, 1536,
                                   2048, 2560, 3072, 4096, 5120, 6144, 8192, 10496, 13056};
  const CutoffFamily raw = cutoff_family(plateau_profile(), abs_proper(), ladder, g);
  std::vector<AlgebraElement> totals;
  for (int j = 0; j < 5; ++j) totals.push_back(bump(g, 24.0, 0.5 + 0.1 * j));

  bool ok = true;
  std::string detail;
  try {
    const CutoffSelection sel = select_subsequence(raw, totals, d, 7);
    if (!sel.certificate.all_bounds_strict) {
      ok = false;
      detail += "certificate bounds not strict ";
    }
    for (int k = 1; k <= 6; ++k)
      if (!(sel.certificate.comm_norms[k - 1] < std::pow(4.0, -k))) {
        ok = false;
        detail += "comm bound k=" + std::to_string(k) + " ";
      }

    const MultiplierSeries series = build_multiplier(sel, 6);
    const ResolventTailReport tails = resolvent_in_A(series);
    if (!tails.verdict) {
      ok = false;
      detail += "tail bounds ";
    }
    for (size_t i = 0; i < tails.ks.size(); ++i)
      if (!(tails.tail_sups[i] <= std::pow(2.0, -(tails.ks[i] - 1)))) {
        ok = false;
        detail += "tail k=" + std::to_string(tails.ks[i]) + " ";
      }

    CompactResolventOptions opt;
    opt.lambda_max = 32.0;  // Lambda ladder 1, 2, 4, 8, 16, 32
    opt.boundary_mass_tol = 1e-6;
    opt.jobs = 2;
    const CompactResolventReport cr = compact_resolvent_certify(d, series, opt);
    if (!cr.counting_stable) {
      ok = false;
      detail += "counting unstable at Lambda=" + std::to_string(cr.smallest_escaping) + " ";
    }
    if (!(cr.max_boundary_mass <= 1e-6)) {
      ok = false;
      detail += "boundary mass " + std::to_string(cr.max_boundary_mass) + " ";
    }
    if (!cr.verdict) {
      ok = false;
      detail += "verdict false ";
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(4, "multiplier selection, tails, and compact-resolvent surrogate", ok, detail);
}

// ---------------------------------------------------------------------------
// 5. reduction exactness on 50 random assembled even operators
void criterion5() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> dn(0, 1);
  const Grid g = make_grid(1.0, 3);
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = Complex(dn(rng), dn(rng));
    SpMat asp(n, n);
    {
      std::vector<Eigen::Triplet<Complex>> ts;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ts.emplace_back(i, j, a(i, j));
      asp.setFromTriplets(ts.begin(), ts.end());
    }
    const SymOp til = assemble_even(g, asp, SpMat(asp.adjoint()));
    const EvenToOddReduction red = reduce_even_to_odd(til);
    if (!(red.anticommutation_residual <= 1e-12)) {
      ok = false;
      detail += "residual trial " + std::to_string(trial) + " ";
    }
    // exact decomposition
    if ((dense(red.til_d_prime.matrix) + dense(red.til_m.matrix) - dense(til.matrix))
            .cwiseAbs()
            .maxCoeff() != 0.0) {
      ok = false;
      detail += "decomposition ";
    }
    // split/assemble round trip
    const EvenSplit sp = split_even(til);
    const CMatrix rec = Complex(0, 1) * dense(sp.d.matrix) + dense(sp.m.matrix);
    if ((rec - a).cwiseAbs().maxCoeff() > 1e-12 * a.cwiseAbs().maxCoeff()) {
      ok = false;
      detail += "round trip ";
    }
  }
  // anticommutator of a doubled operator with its Clifford action: exact zero
  const Grid gg = make_grid(10.0, 201);
  const SymOp dbl = double_odd(first_order(gg, [](double x) { return x; }));
  if (op_norm(anticommutator(dbl.matrix, *dbl.clifford)) != 0.0) {
    ok = false;
    detail += "doubled anticommutator";
  }
  report(5, "even-to-odd reduction exact on 50 random assembled operators", ok, detail);
}

// ---------------------------------------------------------------------------
// 6. stability proxy: a (F_{D+x} - F_D) has sigma_64/sigma_1 <= 1e-2 with
//    ratio drift <= 20% between n = 2001 and n = 4001; M = 0 is exactly zero
void criterion6() {
  const Grid g = make_grid(20.0, 2001);  // refinement inside the check reaches 4001
  const SymOp d = first_order(g, [](double) { return 0.0; });
  AlgebraElement x;
  x.fn = sample_real([](double t) { return t; }, g);
  x.sampler = [](double t) { return t; };
  const AlgebraElement a = bump(g, 5.0);

  bool ok = true;
  std::string detail;
  const CompactnessProfile p = perturbation_class_check(d, multiplication(x), a);
  if (!(p.ratio <= 1e-2 && p.refined_ratio <= 1e-2)) {
    ok = false;
    detail += "ratio " + std::to_string(p.ratio) + "/" + std::to_string(p.refined_ratio) + " ";
  }
  if (!p.refinement_stable) {
    ok = false;
    detail += "drift " + std::to_string(std::abs(p.refined_ratio - p.ratio) / p.ratio) + " ";
  }
  const CompactnessProfile zero = perturbation_class_check(d, zero_op(g), a);
  if (!zero.exact_zero) {
    ok = false;
    detail += "M=0 not exactly zero";
  }
  report(6, "bounded-transform stability proxy sigma_64/sigma_1 <= 1e-2, drift <= 20%", ok, detail);
}

// ---------------------------------------------------------------------------
// 7. finite-module battery: 100 seeded instances per identity at 1e-12,
//    with injected asymmetric perturbations all failing
void criterion7() {
  const BatteryReport rep = check_lemma_battery(424242);
  bool ok = (rep.instances == 100) && (rep.failures == 0) && (rep.max_defect <= 1e-12);
  std::string detail = "max defect " + std::to_string(rep.max_defect);

  // injected asymmetric perturbations must all fail the local-global check
  const FiniteModule e = make_module({2, 3}, 2);
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix h = random_b_linear_operator(e, mix_seed(31337, trial), true);
    CMatrix pert = random_b_linear_operator(e, mix_seed(91337, trial), false);
    pert = CMatrix(pert - pert.adjoint());  // anti-Hermitian, nonzero
    if (pert.cwiseAbs().maxCoeff() < 1e-8) continue;
    const LocalGlobalVerdict v = check_local_global(e, CMatrix(h + pert));
    if (v.verdict) {
      ok = false;
      detail += " perturbation passed at trial " + std::to_string(trial);
      break;
    }
  }
  report(7, "finite-module battery: 100 instances per identity at 1e-12", ok, detail);
}

// ---------------------------------------------------------------------------
// 8. counterexample commutators match (2/k) sup |m phi_k| to 1e-10, diverge
//    for m = exp(x^2) and vanish for bounded m
void criterion8() {
  const Grid g = make_grid(12.0, 1201);
  const CutoffFamily fam = cutoff_family(plateau_profile(), abs_proper(), {1, 2, 3, 4, 5}, g);
  bool ok = true;
  std::string detail;

  const CounterexampleReport grow =
      counterexample_commutator([](double x) { return std::exp(x * x); }, fam);
  for (size_t i = 0; i < grow.ks.size(); ++i) {
    const double rel = std::abs(grow.matrix_norms[i] / grow.closed_form[i] - 1.0);
    if (rel > 1e-10) {
      ok = false;
      detail += "closed form k=" + std::to_string(grow.ks[i]) + " rel=" + std::to_string(rel) + " ";
    }
    if (i > 0 && !(grow.matrix_norms[i] > 2.0 * grow.matrix_norms[i - 1])) {
      ok = false;
      detail += "not diverging ";
    }
  }
  const CounterexampleReport tame =
      counterexample_commutator([](double x) { return std::cos(x); }, fam);
  for (size_t i = 0; i < tame.ks.size(); ++i) {
    const double rel = tame.closed_form[i] == 0.0
                           ? tame.matrix_norms[i]
                           : std::abs(tame.matrix_norms[i] / tame.closed_form[i] - 1.0);
    if (rel > 1e-10) {
      ok = false;
      detail += "bounded case k=" + std::to_string(tame.ks[i]) + " ";
    }
    if (!(tame.matrix_norms[i] <= 2.0 / tame.ks[i] + 1e-12)) {
      ok = false;
      detail += "bounded norm too large ";
    }
  }
  report(8, "matrix-multiplier counterexample matches the closed form to 1e-10", ok, detail);
}

// ---------------------------------------------------------------------------
// 9. determinism: identical config and seed give byte-identical report.json
//    up to the wall-clock field
void criterion9() {
  const std::string dir = OPCERT_TEST_DIR;
  const std::string cli = OPCERT_CLI_PATH;
  const std::string cfg = dir + "/acceptance_det.cfg";
  {
    std::ofstream out(cfg, std::ios::trunc);
    out << "[scenario]\nname = \"acceptance-det\"\nseed = 404\n\n"
        << "[operator]\nexpr = \"i_d_dx + x\"\ninterval = \"-inf,inf\"\n\n"
        << "[grid]\nhalf_width = 12.0\nn_points = 301\n\n"
        << "[cutoffs]\nindices = [1, 2, 3, 4]\n\n"
        << "[checks]\nrun = [\"deficiency\", \"adequacy\", \"finmod-battery\"]\n";
  }
  auto run_once = [&](const std::string& out_path) {
    const std::string cmd = cli + " run " + cfg + " --json-out " + out_path + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  auto strip = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream kept;
    std::string line;
    while (std::getline(in, line))
      if (line.find("wall_clock_ms") == std::string::npos) kept << line << "\n";
    return kept.str();
  };
  const int c1 = run_once(dir + "/acc_det1.json");
  const int c2 = run_once(dir + "/acc_det2.json");
  const std::string r1 = strip(dir + "/acc_det1.json");
  const std::string r2 = strip(dir + "/acc_det2.json");
  const bool ok = (c1 == 0) && (c2 == 0) && !r1.empty() && (r1 == r2);
  report(9, "byte-identical report.json for identical config and seed", ok,
         ok ? "" : "exit codes " + std::to_string(c1) + "," + std::to_string(c2));
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
