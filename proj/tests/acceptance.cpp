// Acceptance runner: one line per criterion, exit 0 iff all pass.
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hil/cgo.hpp"
#include "hil/config.hpp"
#include "hil/forward.hpp"
#include "hil/inversion.hpp"
#include "hil/linearize.hpp"
#include "hil/microlocal.hpp"

using namespace hil;
namespace fs = std::filesystem;

namespace {

double now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

ScalarField chi_bump(const Grid& g, const DomainMasks& m, double amp) {
  ScalarField chi = cutoff_chi(m);
  ScalarField f(g);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      double dx = g.x(i) - 0.5, dy = g.y(j) - 0.5;
      f.at(i, j) = amp * std::exp(-40 * (dx * dx + dy * dy)) * chi.at(i, j).real();
    }
  f.bd = Boundary(g.n, 0.0);
  return f;
}

// Gaussian times a quintic ramp vanishing on the Omega' collar, supported
// strictly inside Omega'; shared by the a0x1 ladder and the QPAT round trip.
ScalarField prime_bump(const Grid& g, double amp, double cx, double cy, double width) {
  ScalarField f(g);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      double x = g.x(i), y = g.x(j);
      double d = std::min(std::min(x, 1.0 - x), std::min(y, 1.0 - y));
      if (d < 0.25) continue;
      double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      double ramp = quintic_smoothstep(std::min(1.0, (d - 0.25) / 0.1));
      f.at(i, j) = amp * std::exp(-width * r2) * ramp;
    }
  return f;
}

double rel_err(const ScalarField& got, const ScalarField& truth) {
  double num = 0, den = 0;
  for (size_t k = 0; k < got.v.size(); ++k) {
    num += std::norm(got.v[k] - truth.v[k]);
    den += std::norm(truth.v[k]);
  }
  return std::sqrt(num / den);
}

struct UmotProbe {
  Grid g;
  DomainMasks m;
  CoefficientSet c;
  BoundaryCondition B, C;
  BoundaryNode eta;

  UmotProbe(int n, double amp)
      : g(make_grid(n)),
        m(make_masks(g)),
        B(BoundaryCondition::dirichlet(Boundary::from_function(
            g, [](double x, double y) { return 1.0 + 0.5 * x + 0.25 * y; }))),
        C(BoundaryCondition::robin(g, 1.0, Boundary(g.n, 0.0))),
        eta{Side::Bottom, (g.n - 1) / 2} {
    c.mu = amp == 0.0 ? ScalarField(g) : chi_bump(g, m, amp);
  }

  LinearMap lin() const { return umot_dF(c, B, eta, C); }
};

// --- criterion 1 -----------------------------------------------------------

bool frechet_ladders() {
  double t0 = now();
  Grid g = make_grid(31);
  DomainMasks m = make_masks(g);
  std::vector<double> eps = {1e-2, 5e-3, 2.5e-3};
  bool ok = true;
  auto rung_ok = [&](const ConvergenceReport& r) {
    if (!r.pass) return false;
    for (double v : r.ratios)
      if (v < 3.2 || v > 4.8) return false;
    return true;
  };
  for (int seed = 1; seed <= 3; ++seed) {
    Rng rng(seed);
    ScalarField base = coefficient_recipe(g, m, "random-smooth 3 0.3", rng);
    ScalarField dir = coefficient_recipe(g, m, "random-smooth 3 1.0", rng);
    {
      CoefficientSet c;
      c.sigma = base;
      c.p = 2.0;
      Boundary f = Boundary::from_function(g, [](double x, double y) { return x - 0.5 * y; });
      auto fwd = [&](const ScalarField& d) {
        CoefficientSet cp = c;
        for (int k = 0; k < g.count(); ++k) cp.sigma->v[k] = c.sigma->v[k] + d.v[k];
        return power_density(cp, f).field;
      };
      ok = ok && rung_ok(validate_frechet(fwd, aet_dF(c, f), dir, eps));
    }
    {
      CoefficientSet c;
      c.sigma = base;
      Boundary f1 = Boundary::from_function(g, [](double x, double y) { return x + 0.2 * y; });
      Boundary f2 = Boundary::from_function(g, [](double x, double y) { return y - 0.3 * x; });
      auto fwd = [&](const ScalarField& d) {
        CoefficientSet cp = c;
        for (int k = 0; k < g.count(); ++k) cp.sigma->v[k] = c.sigma->v[k] + d.v[k];
        return cross_power(cp, f1, f2).field;
      };
      ok = ok && rung_ok(validate_frechet(fwd, aet_cross_dF(c, f1, f2), dir, eps));
    }
    {
      Rng rq(100 + seed);
      CoefficientSet c;
      c.sigma = coefficient_recipe(g, m, "random-smooth 3 0.2", rq);
      c.gamma = coefficient_recipe(g, m, "random-smooth 3 0.15", rq);
      ScalarField dr = coefficient_recipe(g, m, "random-smooth 3 1.0", rq);
      ScalarField dn = coefficient_recipe(g, m, "random-smooth 3 1.0", rq);
      Boundary f = Boundary::from_function(g, [](double x, double y) { return 1.0 + 0.3 * x * y; });
      auto fwd = [&](const ScalarField& a, const ScalarField& b) {
        CoefficientSet cp = c;
        for (int k = 0; k < g.count(); ++k) {
          cp.sigma->v[k] = c.sigma->v[k] + a.v[k];
          cp.gamma->v[k] = c.gamma->v[k] + b.v[k];
        }
        return qpat_data(cp, f).field;
      };
      ok = ok && rung_ok(validate_frechet2(fwd, qpat_dF(c, f), dr, dn, eps));
    }
    {
      Rng ru(200 + seed);
      UmotProbe u(31, 0.0);
      u.c.mu = coefficient_recipe(g, m, "random-smooth 3 0.3", ru);
      ScalarField du = coefficient_recipe(g, m, "random-smooth 3 1.0", ru);
      auto fwd = [&](const ScalarField& d) {
        CoefficientSet cp = u.c;
        for (int k = 0; k < g.count(); ++k) cp.mu->v[k] = u.c.mu->v[k] + d.v[k];
        return umot_data(cp, u.B, u.eta, u.C).field;
      };
      ok = ok && rung_ok(validate_frechet(fwd, u.lin(), du, eps));
    }
  }
  double dt = now() - t0;
  ok = ok && dt <= 120.0;
  printf("%s criterion 1: frechet ladders, 4 maps x 3 seeded draws, ratios in [3.2,4.8] (%.1fs)\n",
         ok ? "PASS" : "FAIL", dt);
  return ok;
}

// --- criterion 2 -----------------------------------------------------------

bool umot_ellipticity() {
  double t0 = now();
  bool ok = true;
  for (double amp : {0.0, 0.5}) {
    UmotProbe p31(31, amp);
    // symbol audit on Omega', where the cutoff equals one
    ScalarField u0 = solve_schrodinger(p31.c, p31.B, ScalarField(p31.g));
    ScalarField G0 = greens_column(p31.c, p31.C, p31.eta);
    ScalarField chi = cutoff_chi(p31.m);
    AuditReport audit = audit_samples_prime(p31.m, 1, [&](int i, int j, double, double) {
      int k = p31.g.idx(i, j);
      return std::abs(
          umot_symbol(p31.c.mu->v[k], u0.v[k], G0.v[k], chi.v[k].real()));
    });
    ok = ok && audit.elliptic();

    SpectrumReport r31 = svd_probe(assemble(p31.lin(), p31.m));
    ok = ok && r31.numerical_kernel_dim == 0;

    // condition on the shared coarse trial subspace at n = 63:
    // coarse node (i, j) <-> fine node (2i+1, 2j+1)
    UmotProbe p63(63, amp);
    LinearMap lin63 = p63.lin();
    std::vector<int> coarse = p31.m.prime_nodes();
    Eigen::MatrixXcd M(coarse.size(), coarse.size());
    for (size_t cc = 0; cc < coarse.size(); ++cc) {
      int ci = coarse[cc] % p31.g.n, cj = coarse[cc] / p31.g.n;
      ScalarField basis(p63.g);
      basis.at(2 * ci + 1, 2 * cj + 1) = 1.0;
      ScalarField y = lin63.apply(basis);
      for (size_t rr = 0; rr < coarse.size(); ++rr) {
        int ri = coarse[rr] % p31.g.n, rj = coarse[rr] / p31.g.n;
        M((Eigen::Index)rr, (Eigen::Index)cc) = y.at(2 * ri + 1, 2 * rj + 1);
      }
    }
    DenseOperator sub;
    sub.matrix = std::move(M);
    SpectrumReport r63 = svd_probe(sub);
    double ratio = r63.condition / r31.condition;
    ok = ok && r63.numerical_kernel_dim == 0 && ratio >= 0.5 && ratio <= 2.0;
  }
  double dt = now() - t0;
  ok = ok && dt <= 300.0;
  printf("%s criterion 2: umot symbol elliptic, kernel dim 0, condition stable across n=31/63 (%.1fs)\n",
         ok ? "PASS" : "FAIL", dt);
  return ok;
}

// --- criterion 3 -----------------------------------------------------------

bool a0x1_round_trip() {
  double t0 = now();
  // reference data on a nested fine grid isolates the solver truncation
  Grid gf = make_grid(2047);
  ScalarField rf = prime_bump(gf, 1.0, 0.5, 0.5, 40.0);
  ScalarField df = reduced_a0x1(rf, 0.5);
  std::array<double, 2> e{};
  int k = 0;
  for (int n : {31, 63}) {
    Grid g = make_grid(n);
    DomainMasks m = make_masks(g);
    ScalarField rho = restrict_nested(rf, g);
    ScalarField data = restrict_nested(df, g);
    e[k++] = invert_A0x1(data, 0.5, m, &rho).rel_l2_error;
  }
  double ratio = e[0] / e[1];
  bool ok = e[1] <= 5e-3 && ratio >= 3.5 && ratio <= 4.5;
  double dt = now() - t0;
  printf("%s criterion 3: invert_A0x1 p=0.5 rel=%.3g at n=63, ratio=%.2f (%.1fs)\n",
         ok ? "PASS" : "FAIL", e[1], ratio, dt);
  return ok;
}

// --- criterion 4 -----------------------------------------------------------

bool p2_degeneracy_vs_stack() {
  double t0 = now();
  Grid g = make_grid(31);
  DomainMasks m = make_masks(g);
  CoefficientSet c;
  c.sigma = ScalarField(g);
  c.sigma->bd = Boundary(g.n, 0.0);
  c.p = 2.0;
  Boundary f1 = Boundary::from_function(g, [](double x, double) { return x; });
  Boundary f2 = Boundary::from_function(g, [](double, double y) { return y; });

  EllipticOp op = EllipticOp::divform(*c.sigma, nullptr);
  VectorField gu = gradient(op.solve(ScalarField(g), f1));
  const int na = 64;
  AuditReport audit = audit_samples(m, na, [&](int i, int j, double x1, double x2) {
    int k = g.idx(i, j);
    return std::abs(aet_symbol(0.0, gu.x.v[k], gu.y.v[k], 2.0, x1, x2));
  });
  double dist = 1e300;
  for (double ref : {M_PI / 4, 3 * M_PI / 4, 5 * M_PI / 4, 7 * M_PI / 4})
    dist = std::min(dist, std::abs(audit.argmin_xi_angle - ref));
  bool ok = !audit.elliptic() && dist <= 2.0 * M_PI / na;

  std::vector<LinearMap> maps = {aet_dF(c, f1), aet_dF(c, f2), aet_cross_dF(c, f1, f2)};
  DenseOperator S = assemble_stacked(maps, m);
  SpectrumReport sr = svd_probe(S);
  ok = ok && sr.numerical_kernel_dim == 0;

  ScalarField rho = prime_bump(g, 1.0, 0.5, 0.5, 60.0);
  ScalarField d1 = maps[0].apply(rho), d2 = maps[1].apply(rho), d3 = maps[2].apply(rho);
  ReconResult r = svd_pinv_reconstruct(S, sample_rows(S, {&d1, &d2, &d3}), g, 1e-8, &rho);
  ok = ok && r.rel_l2_error <= 1e-6;
  double dt = now() - t0;
  printf("%s criterion 4: p=2 symbol vanishes at xi1^2=1/2, stacked triple pinv rel=%.2g (%.1fs)\n",
         ok ? "PASS" : "FAIL", r.rel_l2_error, dt);
  return ok;
}

// --- criterion 5 -----------------------------------------------------------

struct QpatRun {
  Grid g;
  DomainMasks m;
  double e = 0.0;
};

QpatRun qpat_round_trip(int n, double lam) {
  QpatRun run{make_grid(n), make_masks(make_grid(n))};
  const Grid& g = run.g;
  CoefficientSet c;
  c.sigma = ScalarField::from_function(
      g, [&](double, double) { return std::log(1.0 / (lam * lam)); }, true);
  c.gamma = ScalarField(g);
  auto trace = [&](double sx, double sy) {
    return Boundary::from_function(
        g, [=](double x, double y) { return std::exp(lam * (sx * x + sy * y)); });
  };
  ScalarField rho = prime_bump(g, 0.8, 0.45, 0.55, 70.0);
  ScalarField nu = prime_bump(g, 0.6, 0.55, 0.45, 90.0);
  ScalarField A11 = qpat_dF(c, trace(1, 0)).apply(rho, nu);
  ScalarField A12 = qpat_dF(c, trace(0, 1)).apply(rho, nu);
  ScalarField A22 = qpat_dF(c, trace(0, -1)).apply(rho, nu);
  ReconResult r = qpat_lambda_reconstruct(lam, A11, A12, A22, run.m, &rho, &nu);
  run.e = r.rel_l2_error;
  return run;
}

// first-order coefficient vectors of the eliminated system at one node
void qpat_pp_coeffs(double lam, int n, int i, int j, double out[3]) {
  Grid g = make_grid(n);
  ScalarField sig0 = ScalarField::from_function(
      g, [&](double, double) { return std::log(1.0 / (lam * lam)); }, true);
  std::vector<cplx> one(g.count(), cplx(1.0, 0.0));
  EllipticOp L = EllipticOp::divform(sig0, &one);
  auto trace = [&](double sx, double sy) {
    return Boundary::from_function(
        g, [&](double x, double y) { return std::exp(lam * (sx * x + sy * y)); });
  };
  ScalarField u1 = L.solve(ScalarField(g), trace(1, 0));
  ScalarField u2 = L.solve(ScalarField(g), trace(0, 1));
  ScalarField u3 = L.solve(ScalarField(g), trace(0, -1));
  VectorField g1 = gradient(u1), g2 = gradient(u2), g3 = gradient(u3);
  double il2 = 1.0 / (lam * lam);
  int k = g.idx(i, j);
  cplx r1 = u1.v[k] / u2.v[k], r3 = u3.v[k] / u2.v[k];
  cplx c1x = il2 * (g1.x.v[k] - r1 * g2.x.v[k]);
  cplx c1y = il2 * (g1.y.v[k] - r1 * g2.y.v[k]);
  cplx c3x = il2 * (g3.x.v[k] - r3 * g2.x.v[k]);
  cplx c3y = il2 * (g3.y.v[k] - r3 * g2.y.v[k]);
  out[0] = (lam * c1x).real();          // coefficient of d1^2
  out[1] = (lam * (c1y - c3x)).real();  // coefficient of d1 d2
  out[2] = (-lam * c3y).real();         // coefficient of d2^2
}

bool qpat_lambda_criterion() {
  double t0 = now();
  const double lam = 0.1;
  QpatRun r31 = qpat_round_trip(31, lam);
  QpatRun r63 = qpat_round_trip(63, lam);
  // both sit at the solver's roundoff floor; "improving" is judged up to it
  bool ok = r63.e <= 2e-2 && (r63.e <= r31.e || r63.e <= 1e-8);

  // principal part vs the A_lambda coefficients e^{lam x1}, -e^{lam x1},
  // 2 e^{-lam x2}: h^2-extrapolated over the nested pair n = 63 / 127
  int nodes[5][2] = {{20, 20}, {40, 24}, {24, 40}, {31, 31}, {36, 36}};
  double worst = 0.0;
  for (auto& nd : nodes) {
    double a63[3], a127[3];
    qpat_pp_coeffs(lam, 63, nd[0], nd[1], a63);
    qpat_pp_coeffs(lam, 127, 2 * nd[0] + 1, 2 * nd[1] + 1, a127);
    Grid g = make_grid(63);
    double x = g.x(nd[0]), y = g.y(nd[1]);
    double ref[3] = {std::exp(lam * x), -std::exp(lam * x), 2.0 * std::exp(-lam * y)};
    for (int c = 0; c < 3; ++c) {
      double ex = (4.0 * a127[c] - a63[c]) / 3.0;
      worst = std::max(worst, std::abs(ex - ref[c]) / std::abs(ref[c]));
    }
  }
  ok = ok && worst <= 1e-8;
  double dt = now() - t0;
  ok = ok && dt <= 300.0;
  printf("%s criterion 5: qpat lambda=0.1 rel=%.2g at n=63, principal part rel=%.2g (%.1fs)\n",
         ok ? "PASS" : "FAIL", r63.e, worst, dt);
  return ok;
}

// --- criterion 6 -----------------------------------------------------------

bool cgo_diagnostics() {
  double t0 = now();
  Grid g = make_grid(63);
  DomainMasks m = make_masks(g);
  bool ok = true;

  ScalarField zero(g);
  zero.bd = Boundary(g.n, 0.0);
  CgoSolution s0 = make_cgo(zero, make_cgo_vector(8.0, 0.0, 1.0));
  for (const auto& z : s0.psi.v) ok = ok && z == cplx(0.0, 0.0);

  ScalarField sig = chi_bump(g, m, 0.3);
  std::vector<double> rhos = {5.0, 10.0, 20.0, 40.0};
  double lo = 1e300, hi = 0.0;
  std::vector<double> gradbigger;
  EllipticOp op = EllipticOp::divform(sig, nullptr);
  Boundary f = Boundary::from_function(
      g, [](double x, double y) { return 1.0 + 0.5 * x + 0.25 * y; });
  ScalarField u = op.solve(ScalarField(g), f);
  VectorField gu = gradient(u);
  for (double rho : rhos) {
    CgoSolution s = make_cgo(sig, make_cgo_vector(rho, 0.0, 1.0));
    double mp = 0.0;
    for (const auto& z : s.psi.v) mp = std::max(mp, std::abs(z));
    lo = std::min(lo, rho * mp);
    hi = std::max(hi, rho * mp);
    CgoImag im = cgo_imag_parts(s);
    double num = 0.0, den = 0.0;
    for (int node : m.dprime_nodes()) {
      num += std::norm(im.u_I.v[node] * gu.x.v[node]) +
             std::norm(im.u_I.v[node] * gu.y.v[node]);
      den += std::norm(u.v[node] * im.grad_u_I.x.v[node]) +
             std::norm(u.v[node] * im.grad_u_I.y.v[node]);
    }
    gradbigger.push_back(std::sqrt(num / den));
  }
  ok = ok && hi / lo <= 4.0;
  for (size_t i = 1; i < gradbigger.size(); ++i) {
    double slope = std::log(gradbigger[i] / gradbigger[i - 1]) / std::log(2.0);
    ok = ok && slope >= -1.3 && slope <= -0.7;
  }
  double dt = now() - t0;
  printf("%s criterion 6: cgo psi=0 at sigma=0, sup|rho psi| spread=%.2f, slope in -1+/-0.3 (%.1fs)\n",
         ok ? "PASS" : "FAIL", hi / lo, dt);
  return ok;
}

// --- criterion 7 -----------------------------------------------------------

bool deformation_sweeps() {
  double t0 = now();
  Grid g = make_grid(31);
  DomainMasks m = make_masks(g);
  ScalarField sig = chi_bump(g, m, 0.3);
  SweepReport a = sweep_p_small(sig, 0.5, m, 20.0, 11, 64);
  SweepReport b = sweep_aet(sig, m, 20.0, 20.0 * M_SQRT2, 11, 64);
  bool ok = a.semi_fredholm_path && b.semi_fredholm_path && a.overall_min > 0.0 &&
            b.overall_min > 0.0;
  for (const auto& e : a.entries) ok = ok && e.coverage.elliptic();
  for (const auto& e : b.entries) ok = ok && e.coverage.elliptic();
  double dt = now() - t0;
  ok = ok && dt <= 600.0;
  printf("%s criterion 7: deformation chains min=%.3g/%.3g, coverage at all 33+33 samples (%.1fs)\n",
         ok ? "PASS" : "FAIL", a.overall_min, b.overall_min, dt);
  return ok;
}

// --- criterion 8 -----------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool cli_deterministic(const fs::path& work) {
  fs::create_directories(work);
  std::ofstream(work / "acc.cfg")
      << "[grid]\nn = 24\n[modality]\nkind = aet\np = 0.5\n"
         "[boundary]\nf1 = x1\nf2 = x2\n";
  auto run = [&](const std::string& out) {
    std::string cmd = std::string(HIL_CLI_PATH) + " --config " +
                      (work / "acc.cfg").string() + " --out " + (work / out).string() +
                      " forward >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  if (!run("a") || !run("b")) return false;
  auto only_dir = [](const fs::path& root) -> fs::path {
    for (const auto& e : fs::directory_iterator(root)) return e.path();
    return {};
  };
  fs::path da = only_dir(work / "a"), db = only_dir(work / "b");
  if (da.empty() || db.empty()) return false;
  for (const char* f : {"forward_1.txt", "forward_1.bin", "forward_2.txt", "forward_2.bin"})
    if (slurp(da / f).empty() || slurp(da / f) != slurp(db / f)) return false;
  return true;
}

bool infrastructure_invariants() {
  double t0 = now();
  bool ok = true;

  // summation by parts on random zero-boundary fields
  {
    Grid g = make_grid(31);
    Rng rng(8);
    ScalarField u(g);
    VectorField w(g);
    u.bd = Boundary(g.n, 0.0);
    w.x.bd = Boundary(g.n, 0.0);
    w.y.bd = Boundary(g.n, 0.0);
    for (int k = 0; k < g.count(); ++k) {
      u.v[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      w.x.v[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      w.y.v[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    }
    cplx lhs = inner(gradient(u), w), rhs = inner(u, divergence(w));
    ok = ok && std::abs(lhs + rhs) <= 1e-12 * norm_l2(u) * norm_l2(w);
  }

  // discrete maximum principle for the conductivity solve
  {
    Grid g = make_grid(24);
    CoefficientSet c;
    c.sigma = ScalarField::from_function(
        g, [](double x, double y) { return 0.5 * std::sin(3 * x) * std::cos(2 * y); },
        true);
    Boundary f = Boundary::from_function(
        g, [](double x, double y) { return std::cos(4 * x + y); });
    ScalarField u = solve_conductivity(c, f);
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < g.n; ++k)
      for (cplx z : {f.bottom[k], f.top[k], f.left[k], f.right[k]}) {
        lo = std::min(lo, z.real());
        hi = std::max(hi, z.real());
      }
    for (int k = 0; k < g.count(); ++k)
      ok = ok && u.v[k].real() >= lo - 1e-12 && u.v[k].real() <= hi + 1e-12;
  }

  // Green's column positivity
  {
    Grid g = make_grid(24);
    CoefficientSet c;
    c.mu = ScalarField::from_function(
        g, [](double x, double y) { return 0.3 * std::sin(2 * x + y); });
    auto bc = BoundaryCondition::dirichlet(Boundary(g.n, 0.0));
    ScalarField G = greens_column(c, bc, BoundaryNode{Side::Left, 7});
    for (int k = 0; k < g.count(); ++k) ok = ok && G.v[k].real() > 0.0;
  }

  bool det = cli_deterministic(fs::temp_directory_path() / "hil_acceptance");
  ok = ok && det;
  double dt = now() - t0;
  printf("%s criterion 8: sbp, max principle, Green positivity, byte-deterministic cli (%.1fs)\n",
         ok ? "PASS" : "FAIL", dt);
  return ok;
}

}  // namespace

int main() {
  int failed = 0;
  failed += !frechet_ladders();
  failed += !umot_ellipticity();
  failed += !a0x1_round_trip();
  failed += !p2_degeneracy_vs_stack();
  failed += !qpat_lambda_criterion();
  failed += !cgo_diagnostics();
  failed += !deformation_sweeps();
  failed += !infrastructure_invariants();
  printf("%s: %d/8 criteria passed\n", failed == 0 ? "ACCEPTED" : "REJECTED", 8 - failed);
  return failed == 0 ? 0 : 1;
}
