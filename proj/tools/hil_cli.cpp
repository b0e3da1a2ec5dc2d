// Batch front-end: deterministic scenario runs writing CSV / grid / matrix
// artifacts under out/<config-hash>/. Exit codes: 0 success (audit verdicts
// are data, not errors), 1 config error, 2 numerical failure.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hil/cgo.hpp"
#include "hil/config.hpp"
#include "hil/forward.hpp"
#include "hil/inversion.hpp"
#include "hil/linearize.hpp"
#include "hil/microlocal.hpp"

namespace fs = std::filesystem;
using namespace hil;

namespace {

struct Session {
  Scenario scn;
  Grid grid;
  DomainMasks masks;
  Rng rng;
  fs::path dir;

  explicit Session(Scenario s, const std::string& out_root)
      : scn(s),
        grid(make_grid(s.n)),
        masks(make_masks(grid, s.m_prime, s.m_dprime)),
        rng(s.seed),
        dir(fs::path(out_root) / s.hash) {
    fs::create_directories(dir);
  }

  std::ofstream open(const std::string& name, bool binary = false) {
    std::ofstream f(dir / name, binary ? std::ios::binary : std::ios::out);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    if (!binary) {
      f.precision(17);
      f << "# config " << scn.hash << "\n";
    }
    return f;
  }

  ScalarField coeff(const std::string& name) {
    auto it = scn.coeff.find(name);
    if (it == scn.coeff.end())
      throw ConfigError("config field coefficients." + name + ": required for modality " +
                        scn.modality);
    return coefficient_recipe(grid, masks, it->second, rng);
  }

  ScalarField coeff_or_zero(const std::string& name) {
    auto it = scn.coeff.find(name);
    if (it == scn.coeff.end()) {
      ScalarField z(grid);
      z.bd = Boundary(grid.n, 0.0);
      return z;
    }
    return coefficient_recipe(grid, masks, it->second, rng);
  }

  CoefficientSet coefficients() {
    CoefficientSet c;
    if (scn.modality == "umot") {
      c.mu = coeff_or_zero("mu");
    } else if (scn.modality == "qpat") {
      c.sigma = coeff_or_zero("sigma");
      c.gamma = coeff_or_zero("gamma");
    } else {
      c.sigma = coeff_or_zero("sigma");
      c.p = scn.p;
    }
    return c;
  }

  std::vector<Boundary> boundaries() {
    std::vector<std::string> recipes = scn.boundary;
    if (recipes.empty()) {
      if (scn.modality == "qpat")
        recipes = {"exp " + std::to_string(scn.lambda) + " 1 0"};
      else if (scn.modality == "umot")
        recipes = {"affine 1 0.5 0.25"};
      else
        recipes = {"x1", "x2"};
    }
    std::vector<Boundary> out;
    for (const auto& r : recipes) out.push_back(boundary_recipe(grid, r));
    return out;
  }

  BoundaryCondition umot_B(const Boundary& f) { return BoundaryCondition::dirichlet(f); }
  BoundaryCondition umot_C() {
    return BoundaryCondition::robin(grid, 1.0, Boundary(grid.n, 0.0));
  }
  BoundaryNode umot_eta() { return {Side::Bottom, (grid.n - 1) / 2}; }

  void dump_field(const std::string& stem, const ScalarField& f) {
    auto txt = open(stem + ".txt");
    dump_grid_text(txt, f);
    auto bin = open(stem + ".bin", true);
    dump_grid_binary(bin, f);
  }
};

std::vector<InternalData> forward_all(Session& s) {
  CoefficientSet c = s.coefficients();
  auto fs_ = s.boundaries();
  std::vector<InternalData> out;
  if (s.scn.modality == "umot") {
    out.push_back(umot_data(c, s.umot_B(fs_[0]), s.umot_eta(), s.umot_C()));
  } else if (s.scn.modality == "qpat") {
    for (const auto& f : fs_) out.push_back(qpat_data(c, f));
  } else if (s.scn.modality == "aet-cross") {
    if (fs_.size() < 2) throw ConfigError("config field boundary.f2: aet-cross needs two");
    out.push_back(cross_power(c, fs_[0], fs_[1]));
  } else {
    for (const auto& f : fs_) out.push_back(power_density(c, f));
  }
  return out;
}

std::vector<LinearMap> maps_all(Session& s) {
  CoefficientSet c = s.coefficients();
  auto fs_ = s.boundaries();
  std::vector<LinearMap> out;
  if (s.scn.modality == "umot") {
    out.push_back(umot_dF(c, s.umot_B(fs_[0]), s.umot_eta(), s.umot_C()));
  } else if (s.scn.modality == "qpat") {
    for (const auto& f : fs_) out.push_back(qpat_dF(c, f));
  } else if (s.scn.modality == "aet-cross") {
    if (fs_.size() < 2) throw ConfigError("config field boundary.f2: aet-cross needs two");
    out.push_back(aet_cross_dF(c, fs_[0], fs_[1]));
  } else {
    for (const auto& f : fs_) out.push_back(aet_dF(c, f));
  }
  return out;
}

int cmd_forward(Session& s) {
  auto data = forward_all(s);
  for (size_t k = 0; k < data.size(); ++k) {
    std::string stem = "forward_" + std::to_string(k + 1);
    s.dump_field(stem, data[k].field);
    auto meta = s.open(stem + ".meta");
    meta << "modality " << modality_name(data[k].modality) << "\n";
    write_sidecar(meta, data[k]);
  }
  std::cout << "forward: " << data.size() << " dataset(s) -> " << s.dir.string() << "\n";
  return 0;
}

int cmd_linearize(Session& s) {
  CoefficientSet c = s.coefficients();
  auto fs_ = s.boundaries();
  auto maps = maps_all(s);
  DenseOperator op = maps.size() == 1 ? assemble(maps[0], s.masks)
                                      : assemble_stacked(maps, s.masks);
  auto bin = s.open("op.bin", true);
  dump_mat_binary(bin, op);

  auto csv = s.open("frechet.csv");
  csv << "map,eps,residual,ratio,pass\n";
  bool all_pass = true;
  for (size_t k = 0; k < maps.size(); ++k) {
    ScalarField dr = coefficient_recipe(s.grid, s.masks, "random-smooth 2 0.5", s.rng);
    ConvergenceReport rep;
    if (s.scn.modality == "umot") {
      auto fwd = [&](const ScalarField& d) {
        CoefficientSet cp = c;
        for (int i = 0; i < s.grid.count(); ++i) cp.mu->v[i] = c.mu->v[i] + d.v[i];
        return umot_data(cp, s.umot_B(fs_[0]), s.umot_eta(), s.umot_C()).field;
      };
      rep = validate_frechet(fwd, maps[k], dr, {1e-2, 5e-3, 2.5e-3});
    } else if (s.scn.modality == "qpat") {
      ScalarField dn = coefficient_recipe(s.grid, s.masks, "random-smooth 2 0.5", s.rng);
      auto fwd = [&](const ScalarField& a, const ScalarField& b) {
        CoefficientSet cp = c;
        for (int i = 0; i < s.grid.count(); ++i) {
          cp.sigma->v[i] = c.sigma->v[i] + a.v[i];
          cp.gamma->v[i] = c.gamma->v[i] + b.v[i];
        }
        return qpat_data(cp, fs_[k]).field;
      };
      rep = validate_frechet2(fwd, maps[k], dr, dn, {1e-2, 5e-3, 2.5e-3});
    } else {
      auto fwd = [&](const ScalarField& d) {
        CoefficientSet cp = c;
        for (int i = 0; i < s.grid.count(); ++i) cp.sigma->v[i] = c.sigma->v[i] + d.v[i];
        if (s.scn.modality == "aet-cross") return cross_power(cp, fs_[0], fs_[1]).field;
        return power_density(cp, fs_[k]).field;
      };
      rep = validate_frechet(fwd, maps[k], dr, {1e-2, 5e-3, 2.5e-3});
    }
    all_pass = all_pass && rep.pass;
    for (size_t r = 0; r < rep.epsilons.size(); ++r)
      csv << k + 1 << "," << rep.epsilons[r] << "," << rep.residuals[r] << ","
          << (r < rep.ratios.size() ? rep.ratios[r] : 0.0) << ","
          << (rep.pass ? "PASS" : "FAIL") << "\n";
  }
  std::cout << "linearize: frechet " << (all_pass ? "PASS" : "FAIL") << " -> "
            << s.dir.string() << "\n";
  return 0;
}

void write_audit_csv(std::ostream& os, const AuditReport& a) {
  os << "min_abs,max_abs,min_local_rel,argmin_x1,argmin_x2,argmin_xi_angle,verdict\n";
  os << a.min_abs << "," << a.max_abs << "," << a.min_local_rel << "," << a.argmin_x1
     << "," << a.argmin_x2 << "," << a.argmin_xi_angle << ","
     << (a.elliptic() ? "ELLIPTIC" : "DEGENERATE") << "\n";
}

int cmd_symbol_audit(Session& s) {
  CoefficientSet c = s.coefficients();
  AuditReport a;
  if (s.scn.modality == "umot") {
    ScalarField u0 = solve_schrodinger(c, s.umot_B(s.boundaries()[0]), ScalarField(s.grid));
    ScalarField G0 = greens_column(c, s.umot_C(), s.umot_eta());
    ScalarField chi = cutoff_chi(s.masks);
    a = audit_samples_prime(s.masks, 1, [&](int i, int j, double, double) {
      int k = s.grid.idx(i, j);
      return std::abs(umot_symbol(c.mu->v[k], u0.v[k], G0.v[k], chi.v[k].real()));
    });
  } else if (s.scn.modality == "qpat") {
    throw ConfigError("config field modality.kind: symbol-audit covers aet, p-small, "
                      "umot; use the sweep command for qpat");
  } else {
    ScalarField sig = *c.sigma;
    if (!sig.bd) sig.bd = Boundary(s.grid.n, 0.0);
    EllipticOp op = EllipticOp::divform(sig, nullptr);
    std::vector<VectorField> grads;
    for (const auto& f : s.boundaries())
      grads.push_back(gradient(op.solve(ScalarField(s.grid), f)));
    a = audit_samples(s.masks, s.scn.xi_angles, [&](int i, int j, double x1, double x2) {
      int k = s.grid.idx(i, j);
      double best = 0.0;
      for (const auto& gr : grads)
        best = std::max(best, std::abs(aet_symbol(sig.v[k], gr.x.v[k], gr.y.v[k],
                                                  s.scn.p, x1, x2)));
      return best;
    });
  }
  auto csv = s.open("audit.csv");
  write_audit_csv(csv, a);
  std::cout << "symbol-audit: " << (a.elliptic() ? "ELLIPTIC" : "DEGENERATE") << " -> "
            << s.dir.string() << "\n";
  return 0;
}

int cmd_cgo(Session& s) {
  ScalarField sig = s.coeff_or_zero("sigma");
  if (!sig.bd) sig.bd = Boundary(s.grid.n, 0.0);
  auto csv = s.open("cgo.csv");
  csv << "rho_mag,sup_psi,rho_sup_psi,remainder_residual,conductivity_residual\n";
  for (double rho : s.scn.cgo_rhos) {
    CgoSolution sol = make_cgo(sig, make_cgo_vector(rho, 0.0, 1.0));
    double sup_psi = max_abs(sol.psi);
    csv << rho << "," << sup_psi << "," << rho * sup_psi << "," << sol.residual << ","
        << cgo_conductivity_residual(sig, sol) << "\n";
  }
  std::cout << "cgo: " << s.scn.cgo_rhos.size() << " magnitude(s) -> " << s.dir.string()
            << "\n";
  return 0;
}

int cmd_sweep(Session& s) {
  DeformationPath path;
  if (s.scn.sweep_kind == "p-small")
    path.kind = PathKind::P_SMALL;
  else if (s.scn.sweep_kind == "aet")
    path.kind = PathKind::AET;
  else if (s.scn.sweep_kind == "qpat")
    path.kind = PathKind::QPAT;
  else
    throw ConfigError("config field sweep.kind: unknown kind " + s.scn.sweep_kind);
  path.p = s.scn.p;
  path.rho1 = s.scn.rho1;
  path.rho2 = s.scn.rho2;
  path.lambda = s.scn.lambda;
  path.t_samples = s.scn.t_samples;
  path.xi_angles = s.scn.xi_angles;
  ScalarField sig = s.coeff_or_zero("sigma");
  ScalarField gam = s.coeff_or_zero("gamma");
  SweepReport rep = deformation_sweep(path, sig, &gam, s.masks);
  auto csv = s.open("sweep.csv");
  write_sweep_csv(csv, rep);
  std::cout << "sweep: " << (rep.semi_fredholm_path ? "SEMI-FREDHOLM" : "DEGENERATE")
            << " overall_min " << rep.overall_min << " -> " << s.dir.string() << "\n";
  return 0;
}

int cmd_reconstruct(Session& s) {
  ScalarField rho_true = coefficient_recipe(s.grid, s.masks, s.scn.rho_true, s.rng);
  ReconResult r;
  int kernel_dim = 0;
  if (s.scn.method == "a0x1") {
    if (!(s.scn.p > 0.0 && s.scn.p < 1.0))
      throw ConfigError("config field modality.p: a0x1 needs 0 < p < 1");
    ScalarField data = reduced_a0x1(rho_true, s.scn.p);
    r = invert_A0x1(data, s.scn.p, s.masks, &rho_true);
  } else if (s.scn.method == "qpat-lambda") {
    double lam = s.scn.lambda;
    ScalarField nu_true = coefficient_recipe(s.grid, s.masks, s.scn.nu_true, s.rng);
    CoefficientSet c;
    c.sigma = ScalarField::from_function(
        s.grid, [&](double, double) { return std::log(1.0 / (lam * lam)); }, true);
    c.gamma = ScalarField(s.grid);
    auto tr = [&](double sx, double sy) {
      return Boundary::from_function(s.grid, [=](double x, double y) {
        return std::exp(lam * (sx * x + sy * y));
      });
    };
    ScalarField A11 = qpat_dF(c, tr(1, 0)).apply(rho_true, nu_true);
    ScalarField A12 = qpat_dF(c, tr(0, 1)).apply(rho_true, nu_true);
    ScalarField A22 = qpat_dF(c, tr(0, -1)).apply(rho_true, nu_true);
    r = qpat_lambda_reconstruct(lam, A11, A12, A22, s.masks, &rho_true, &nu_true);
  } else if (s.scn.method == "svd-pinv") {
    auto maps = maps_all(s);
    DenseOperator op = maps.size() == 1 ? assemble(maps[0], s.masks)
                                        : assemble_stacked(maps, s.masks);
    kernel_dim = svd_probe(op).numerical_kernel_dim;
    std::vector<ScalarField> data;
    std::vector<const ScalarField*> ptrs;
    if (maps[0].input_arity == 2) {
      ScalarField nu_true = coefficient_recipe(s.grid, s.masks, s.scn.nu_true, s.rng);
      for (auto& m : maps) data.push_back(m.apply(rho_true, nu_true));
    } else {
      for (auto& m : maps) data.push_back(m.apply(rho_true));
    }
    for (auto& d : data) ptrs.push_back(&d);
    r = svd_pinv_reconstruct(op, sample_rows(op, ptrs), s.grid, 1e-8, &rho_true);
  } else {
    throw ConfigError("config field reconstruct.method: unknown method " + s.scn.method);
  }
  s.dump_field("rho_hat", r.rho_hat);
  if (r.nu_hat) s.dump_field("nu_hat", *r.nu_hat);
  auto sum = s.open("summary.txt");
  const char* mname = r.method == ReconMethod::A0X1_BVP      ? "A0X1_BVP"
                      : r.method == ReconMethod::QPAT_LAMBDA ? "QPAT_LAMBDA"
                                                             : "SVD_PINV";
  sum << mname << " " << r.rel_l2_error << " " << kernel_dim << "\n";
  std::cout << "reconstruct: " << mname << " rel_l2_error " << r.rel_l2_error << " -> "
            << s.dir.string() << "\n";
  return 0;
}

int cmd_spectrum(Session& s) {
  auto maps = maps_all(s);
  DenseOperator op = maps.size() == 1 ? assemble(maps[0], s.masks)
                                      : assemble_stacked(maps, s.masks);
  SpectrumReport rep = svd_probe(op);
  auto csv = s.open("spectrum.csv");
  write_spectrum_csv(csv, rep);
  std::cout << "spectrum: kernel_dim " << rep.numerical_kernel_dim << " condition "
            << rep.condition << " -> " << s.dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid-imaging numerical laboratory"};
  std::string config_path, out_dir = "out";
  int n_override = 0;
  long long seed_override = -1;
  app.add_option("--config", config_path, "scenario config path")->required();
  app.add_option("--out", out_dir, "output root directory");
  app.add_option("--n", n_override, "grid size override");
  app.add_option("--seed", seed_override, "rng seed override");
  app.require_subcommand(1);
  auto* c_forward = app.add_subcommand("forward", "emit internal data");
  auto* c_linearize = app.add_subcommand("linearize", "assemble dF + frechet report");
  auto* c_audit = app.add_subcommand("symbol-audit", "principal symbol audit");
  auto* c_cgo = app.add_subcommand("cgo", "cgo build + diagnostics");
  auto* c_sweep = app.add_subcommand("sweep", "deformation sweep");
  auto* c_recon = app.add_subcommand("reconstruct", "linearized reconstruction");
  auto* c_spec = app.add_subcommand("spectrum", "singular value probe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::string stage = "config";
  try {
    Scenario scn = load_scenario(config_path);
    if (n_override > 0) scn.n = n_override;
    if (seed_override >= 0) scn.seed = (std::uint64_t)seed_override;
    Session s(std::move(scn), out_dir);
    stage = app.get_subcommands()[0]->get_name();
    if (c_forward->parsed()) return cmd_forward(s);
    if (c_linearize->parsed()) return cmd_linearize(s);
    if (c_audit->parsed()) return cmd_symbol_audit(s);
    if (c_cgo->parsed()) return cmd_cgo(s);
    if (c_sweep->parsed()) return cmd_sweep(s);
    if (c_recon->parsed()) return cmd_reconstruct(s);
    if (c_spec->parsed()) return cmd_spectrum(s);
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error at stage " << stage << ": " << e.what() << "\n";
    return 2;
  }
}
