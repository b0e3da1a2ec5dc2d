#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "hil/cgo.hpp"
#include "hil/elliptic.hpp"

namespace hil {

// --- pointwise principal symbols ------------------------------------------

namespace detail {

inline void require_unit(double x1, double x2) {
  if (std::abs(std::hypot(x1, x2) - 1.0) > 1e-14)
    throw std::invalid_argument("symbol: xi must be a unit covector");
}

}  // namespace detail

// A_{sigma,f}(x,xi) = e^{2 sigma/p}(2/p)(grad u . grad u - p (grad u . xi)^2),
// bilinear products, |xi| = 1.
inline cplx aet_symbol(cplx sigma, cplx gx, cplx gy, double p, double xi1, double xi2) {
  detail::require_unit(xi1, xi2);
  cplx gdotg = gx * gx + gy * gy;
  cplx gdotxi = gx * xi1 + gy * xi2;
  return std::exp(2.0 * sigma / p) * (2.0 / p) * (gdotg - p * gdotxi * gdotxi);
}

// Symbol of the cross-functional derivative: 2 e^{2 sigma}(g1.g2 - (g1.xi)(g2.xi)).
inline cplx aet_cross_symbol(cplx sigma, cplx g1x, cplx g1y, cplx g2x, cplx g2y,
                             double xi1, double xi2) {
  detail::require_unit(xi1, xi2);
  cplx a = g1x * g2x + g1y * g2y;
  cplx b = (g1x * xi1 + g1y * xi2) * (g2x * xi1 + g2y * xi2);
  return 2.0 * std::exp(2.0 * sigma) * (a - b);
}

// UMOT symbol -2 chi^2 e^{mu0} u0 G0 (zeta^2 = 1 on the unit sphere).
inline cplx umot_symbol(cplx mu0, cplx u0, cplx G0, double chi) {
  return -2.0 * chi * chi * std::exp(mu0) * u0 * G0;
}

// 2J x 2 QPAT block with rows chi^2 (i xi.grad u_j, u_j) and the per-pair
// 2x2 determinants (consecutive rows 2j, 2j+1).
struct QpatSymbolBlock {
  Eigen::MatrixXcd block;
  std::vector<cplx> dets;
};

inline QpatSymbolBlock qpat_symbol_block(const std::vector<cplx>& u_values,
                                         const std::vector<std::array<cplx, 2>>& grads,
                                         double chi, double xi1, double xi2) {
  detail::require_unit(xi1, xi2);
  if (u_values.size() != grads.size() || u_values.empty() || u_values.size() % 2 != 0)
    throw std::invalid_argument("qpat_symbol_block: need 2J matching values/gradients");
  const cplx I{0.0, 1.0};
  QpatSymbolBlock out;
  out.block.resize((Eigen::Index)u_values.size(), 2);
  double c2 = chi * chi;
  for (size_t j = 0; j < u_values.size(); ++j) {
    cplx gxi = grads[j][0] * xi1 + grads[j][1] * xi2;
    out.block((Eigen::Index)j, 0) = c2 * I * gxi;
    out.block((Eigen::Index)j, 1) = c2 * u_values[j];
  }
  for (size_t j = 0; j + 1 < u_values.size(); j += 2)
    out.dets.push_back(out.block(j, 0) * out.block(j + 1, 1) -
                       out.block(j, 1) * out.block(j + 1, 0));
  return out;
}

// Bracket vector of the p<1 ellipticity argument:
// (k_perp - p (xi.k_perp) xi) cos(theta) + (k - p (xi.k) xi) sin(theta).
struct BracketResult {
  std::array<double, 2> vec;
  double norm;
};

inline BracketResult bracket_check(std::array<double, 2> k, std::array<double, 2> k_perp,
                                   double p, std::array<double, 2> xi, double theta) {
  detail::require_unit(xi[0], xi[1]);
  if (std::abs(k[0] * k_perp[0] + k[1] * k_perp[1]) > 1e-14 ||
      std::abs(std::hypot(k[0], k[1]) - 1.0) > 1e-14 ||
      std::abs(std::hypot(k_perp[0], k_perp[1]) - 1.0) > 1e-14)
    throw std::invalid_argument("bracket_check: k, k_perp must be orthonormal");
  double xk = xi[0] * k[0] + xi[1] * k[1];
  double xkp = xi[0] * k_perp[0] + xi[1] * k_perp[1];
  double c = std::cos(theta), s = std::sin(theta);
  BracketResult r;
  for (int d = 0; d < 2; ++d)
    r.vec[d] = (k_perp[d] - p * xkp * xi[d]) * c + (k[d] - p * xk * xi[d]) * s;
  r.norm = std::hypot(r.vec[0], r.vec[1]);
  return r;
}

// --- audits ----------------------------------------------------------------

struct AuditReport {
  double min_abs = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  double argmin_x1 = 0.0, argmin_x2 = 0.0, argmin_xi_angle = 0.0;
  long samples = 0;
  double threshold_rel = 1e-8;
  // worst over x of (min magnitude at x) / (max magnitude at x); CGO-driven
  // symbols vary like exp(2 s k.x) across Omega'', so non-vanishing must be
  // judged against the local amplitude, not the global max
  double min_local_rel = std::numeric_limits<double>::infinity();
  bool elliptic() const {
    return samples > 0 && (min_abs >= threshold_rel * max_abs ||
                           min_local_rel >= threshold_rel);
  }
};

namespace detail {

// Shared audit loop over the nodes selected by `keep`.
template <typename Keep, typename F>
AuditReport audit_nodes(const DomainMasks& m, int nangles, Keep keep, F f) {
  AuditReport rep;
  const Grid& g = m.grid;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      if (!keep(i, j)) continue;
      double local_min = std::numeric_limits<double>::infinity(), local_max = 0.0;
      for (int a = 0; a < nangles; ++a) {
        double ang = 2.0 * M_PI * a / nangles;
        double v = f(i, j, std::cos(ang), std::sin(ang));
        ++rep.samples;
        rep.max_abs = std::max(rep.max_abs, v);
        local_min = std::min(local_min, v);
        local_max = std::max(local_max, v);
        if (v < rep.min_abs) {
          rep.min_abs = v;
          rep.argmin_x1 = g.x(i);
          rep.argmin_x2 = g.y(j);
          rep.argmin_xi_angle = ang;
        }
      }
      rep.min_local_rel = std::min(
          rep.min_local_rel, local_max > 0.0 ? local_min / local_max : 0.0);
    }
  return rep;
}

}  // namespace detail

// Generic sample audit: f(i, j, xi1, xi2) -> magnitude, over Omega'' nodes and
// equispaced covector angles.
template <typename F>
AuditReport audit_samples(const DomainMasks& m, int nangles, F f) {
  return detail::audit_nodes(
      m, nangles, [&](int i, int j) { return m.in_dprime(i, j); }, f);
}

// Same audit restricted to Omega'; symbols carrying the cutoff vanish in the
// Omega'' collar by construction, so their ellipticity claim lives here.
template <typename F>
AuditReport audit_samples_prime(const DomainMasks& m, int nangles, F f) {
  return detail::audit_nodes(
      m, nangles, [&](int i, int j) { return m.in_prime(i, j); }, f);
}

// Smallest singular value of the 2 x k matrix of field values at each Omega''
// node; xi plays no role here, argmin_xi_angle stays 0.
inline AuditReport spanning_audit(const std::vector<VectorField>& fields,
                                  const DomainMasks& m) {
  if (fields.size() < 2)
    throw std::invalid_argument("spanning_audit: need at least two fields");
  AuditReport rep;
  const Grid& g = m.grid;
  Eigen::MatrixXcd A(2, (Eigen::Index)fields.size());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      if (!m.in_dprime(i, j)) continue;
      int k = g.idx(i, j);
      for (size_t c = 0; c < fields.size(); ++c) {
        A(0, (Eigen::Index)c) = fields[c].x.v[k];
        A(1, (Eigen::Index)c) = fields[c].y.v[k];
      }
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
      double smin = svd.singularValues().minCoeff();
      double smax = svd.singularValues().maxCoeff();
      ++rep.samples;
      rep.max_abs = std::max(rep.max_abs, smax);
      // spanning is a property of directions; judge the verdict on the
      // column-normalized matrix so per-field amplitude cannot mask it
      Eigen::MatrixXcd An = A;
      for (Eigen::Index c = 0; c < An.cols(); ++c) {
        double nc = An.col(c).norm();
        if (nc > 0.0) An.col(c) /= nc;
      }
      Eigen::JacobiSVD<Eigen::MatrixXcd> svdn(An);
      double nmin = svdn.singularValues().minCoeff();
      double nmax = svdn.singularValues().maxCoeff();
      rep.min_local_rel =
          std::min(rep.min_local_rel, nmax > 0.0 ? nmin / nmax : 0.0);
      if (smin < rep.min_abs) {
        rep.min_abs = smin;
        rep.argmin_x1 = g.x(i);
        rep.argmin_x2 = g.y(j);
      }
    }
  return rep;
}

// --- deformation sweeps ----------------------------------------------------

struct SweepEntry {
  double t = 0.0;  // global path coordinate: leg index + local t
  AuditReport coverage;
  std::optional<AuditReport> spanning;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  double overall_min = std::numeric_limits<double>::infinity();
  bool semi_fredholm_path = false;
};

inline void finish_sweep(SweepReport& rep) {
  rep.semi_fredholm_path = !rep.entries.empty();
  for (const auto& e : rep.entries) {
    rep.overall_min = std::min(rep.overall_min, e.coverage.min_abs);
    if (!e.coverage.elliptic()) rep.semi_fredholm_path = false;
    if (e.spanning && !e.spanning->elliptic()) rep.semi_fredholm_path = false;
  }
}

inline void write_sweep_csv(std::ostream& os, const SweepReport& rep) {
  os << "t,min_abs,argmin_x1,argmin_x2,argmin_xi_angle,verdict\n";
  os.precision(17);
  for (const auto& e : rep.entries)
    os << e.t << "," << e.coverage.min_abs << "," << e.coverage.argmin_x1 << ","
       << e.coverage.argmin_x2 << "," << e.coverage.argmin_xi_angle << ","
       << (e.coverage.elliptic() ? "ELLIPTIC" : "DEGENERATE") << "\n";
}

namespace detail {

inline Boundary lerp_boundary(const Boundary& a, const Boundary& b, double t) {
  // (1-t) a + i t b
  Boundary out = a;
  const cplx I{0.0, 1.0};
  int n = (int)a.bottom.size();
  for (int k = 0; k < n; ++k) {
    out.bottom[k] = (1.0 - t) * a.bottom[k] + I * t * b.bottom[k];
    out.top[k] = (1.0 - t) * a.top[k] + I * t * b.top[k];
    out.left[k] = (1.0 - t) * a.left[k] + I * t * b.left[k];
    out.right[k] = (1.0 - t) * a.right[k] + I * t * b.right[k];
  }
  return out;
}

inline ScalarField scale_field(const ScalarField& f, double s) {
  ScalarField out = f;
  for (auto& z : out.v) z *= s;
  if (out.bd)
    for (int k = 0; k < out.grid.n; ++k) {
      out.bd->bottom[k] *= s;
      out.bd->top[k] *= s;
      out.bd->left[k] *= s;
      out.bd->right[k] *= s;
    }
  return out;
}

}  // namespace detail

// p < 1 chain: (sigma, x1, x2) ~> (sigma, i f^I) ~> (0, i f^I) ~> (0, x1, x2),
// coverage over the two single-measurement symbols at every (x, xi, t).
inline SweepReport sweep_p_small(const ScalarField& sigma, double p,
                                 const DomainMasks& masks, double rho_mag = 20.0,
                                 int nt = 5, int nangles = 64) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("sweep_p_small: need 0 < p < 1");
  const Grid& g = sigma.grid;
  ScalarField sig = sigma;
  if (!sig.bd) sig.bd = Boundary(g.n, 0.0);
  CgoVector r = make_cgo_vector(rho_mag, 0.0, 1.0);  // k = e2, k_perp = -e1

  Boundary f1 = Boundary::from_function(g, [](double x, double) { return x; });
  Boundary f2 = Boundary::from_function(g, [](double, double y) { return y; });

  SweepReport rep;
  auto audit_pair = [&](const ScalarField& sig_t, const std::vector<Boundary>& data,
                        double tglobal) {
    EllipticOp op = EllipticOp::divform(sig_t, nullptr);
    std::vector<VectorField> grads;
    for (const auto& f : data) grads.push_back(gradient(op.solve(ScalarField(g), f)));
    SweepEntry e;
    e.t = tglobal;
    e.coverage = audit_samples(masks, nangles, [&](int i, int j, double x1, double x2) {
      int k = g.idx(i, j);
      double best = 0.0;
      for (const auto& gr : grads)
        best = std::max(best, std::abs(aet_symbol(sig_t.v[k], gr.x.v[k], gr.y.v[k], p,
                                                  x1, x2)));
      return best;
    });
    rep.entries.push_back(std::move(e));
  };

  // leg 1: fixed sigma, data rotates into i f^I_{sigma, rho}
  Boundary fI = cgo_imag_parts(make_cgo(sig, r)).f_I;
  for (int s = 0; s < nt; ++s) {
    double t = double(s) / (nt - 1);
    audit_pair(sig, {detail::lerp_boundary(f1, fI, t), detail::lerp_boundary(f2, fI, t)},
               t);
  }
  // leg 2: sigma_t = (1-t) sigma, data i f^I_{sigma_t, rho}
  const cplx I{0.0, 1.0};
  for (int s = 0; s < nt; ++s) {
    double t = double(s) / (nt - 1);
    ScalarField sig_t = detail::scale_field(sig, 1.0 - t);
    Boundary fIt = cgo_imag_parts(make_cgo(sig_t, r)).f_I;
    Boundary zero(g.n, 0.0);
    audit_pair(sig_t, {detail::lerp_boundary(zero, fIt, 1.0)}, 1.0 + t);
  }
  // leg 3: sigma = 0, data rotates back from i f^I_{0, rho} to (x1, x2)
  ScalarField zero_sig(g);
  zero_sig.bd = Boundary(g.n, 0.0);
  Boundary fI0 = cgo_imag_parts(make_cgo(zero_sig, r)).f_I;
  for (int s = 0; s < nt; ++s) {
    double t = double(s) / (nt - 1);
    audit_pair(zero_sig,
               {detail::lerp_boundary(f1, fI0, 1.0 - t), detail::lerp_boundary(f2, fI0, 1.0 - t)},
               2.0 + t);
  }
  finish_sweep(rep);
  return rep;
}

// AET (p = 2) chain with two rationally independent CGO magnitudes sharing
// k_perp; coverage over the two single symbols and the cross symbol, spanning
// audit of the CGO gradients on the middle leg.
inline SweepReport sweep_aet(const ScalarField& sigma, const DomainMasks& masks,
                             double rho1 = 20.0, double rho2 = 20.0 * M_SQRT2,
                             int nt = 5, int nangles = 64) {
  const Grid& g = sigma.grid;
  ScalarField sig = sigma;
  if (!sig.bd) sig.bd = Boundary(g.n, 0.0);
  // k = e2 for both, k_perp = -e1; theta_l = -rho_l x1 / sqrt2
  CgoVector r1 = make_cgo_vector(rho1, 0.0, 1.0);
  CgoVector r2 = make_cgo_vector(rho2, 0.0, 1.0);
  Boundary f1 = Boundary::from_function(g, [](double x, double) { return x; });
  Boundary f2 = Boundary::from_function(g, [](double, double y) { return y; });

  SweepReport rep;
  auto audit_t = [&](const ScalarField& sig_t, const Boundary& d1, const Boundary& d2,
                     double tglobal, bool with_spanning) {
    EllipticOp op = EllipticOp::divform(sig_t, nullptr);
    VectorField g1 = gradient(op.solve(ScalarField(g), d1));
    VectorField g2 = gradient(op.solve(ScalarField(g), d2));
    SweepEntry e;
    e.t = tglobal;
    e.coverage = audit_samples(masks, nangles, [&](int i, int j, double x1, double x2) {
      int k = g.idx(i, j);
      double best = std::abs(
          aet_symbol(sig_t.v[k], g1.x.v[k], g1.y.v[k], 2.0, x1, x2));
      best = std::max(best, std::abs(aet_symbol(sig_t.v[k], g2.x.v[k], g2.y.v[k], 2.0,
                                                x1, x2)));
      best = std::max(best,
                      std::abs(aet_cross_symbol(sig_t.v[k], g1.x.v[k], g1.y.v[k],
                                                g2.x.v[k], g2.y.v[k], x1, x2)));
      return best;
    });
    if (with_spanning) e.spanning = spanning_audit({g1, g2}, masks);
    rep.entries.push_back(std::move(e));
  };

  Boundary fI1 = cgo_imag_parts(make_cgo(sig, r1)).f_I;
  Boundary fI2 = cgo_imag_parts(make_cgo(sig, r2)).f_I;
  for (int s = 0; s < nt; ++s) {
    double t = double(s) / (nt - 1);
    audit_t(sig, detail::lerp_boundary(f1, fI1, t), detail::lerp_boundary(f2, fI2, t), t,
            false);
  }
  Boundary zero(g.n, 0.0);
  for (int s = 0; s < nt; ++s) {
    double t = double(s) / (nt - 1);
    ScalarField sig_t = detail::scale_field(sig, 1.0 - t);
    Boundary fI1t = cgo_imag_parts(make_cgo(sig_t, r1)).f_I;
    Boundary fI2t = cgo_imag_parts(make_cgo(sig_t, r2)).f_I;
    audit_t(sig_t, detail::lerp_boundary(zero, fI1t, 1.0),
            detail::lerp_boundary(zero, fI2t, 1.0), 1.0 + t, true);
  }
  ScalarField zero_sig(g);
  zero_sig.bd = Boundary(g.n, 0.0);
  Boundary fI10 = cgo_imag_parts(make_cgo(zero_sig, r1)).f_I;
  Boundary fI20 = cgo_imag_parts(make_cgo(zero_sig, r2)).f_I;
  for (int s = 0; s < nt; ++s) {
    double t = double(s) / (nt - 1);
    audit_t(zero_sig, detail::lerp_boundary(f1, fI10, 1.0 - t),
            detail::lerp_boundary(f2, fI20, 1.0 - t), 2.0 + t, false);
  }
  finish_sweep(rep);
  return rep;
}

// QPAT chain with J = 2 pairs from the lambda-family boundary data; coverage =
// best per-pair block determinant, plus the V-field spanning audit at every t.
inline SweepReport sweep_qpat(const ScalarField& sigma, const ScalarField& gamma,
                              const DomainMasks& masks, double lambda = 0.1,
                              double rho_base = 20.0, int nt = 5, int nangles = 64) {
  const Grid& g = sigma.grid;
  ScalarField sig = sigma, gam = gamma;
  if (!sig.bd) sig.bd = Boundary(g.n, 0.0);
  const double c_shift = 1.0;
  // pair 1 shares k = e2 (k_perp = -e1), pair 2 shares k = e1 (k_perp = e2);
  // magnitudes near rho_base, pairwise rationally independent
  std::array<CgoVector, 4> rr = {
      make_cgo_vector(rho_base, 0.0, 1.0),
      make_cgo_vector(rho_base + 1.0 / M_SQRT2, 0.0, 1.0),
      make_cgo_vector(rho_base + 1.0 / std::sqrt(3.0), 1.0, 0.0),
      make_cgo_vector(rho_base + 1.0 / std::sqrt(5.0), 1.0, 0.0)};
  std::array<Boundary, 4> f0 = {
      Boundary::from_function(g, [&](double x, double) { return std::exp(lambda * x); }),
      Boundary::from_function(g, [&](double, double y) { return std::exp(lambda * y); }),
      Boundary::from_function(g, [&](double x, double) { return std::exp(lambda * x); }),
      Boundary::from_function(
          g, [&](double, double y) { return std::exp(-lambda * y - c_shift); })};
  ScalarField sig0 = ScalarField::from_function(
      g, [&](double, double) { return std::log(1.0 / (lambda * lambda)); }, true);

  SweepReport rep;
  auto audit_t = [&](const ScalarField& sig_t, const ScalarField& gam_t,
                     const std::array<Boundary, 4>& data, double tglobal) {
    std::vector<cplx> eg = exp_values(gam_t);
    EllipticOp L = EllipticOp::divform(sig_t, &eg);
    std::vector<ScalarField> u;
    std::vector<VectorField> gu;
    for (const auto& f : data) {
      u.push_back(L.solve(ScalarField(g), f));
      gu.push_back(gradient(u.back()));
    }
    // V fields of the two pairs
    std::vector<VectorField> V;
    for (int pr = 0; pr < 2; ++pr) {
      VectorField v(g);
      int a = 2 * pr, b = 2 * pr + 1;
      for (int k = 0; k < g.count(); ++k) {
        v.x.v[k] = u[b].v[k] * gu[a].x.v[k] - u[a].v[k] * gu[b].x.v[k];
        v.y.v[k] = u[b].v[k] * gu[a].y.v[k] - u[a].v[k] * gu[b].y.v[k];
      }
      V.push_back(std::move(v));
    }
    SweepEntry e;
    e.t = tglobal;
    e.coverage = audit_samples(masks, nangles, [&](int i, int j, double x1, double x2) {
      int k = g.idx(i, j);
      std::vector<cplx> uv = {u[0].v[k], u[1].v[k], u[2].v[k], u[3].v[k]};
      std::vector<std::array<cplx, 2>> gv;
      for (int q = 0; q < 4; ++q) gv.push_back({gu[q].x.v[k], gu[q].y.v[k]});
      QpatSymbolBlock blk = qpat_symbol_block(uv, gv, 1.0, x1, x2);
      double best = 0.0;
      for (cplx d : blk.dets) best = std::max(best, std::abs(d));
      return best;
    });
    e.spanning = spanning_audit(V, masks);
    rep.entries.push_back(std::move(e));
  };

  auto imag_traces = [&](const ScalarField& s_t) {
    std::array<Boundary, 4> out;
    for (int q = 0; q < 4; ++q) out[q] = cgo_imag_parts(make_cgo(s_t, rr[q])).f_I;
    return out;
  };

  // leg 1: coefficients fixed, data rotates into i f^I
  std::array<Boundary, 4> fI = imag_traces(sig);
  for (int s = 0; s < nt; ++s) {
    double t = double(s) / (nt - 1);
    std::array<Boundary, 4> d;
    for (int q = 0; q < 4; ++q) d[q] = detail::lerp_boundary(f0[q], fI[q], t);
    audit_t(sig, gam, d, t);
  }
  // leg 2: sigma_t = (1-t) sigma + t sigma0, gamma_t = (1-t) gamma
  Boundary zero(g.n, 0.0);
  for (int s = 0; s < nt; ++s) {
    double t = double(s) / (nt - 1);
    ScalarField sig_t(g);
    sig_t.bd = Boundary(g.n);
    for (int k = 0; k < g.count(); ++k)
      sig_t.v[k] = (1.0 - t) * sig.v[k] + t * sig0.v[k];
    for (int k = 0; k < g.n; ++k) {
      sig_t.bd->bottom[k] = (1.0 - t) * sig.bd->bottom[k] + t * sig0.bd->bottom[k];
      sig_t.bd->top[k] = (1.0 - t) * sig.bd->top[k] + t * sig0.bd->top[k];
      sig_t.bd->left[k] = (1.0 - t) * sig.bd->left[k] + t * sig0.bd->left[k];
      sig_t.bd->right[k] = (1.0 - t) * sig.bd->right[k] + t * sig0.bd->right[k];
    }
    ScalarField gam_t = detail::scale_field(gam, 1.0 - t);
    std::array<Boundary, 4> ft = imag_traces(sig_t);
    std::array<Boundary, 4> d;
    for (int q = 0; q < 4; ++q) d[q] = detail::lerp_boundary(zero, ft[q], 1.0);
    audit_t(sig_t, gam_t, d, 1.0 + t);
  }
  // leg 3: (sigma0, 0), data rotates back to the lambda family
  ScalarField gam0(g);
  std::array<Boundary, 4> fI0 = imag_traces(sig0);
  for (int s = 0; s < nt; ++s) {
    double t = double(s) / (nt - 1);
    std::array<Boundary, 4> d;
    for (int q = 0; q < 4; ++q) d[q] = detail::lerp_boundary(f0[q], fI0[q], 1.0 - t);
    audit_t(sig0, gam0, d, 2.0 + t);
  }
  finish_sweep(rep);
  return rep;
}

// Descriptor form of the three chains; legs and data recipes are fixed by the
// kind, the caller supplies coefficients and sampling density.
enum class PathKind { P_SMALL, AET, QPAT };

struct DeformationPath {
  PathKind kind = PathKind::P_SMALL;
  int t_samples = 5;        // per leg, endpoints included
  int xi_angles = 64;
  double p = 0.5;           // P_SMALL only
  double rho1 = 20.0;
  double rho2 = 20.0 * M_SQRT2;
  double lambda = 0.1;      // QPAT only
};

inline SweepReport deformation_sweep(const DeformationPath& path, const ScalarField& sigma,
                                     const ScalarField* gamma, const DomainMasks& masks) {
  switch (path.kind) {
    case PathKind::P_SMALL:
      return sweep_p_small(sigma, path.p, masks, path.rho1, path.t_samples,
                           path.xi_angles);
    case PathKind::AET:
      return sweep_aet(sigma, masks, path.rho1, path.rho2, path.t_samples,
                       path.xi_angles);
    case PathKind::QPAT: {
      if (!gamma) throw std::invalid_argument("deformation_sweep: QPAT needs gamma");
      return sweep_qpat(sigma, *gamma, masks, path.lambda, path.rho1, path.t_samples,
                        path.xi_angles);
    }
  }
  throw std::logic_error("deformation_sweep: unknown kind");
}

}  // namespace hil
