#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <ostream>
#include <utility>

#include "hil/forward.hpp"

namespace hil {

// Matrix-free Frechet derivative at a fixed base point. Arity 1 maps take a
// single perturbation (rho or mu1); arity 2 is QPAT's (rho, nu).
struct LinearMap {
  int input_arity = 1;
  Grid grid;
  CoefficientSet base_point;
  std::function<ScalarField(const ScalarField&)> apply1;
  std::function<ScalarField(const ScalarField&, const ScalarField&)> apply2;

  ScalarField apply(const ScalarField& r) const {
    if (input_arity != 1) throw std::logic_error("LinearMap: arity-2 map needs two inputs");
    return apply1(r);
  }
  ScalarField apply(const ScalarField& r, const ScalarField& nu) const {
    if (input_arity != 2) throw std::logic_error("LinearMap: arity-1 map takes one input");
    return apply2(r, nu);
  }
};

namespace detail {

inline ScalarField negate(ScalarField f) {
  for (auto& z : f.v) z = -z;
  return f;
}

inline ScalarField dot_grad(const VectorField& a, const VectorField& b) {
  ScalarField out(a.x.grid);
  for (int k = 0; k < out.grid.count(); ++k)
    out.v[k] = a.x.v[k] * b.x.v[k] + a.y.v[k] * b.y.v[k];
  return out;
}

}  // namespace detail

// A_{sigma,f}(rho) = (2/p) e^{2 sigma/p} (rho grad u . grad u + p grad u . grad v),
// v solving -div(e^sigma grad v) = div(rho e^sigma grad u), v = 0 on the boundary.
inline LinearMap aet_dF(const CoefficientSet& c, const Boundary& f) {
  if (!c.sigma || !c.p) throw std::invalid_argument("aet_dF: sigma and p required");
  const Grid g = c.sigma->grid;
  auto op = std::make_shared<EllipticOp>(EllipticOp::divform(*c.sigma, nullptr));
  auto u = std::make_shared<ScalarField>(op->solve(ScalarField(g), f));
  auto gu = std::make_shared<VectorField>(gradient(*u));
  auto guu = std::make_shared<ScalarField>(detail::dot_grad(*gu, *gu));
  const double p = *c.p;
  auto weight = std::make_shared<std::vector<cplx>>(g.count());
  for (int k = 0; k < g.count(); ++k)
    (*weight)[k] = (2.0 / p) * std::exp(2.0 * c.sigma->v[k] / p);

  LinearMap m;
  m.input_arity = 1;
  m.grid = g;
  m.base_point = c;
  m.apply1 = [=](const ScalarField& rho) {
    ScalarField v = op->solve(detail::negate(op->coeff_derivative_apply(rho, *u)));
    ScalarField guv = detail::dot_grad(*gu, gradient(v));
    ScalarField out(g);
    for (int k = 0; k < g.count(); ++k)
      out.v[k] = (*weight)[k] * (rho.v[k] * guu->v[k] + p * guv.v[k]);
    return out;
  };
  return m;
}

// Derivative of the cross functional e^{2 sigma} (grad u1 . grad u2); the first
// term carries the product-rule factor 2 so finite-difference ladders close.
inline LinearMap aet_cross_dF(const CoefficientSet& c, const Boundary& f1,
                              const Boundary& f2) {
  if (!c.sigma) throw std::invalid_argument("aet_cross_dF: sigma required");
  if (c.p && *c.p != 2.0) throw std::invalid_argument("aet_cross_dF: p must be 2");
  const Grid g = c.sigma->grid;
  auto op = std::make_shared<EllipticOp>(EllipticOp::divform(*c.sigma, nullptr));
  auto u1 = std::make_shared<ScalarField>(op->solve(ScalarField(g), f1));
  auto u2 = std::make_shared<ScalarField>(op->solve(ScalarField(g), f2));
  auto g1 = std::make_shared<VectorField>(gradient(*u1));
  auto g2 = std::make_shared<VectorField>(gradient(*u2));
  auto g12 = std::make_shared<ScalarField>(detail::dot_grad(*g1, *g2));
  auto e2s = std::make_shared<std::vector<cplx>>(g.count());
  for (int k = 0; k < g.count(); ++k) (*e2s)[k] = std::exp(2.0 * c.sigma->v[k]);

  LinearMap m;
  m.input_arity = 1;
  m.grid = g;
  m.base_point = c;
  m.apply1 = [=](const ScalarField& rho) {
    ScalarField v1 = op->solve(detail::negate(op->coeff_derivative_apply(rho, *u1)));
    ScalarField v2 = op->solve(detail::negate(op->coeff_derivative_apply(rho, *u2)));
    ScalarField a = detail::dot_grad(*g1, gradient(v2));
    ScalarField b = detail::dot_grad(*g2, gradient(v1));
    ScalarField out(g);
    for (int k = 0; k < g.count(); ++k)
      out.v[k] = (*e2s)[k] * (2.0 * rho.v[k] * g12->v[k] + a.v[k] + b.v[k]);
    return out;
  };
  return m;
}

namespace detail {

struct QpatBase {
  std::shared_ptr<EllipticOp> L;
  std::shared_ptr<ScalarField> u0;
  std::shared_ptr<std::vector<cplx>> eg0;  // e^{gamma0}
  Grid grid;
};

inline QpatBase qpat_base(const CoefficientSet& c, const Boundary& f) {
  if (!c.sigma || !c.gamma) throw std::invalid_argument("qpat_dF: sigma and gamma required");
  QpatBase b;
  b.grid = c.sigma->grid;
  b.eg0 = std::make_shared<std::vector<cplx>>(exp_values(*c.gamma));
  b.L = std::make_shared<EllipticOp>(EllipticOp::divform(*c.sigma, b.eg0.get()));
  b.u0 = std::make_shared<ScalarField>(b.L->solve(ScalarField(b.grid), f));
  return b;
}

}  // namespace detail

// A(rho, nu) = e^{gamma0} (nu u0 + v), v solving
// L v = div(rho e^{sigma0} grad u0) - nu e^{gamma0} u0 with zero Dirichlet data.
inline LinearMap qpat_dF(const CoefficientSet& c, const Boundary& f) {
  detail::QpatBase b = detail::qpat_base(c, f);
  LinearMap m;
  m.input_arity = 2;
  m.grid = b.grid;
  m.base_point = c;
  m.apply2 = [b](const ScalarField& rho, const ScalarField& nu) {
    const Grid& g = b.grid;
    ScalarField rhs = detail::negate(b.L->coeff_derivative_apply(rho, *b.u0));
    for (int k = 0; k < g.count(); ++k)
      rhs.v[k] -= nu.v[k] * (*b.eg0)[k] * b.u0->v[k];
    ScalarField v = b.L->solve(rhs);
    ScalarField out(g);
    for (int k = 0; k < g.count(); ++k)
      out.v[k] = (*b.eg0)[k] * (v.v[k] + nu.v[k] * b.u0->v[k]);
    return out;
  };
  return m;
}

// Same derivative written as the three-term expansion
// e^{gamma0} (nu u0 - L^{-1}(nu e^{gamma0} u0) + L^{-1}(div(rho e^{sigma0} grad u0)));
// two separate solves, used to cross-check the one-solve route.
inline LinearMap qpat_dF_expanded(const CoefficientSet& c, const Boundary& f) {
  detail::QpatBase b = detail::qpat_base(c, f);
  LinearMap m;
  m.input_arity = 2;
  m.grid = b.grid;
  m.base_point = c;
  m.apply2 = [b](const ScalarField& rho, const ScalarField& nu) {
    const Grid& g = b.grid;
    ScalarField s1(g);
    for (int k = 0; k < g.count(); ++k) s1.v[k] = nu.v[k] * (*b.eg0)[k] * b.u0->v[k];
    ScalarField t1 = b.L->solve(detail::negate(s1));
    ScalarField t2 = b.L->solve(detail::negate(b.L->coeff_derivative_apply(rho, *b.u0)));
    ScalarField out(g);
    for (int k = 0; k < g.count(); ++k)
      out.v[k] = (*b.eg0)[k] * (nu.v[k] * b.u0->v[k] + t1.v[k] + t2.v[k]);
    return out;
  };
  return m;
}

// dF(mu1) = u1 G0 + u0 G1 with L u1 = -mu1 e^{mu0} u0 (homogeneous B data) and
// L G1 = -mu1 e^{mu0} G0 (homogeneous C data).
inline LinearMap umot_dF(const CoefficientSet& c, const BoundaryCondition& B_bc,
                         const BoundaryNode& eta, const BoundaryCondition& C_bc) {
  if (!c.mu) throw std::invalid_argument("umot_dF: mu required");
  const Grid g = c.mu->grid;
  ScalarField absorb = *c.mu;
  absorb.v = exp_values(*c.mu);
  auto emu = std::make_shared<std::vector<cplx>>(absorb.v);
  auto opB = std::make_shared<EllipticOp>(EllipticOp::schrodinger(
      absorb, B_bc.kind, B_bc.kind == BcKind::Robin ? &B_bc.robin_gamma : nullptr));
  auto opC = std::make_shared<EllipticOp>(EllipticOp::schrodinger(
      absorb, C_bc.kind, C_bc.kind == BcKind::Robin ? &C_bc.robin_gamma : nullptr));
  auto u0 = std::make_shared<ScalarField>(opB->solve(ScalarField(g), B_bc.data));
  ScalarField impulse(g);
  auto [ii, jj] = adjacent_interior(g, eta);
  impulse.at(ii, jj) = 1.0 / (g.h * g.h);
  auto G0 = std::make_shared<ScalarField>(opC->solve(impulse));

  LinearMap m;
  m.input_arity = 1;
  m.grid = g;
  m.base_point = c;
  m.apply1 = [=](const ScalarField& mu1) {
    ScalarField sB(g), sC(g);
    for (int k = 0; k < g.count(); ++k) {
      cplx w = -mu1.v[k] * (*emu)[k];
      sB.v[k] = w * u0->v[k];
      sC.v[k] = w * G0->v[k];
    }
    ScalarField u1 = opB->solve(sB);
    ScalarField G1 = opC->solve(sC);
    ScalarField out(g);
    for (int k = 0; k < g.count(); ++k)
      out.v[k] = u1.v[k] * G0->v[k] + u0->v[k] * G1.v[k];
    return out;
  };
  return m;
}

// Dense restriction of a LinearMap to Omega'-supported inputs and Omega'
// sample rows. For arity 2 the columns are the rho block followed by the nu
// block; nu basis nodes additionally exclude the Omega' boundary collar.
struct DenseOperator {
  Eigen::MatrixXcd matrix;
  std::vector<int> row_map;  // flat node indices of the sampled rows
  std::vector<int> col_map;  // flat node indices, rho block then nu block
  int rho_cols = 0;
  double scaling = 0.0;  // h weight turning vectors into discrete-L2 elements
};

namespace detail {

inline std::vector<int> nu_nodes(const DomainMasks& m) {
  std::vector<int> out;
  const Grid& g = m.grid;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      if (!m.in_prime(i, j)) continue;
      bool interior = i > 0 && i < g.n - 1 && j > 0 && j < g.n - 1 &&
                      m.in_prime(i - 1, j) && m.in_prime(i + 1, j) &&
                      m.in_prime(i, j - 1) && m.in_prime(i, j + 1);
      if (interior) out.push_back(g.idx(i, j));
    }
  return out;
}

}  // namespace detail

inline DenseOperator assemble(const LinearMap& map, const DomainMasks& masks,
                              int max_cols_per_block = 1600) {
  const Grid& g = map.grid;
  if (!g.same_as(masks.grid)) throw std::invalid_argument("assemble: mask grid mismatch");
  std::vector<int> rows = masks.prime_nodes();
  std::vector<int> rho_cols = masks.prime_nodes();
  std::vector<int> nu_cols =
      map.input_arity == 2 ? detail::nu_nodes(masks) : std::vector<int>{};
  if ((int)rho_cols.size() > max_cols_per_block ||
      (int)nu_cols.size() > max_cols_per_block)
    throw std::invalid_argument("assemble: Omega' exceeds the dense column limit");

  DenseOperator op;
  op.row_map = rows;
  op.col_map = rho_cols;
  op.col_map.insert(op.col_map.end(), nu_cols.begin(), nu_cols.end());
  op.rho_cols = (int)rho_cols.size();
  op.scaling = g.h;
  op.matrix.resize(rows.size(), op.col_map.size());

  ScalarField basis(g), zero(g);
  for (size_t cj = 0; cj < op.col_map.size(); ++cj) {
    basis.v.assign(g.count(), cplx{});
    basis.v[op.col_map[cj]] = 1.0;
    ScalarField col = map.input_arity == 1 ? map.apply1(basis)
                      : cj < (size_t)op.rho_cols ? map.apply2(basis, zero)
                                                 : map.apply2(zero, basis);
    for (size_t r = 0; r < rows.size(); ++r) op.matrix((Eigen::Index)r, (Eigen::Index)cj) = col.v[rows[r]];
  }
  return op;
}

// Row-stacked assembly of several maps over the same masks; rows come in map
// order, each block sampled on the same Omega' node list.
inline DenseOperator assemble_stacked(const std::vector<LinearMap>& maps,
                                      const DomainMasks& masks,
                                      int max_cols_per_block = 1600) {
  if (maps.empty()) throw std::invalid_argument("assemble_stacked: no maps");
  DenseOperator first = assemble(maps[0], masks, max_cols_per_block);
  DenseOperator out;
  out.col_map = first.col_map;
  out.rho_cols = first.rho_cols;
  out.scaling = first.scaling;
  out.matrix.resize(first.matrix.rows() * (Eigen::Index)maps.size(), first.matrix.cols());
  out.matrix.topRows(first.matrix.rows()) = first.matrix;
  out.row_map = first.row_map;
  for (size_t m = 1; m < maps.size(); ++m) {
    DenseOperator next = assemble(maps[m], masks, max_cols_per_block);
    if (next.col_map != first.col_map)
      throw std::invalid_argument("assemble_stacked: inconsistent column layout");
    out.matrix.middleRows(first.matrix.rows() * (Eigen::Index)m, first.matrix.rows()) =
        next.matrix;
    out.row_map.insert(out.row_map.end(), next.row_map.begin(), next.row_map.end());
  }
  return out;
}

// HLMAT01: magic, int64 rows/cols/rho_cols, float64 scaling, row_map, col_map
// as int64, then the matrix column-major as interleaved re,im float64.
inline void dump_mat_binary(std::ostream& os, const DenseOperator& op) {
  os.write("HLMAT01\0", 8);
  std::int64_t dims[3] = {(std::int64_t)op.matrix.rows(), (std::int64_t)op.matrix.cols(),
                          op.rho_cols};
  os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  os.write(reinterpret_cast<const char*>(&op.scaling), 8);
  for (int r : op.row_map) {
    std::int64_t v = r;
    os.write(reinterpret_cast<const char*>(&v), 8);
  }
  for (int c : op.col_map) {
    std::int64_t v = c;
    os.write(reinterpret_cast<const char*>(&v), 8);
  }
  for (Eigen::Index c = 0; c < op.matrix.cols(); ++c)
    for (Eigen::Index r = 0; r < op.matrix.rows(); ++r) {
      double re = op.matrix(r, c).real(), im = op.matrix(r, c).imag();
      os.write(reinterpret_cast<const char*>(&re), 8);
      os.write(reinterpret_cast<const char*>(&im), 8);
    }
}

inline DenseOperator load_mat_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (std::string(magic, 7) != "HLMAT01")
    throw std::runtime_error("load_mat_binary: bad magic");
  std::int64_t dims[3];
  is.read(reinterpret_cast<char*>(dims), sizeof(dims));
  DenseOperator op;
  op.rho_cols = (int)dims[2];
  is.read(reinterpret_cast<char*>(&op.scaling), 8);
  op.row_map.resize(dims[0]);
  op.col_map.resize(dims[1]);
  for (auto& r : op.row_map) {
    std::int64_t v;
    is.read(reinterpret_cast<char*>(&v), 8);
    r = (int)v;
  }
  for (auto& c : op.col_map) {
    std::int64_t v;
    is.read(reinterpret_cast<char*>(&v), 8);
    c = (int)v;
  }
  op.matrix.resize(dims[0], dims[1]);
  for (std::int64_t c = 0; c < dims[1]; ++c)
    for (std::int64_t r = 0; r < dims[0]; ++r) {
      double re, im;
      is.read(reinterpret_cast<char*>(&re), 8);
      is.read(reinterpret_cast<char*>(&im), 8);
      op.matrix(r, c) = {re, im};
    }
  return op;
}

// Finite-difference validation ladder. residual(eps) =
// || F(a + eps b) - F(a) - eps dF(b) ||_{L2}; second-order closure means the
// ratio on halving eps sits near 4 unless the solver noise floor is reached.
struct ConvergenceReport {
  std::vector<double> epsilons;
  std::vector<double> residuals;
  std::vector<double> ratios;
  double forward_norm = 0.0;
  bool pass = false;
};

inline ConvergenceReport validate_frechet(
    const std::function<ScalarField(double)>& forward_at, const ScalarField& dFb,
    std::vector<double> eps) {
  if (eps.size() < 3) throw std::invalid_argument("validate_frechet: need >= 3 rungs");
  for (size_t i = 1; i < eps.size(); ++i)
    if (!(eps[i] < eps[i - 1]))
      throw std::invalid_argument("validate_frechet: ladder must strictly decrease");
  ConvergenceReport rep;
  rep.epsilons = eps;
  ScalarField F0 = forward_at(0.0);
  rep.forward_norm = norm_l2(F0);
  const Grid& g = F0.grid;
  for (double e : eps) {
    ScalarField Fe = forward_at(e);
    ScalarField r(g);
    for (int k = 0; k < g.count(); ++k)
      r.v[k] = Fe.v[k] - F0.v[k] - e * dFb.v[k];
    rep.residuals.push_back(norm_l2(r));
  }
  const double floor = 1e-9 * rep.forward_norm;
  rep.pass = true;
  for (size_t i = 1; i < rep.residuals.size(); ++i) {
    double denom = rep.residuals[i];
    double ratio = denom > 0 ? rep.residuals[i - 1] / denom : 1e300;
    rep.ratios.push_back(ratio);
    bool rung_ok = (ratio >= 3.2 && ratio <= 4.8) || rep.residuals[i] <= floor ||
                   rep.residuals[i - 1] <= floor;
    if (!rung_ok) rep.pass = false;
  }
  return rep;
}

// Arity-1 convenience wrapper: forward takes the full perturbed coefficient
// delta (already scaled by eps).
inline ConvergenceReport validate_frechet(
    const std::function<ScalarField(const ScalarField&)>& forward,
    const LinearMap& lin, const ScalarField& direction, std::vector<double> eps) {
  const Grid& g = direction.grid;
  auto at = [&](double e) {
    ScalarField d(g);
    for (int k = 0; k < g.count(); ++k) d.v[k] = e * direction.v[k];
    return forward(d);
  };
  return validate_frechet(at, lin.apply(direction), std::move(eps));
}

inline ConvergenceReport validate_frechet2(
    const std::function<ScalarField(const ScalarField&, const ScalarField&)>& forward,
    const LinearMap& lin, const ScalarField& dir_rho, const ScalarField& dir_nu,
    std::vector<double> eps) {
  const Grid& g = dir_rho.grid;
  auto at = [&](double e) {
    ScalarField dr(g), dn(g);
    for (int k = 0; k < g.count(); ++k) {
      dr.v[k] = e * dir_rho.v[k];
      dn.v[k] = e * dir_nu.v[k];
    }
    return forward(dr, dn);
  };
  return validate_frechet(at, lin.apply(dir_rho, dir_nu), std::move(eps));
}

}  // namespace hil
