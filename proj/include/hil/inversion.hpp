#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <optional>
#include <ostream>
#include <vector>

#include "hil/linearize.hpp"
#include "hil/rng.hpp"

namespace hil {

// --- reports ---------------------------------------------------------------

struct SpectrumReport {
  std::vector<double> singular_values;  // descending
  double sigma_min = 0.0, sigma_max = 0.0;
  int numerical_kernel_dim = 0;
  double tol = 1e-8;
  double condition = 0.0;  // sigma_max / smallest sigma above the kernel cut
};

enum class ReconMethod { A0X1_BVP, QPAT_LAMBDA, SVD_PINV };

struct ReconResult {
  ScalarField rho_hat;
  std::optional<ScalarField> nu_hat;
  double rel_l2_error = -1.0;  // negative when no ground truth was supplied
  ReconMethod method = ReconMethod::SVD_PINV;
};

inline void write_spectrum_csv(std::ostream& os, const SpectrumReport& r) {
  os << "index,sigma\n";
  os.precision(17);
  for (size_t i = 0; i < r.singular_values.size(); ++i)
    os << i << "," << r.singular_values[i] << "\n";
}

namespace detail {

inline double rel_l2(const ScalarField& got, const ScalarField& truth) {
  double num = 0.0, den = 0.0;
  for (int k = 0; k < got.grid.count(); ++k) {
    num += std::norm(got.v[k] - truth.v[k]);
    den += std::norm(truth.v[k]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline ScalarField mask_to_prime(ScalarField f, const DomainMasks& m) {
  for (int j = 0; j < f.grid.n; ++j)
    for (int i = 0; i < f.grid.n; ++i)
      if (!m.in_prime(i, j)) f.at(i, j) = cplx{};
  return f;
}

// 5-point laplacian with zero Dirichlet padding regardless of f's own trace
inline ScalarField lap0(const ScalarField& f) {
  ScalarField g = f;
  g.bd = Boundary(f.grid.n, 0.0);
  return laplacian(g);
}

}  // namespace detail

// --- A_{0,x1} reduction and its BVP inverse --------------------------------

// rho - p d1 Lap^{-1} d1 rho with centered stencils and zero Dirichlet data;
// (p/2) times the A_{0,x1} functional of the linearization module.
inline ScalarField reduced_a0x1(const ScalarField& rho, double p) {
  ScalarField rb = rho;
  rb.bd = Boundary(rho.grid.n, 0.0);
  ScalarField w = laplacian_inverse_dirichlet_fft(gradient(rb).x);
  ScalarField out(rho.grid);
  ScalarField d1w = gradient(w).x;
  for (int k = 0; k < rho.grid.count(); ++k) out.v[k] = rho.v[k] - p * d1w.v[k];
  return out;
}

// Solve Lap(rho) - p d1^2 rho = Lap(data), rho = 0 on the boundary; elliptic
// for p < 1 since the symbol is |xi|^2 - p xi_1^2.
inline ReconResult invert_A0x1(const ScalarField& data, double p, const DomainMasks& masks,
                               const ScalarField* truth = nullptr) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("invert_A0x1: need 0 < p < 1");
  const Grid& g = data.grid;
  if (!g.same_as(masks.grid)) throw std::invalid_argument("invert_A0x1: grid mismatch");
  double h2 = g.h * g.h;
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(5 * (size_t)g.count());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      int k = g.idx(i, j);
      // -(Lap - p d1^2): diagonal (4 - 2p)/h^2, x couplings -(1-p)/h^2
      trips.emplace_back(k, k, cplx((4.0 - 2.0 * p) / h2));
      if (i > 0) trips.emplace_back(k, g.idx(i - 1, j), cplx(-(1.0 - p) / h2));
      if (i < g.n - 1) trips.emplace_back(k, g.idx(i + 1, j), cplx(-(1.0 - p) / h2));
      if (j > 0) trips.emplace_back(k, g.idx(i, j - 1), cplx(-1.0 / h2));
      if (j < g.n - 1) trips.emplace_back(k, g.idx(i, j + 1), cplx(-1.0 / h2));
    }
  SpMat A(g.count(), g.count());
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("invert_A0x1: factorization failed");
  ScalarField rhs = laplacian(data);  // one-sided at the edge: no trace known
  VecC b(g.count());
  for (int k = 0; k < g.count(); ++k) b[k] = -rhs.v[k];
  VecC x = lu.solve(b);
  ReconResult out;
  out.method = ReconMethod::A0X1_BVP;
  out.rho_hat = ScalarField(g);
  for (int k = 0; k < g.count(); ++k) out.rho_hat.v[k] = x[k];
  out.rho_hat = detail::mask_to_prime(std::move(out.rho_hat), masks);
  if (truth) out.rel_l2_error = detail::rel_l2(out.rho_hat, *truth);
  return out;
}

// --- QPAT lambda-point reconstruction --------------------------------------

namespace detail {

struct QpatLambdaSystem {
  std::shared_ptr<EllipticOp> L;    // -div(e^{sigma0} grad) + 1
  std::shared_ptr<EllipticOp> lap;  // -Lap, Dirichlet
  std::array<ScalarField, 3> u0;    // solutions for f11, f12, f22
  double lambda;

  // S_j(rho) = div(rho e^{sigma0} grad u0_j) as the exact discrete derivative
  ScalarField S(int j, const ScalarField& rho) const {
    ScalarField s = L->coeff_derivative_apply(rho, u0[(size_t)j]);
    for (auto& z : s.v) z = -z;
    return s;
  }

  // linear part of equation j in {0, 2}: S_j(rho) - Lap(r_j Lap^{-1} S_2(rho))
  ScalarField lin(int j, const ScalarField& rho) const {
    ScalarField s2 = S(1, rho);
    ScalarField w(rho.grid);
    {
      ScalarField neg = s2;
      for (auto& z : neg.v) z = -z;
      w = lap->solve(neg);
    }
    ScalarField rw(rho.grid);
    for (int k = 0; k < rho.grid.count(); ++k)
      rw.v[k] = u0[(size_t)j].v[k] / u0[1].v[k] * w.v[k];
    ScalarField drw = lap0(rw);
    ScalarField sj = S(j, rho);
    ScalarField out(rho.grid);
    for (int k = 0; k < rho.grid.count(); ++k) out.v[k] = sj.v[k] - drw.v[k];
    return out;
  }
};

}  // namespace detail

// Linearized QPAT point reconstruction at e^{sigma0} = lambda^{-2},
// e^{gamma0} = 1, boundary data (e^{lambda x1}, e^{lambda x2}, e^{-lambda x2}).
// nu is eliminated through the A_{1,2} equation, the two remaining equations
// are solved for rho in least squares, and nu is recovered pointwise.
inline ReconResult qpat_lambda_reconstruct(double lambda, const ScalarField& A11,
                                           const ScalarField& A12, const ScalarField& A22,
                                           const DomainMasks& masks,
                                           const ScalarField* rho_truth = nullptr,
                                           const ScalarField* nu_truth = nullptr) {
  if (!(lambda > 0.0 && lambda <= 0.5))
    throw std::invalid_argument("qpat_lambda_reconstruct: lambda out of (0, 0.5]");
  const Grid& g = A11.grid;
  if (!g.same_as(A12.grid) || !g.same_as(A22.grid) || !g.same_as(masks.grid))
    throw std::invalid_argument("qpat_lambda_reconstruct: grid mismatch");

  detail::QpatLambdaSystem sys;
  sys.lambda = lambda;
  ScalarField sig0 = ScalarField::from_function(
      g, [&](double, double) { return std::log(1.0 / (lambda * lambda)); }, true);
  std::vector<cplx> one(g.count(), cplx(1.0, 0.0));
  sys.L = std::make_shared<EllipticOp>(EllipticOp::divform(sig0, &one));
  sys.lap = std::make_shared<EllipticOp>(EllipticOp::laplace(g));
  auto trace = [&](double sx, double sy) {
    return Boundary::from_function(
        g, [&](double x, double y) { return std::exp(lambda * (sx * x + sy * y)); });
  };
  sys.u0 = {sys.L->solve(ScalarField(g), trace(1.0, 0.0)),
            sys.L->solve(ScalarField(g), trace(0.0, 1.0)),
            sys.L->solve(ScalarField(g), trace(0.0, -1.0))};

  // L A_j with the same discrete operator the data came from
  double il2 = 1.0 / (lambda * lambda);
  auto apply_L = [&](const ScalarField& a) {
    ScalarField la = detail::lap0(a);
    ScalarField out(g);
    for (int k = 0; k < g.count(); ++k) out.v[k] = -il2 * la.v[k] + a.v[k];
    return out;
  };
  ScalarField LA11 = apply_L(A11), LA12 = apply_L(A12), LA22 = apply_L(A22);

  // constant part of equation j: Lap(r_j Lap^{-1} L A12) - L A_j
  auto const_part = [&](int j, const ScalarField& LAj) {
    ScalarField neg = LA12;
    for (auto& z : neg.v) z = -z;  // lap solves -Lap w = rhs, so w = Lap^{-1} LA12
    ScalarField w = sys.lap->solve(neg);
    ScalarField rw(g);
    for (int k = 0; k < g.count(); ++k)
      rw.v[k] = sys.u0[(size_t)j].v[k] / sys.u0[1].v[k] * w.v[k];
    ScalarField out = detail::lap0(rw);
    for (int k = 0; k < g.count(); ++k) out.v[k] -= LAj.v[k];
    return out;
  };

  std::vector<int> cols = masks.prime_nodes();
  Eigen::Index rows = 2 * (Eigen::Index)g.count(), nc = (Eigen::Index)cols.size();
  Eigen::MatrixXd M(rows, nc);
  ScalarField basis(g);
  for (Eigen::Index c = 0; c < nc; ++c) {
    basis.v.assign(g.count(), cplx{});
    basis.v[cols[(size_t)c]] = 1.0;
    ScalarField e1 = sys.lin(0, basis), e2 = sys.lin(2, basis);
    for (int k = 0; k < g.count(); ++k) {
      M(k, c) = e1.v[k].real();
      M(g.count() + k, c) = e2.v[k].real();
    }
  }
  Eigen::VectorXd b(rows);
  {
    ScalarField c1 = const_part(0, LA11), c2 = const_part(2, LA22);
    for (int k = 0; k < g.count(); ++k) {
      b[k] = -c1.v[k].real();
      b[g.count() + k] = -c2.v[k].real();
    }
  }

  // normal equations via SVD
  Eigen::MatrixXd N = M.transpose() * M;
  Eigen::VectorXd rhs = M.transpose() * b;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(N, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double cut = 1e-12 * svd.singularValues()(0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nc);
  {
    Eigen::VectorXd y = svd.matrixU().transpose() * rhs;
    for (Eigen::Index i = 0; i < nc; ++i)
      if (svd.singularValues()(i) > cut) y[i] /= svd.singularValues()(i);
      else y[i] = 0.0;
    x = svd.matrixV() * y;
  }

  ReconResult out;
  out.method = ReconMethod::QPAT_LAMBDA;
  out.rho_hat = ScalarField(g);
  for (Eigen::Index c = 0; c < nc; ++c) out.rho_hat.v[cols[(size_t)c]] = x[c];

  // nu u0_2 = lambda^2 Lap^{-1}(S_2(rho) - L A12), then divide by u0_2
  {
    ScalarField s2 = sys.S(1, out.rho_hat);
    ScalarField neg(g);
    for (int k = 0; k < g.count(); ++k) neg.v[k] = -(s2.v[k] - LA12.v[k]);
    ScalarField w = sys.lap->solve(neg);
    ScalarField nu(g);
    for (int k = 0; k < g.count(); ++k)
      nu.v[k] = lambda * lambda * w.v[k] / sys.u0[1].v[k];
    out.nu_hat = detail::mask_to_prime(std::move(nu), masks);
  }

  // principal-part spot check against A_lambda at 5 random interior nodes:
  // lambda (d1 eq1 - d2 eq2) must look like
  //   e^{lambda x1} d1^2 - e^{lambda x1} d1 d2 + 2 e^{-lambda x2} d2^2
  {
    Rng rng(417);
    const double tol_rel = 0.35;
    for (int trial = 0; trial < 5; ++trial) {
      int i = 0, j = 0;
      do {
        i = 2 + (int)(rng.uniform(0.0, 1.0) * (g.n - 4));
        j = 2 + (int)(rng.uniform(0.0, 1.0) * (g.n - 4));
      } while (!masks.in_prime(i, j) || !masks.in_prime(i + 2, j + 2) ||
               !masks.in_prime(i - 2, j - 2));
      ScalarField d(g);
      d.at(i, j) = 1.0;
      ScalarField e1 = sys.lin(0, d), e2 = sys.lin(2, d);
      e1.bd = Boundary(g.n, 0.0);
      e2.bd = Boundary(g.n, 0.0);
      ScalarField T(g);
      ScalarField d1e1 = gradient(e1).x, d2e2 = gradient(e2).y;
      for (int k = 0; k < g.count(); ++k)
        T.v[k] = lambda * (d1e1.v[k] - d2e2.v[k]);
      // centered-difference compositions put the d1^2/d2^2 mass at +-2 nodes
      // with weight a/(4h^2); the cross term sits on the diagonal neighbors
      double h2 = g.h * g.h;
      double a_hat = 2.0 * h2 * (T.at(i + 2, j) + T.at(i - 2, j)).real();
      double c_hat = 2.0 * h2 * (T.at(i, j + 2) + T.at(i, j - 2)).real();
      double b_hat = h2 * (T.at(i + 1, j + 1) + T.at(i - 1, j - 1) -
                           T.at(i + 1, j - 1) - T.at(i - 1, j + 1)).real();
      double a_ref = std::exp(lambda * g.x(i));
      double b_ref = -std::exp(lambda * g.x(i));
      double c_ref = 2.0 * std::exp(-lambda * g.y(j));
      if (std::abs(a_hat - a_ref) > tol_rel * std::abs(a_ref) ||
          std::abs(b_hat - b_ref) > tol_rel * std::abs(b_ref) ||
          std::abs(c_hat - c_ref) > tol_rel * std::abs(c_ref))
        throw std::runtime_error("qpat_lambda_reconstruct: principal part mismatch");
    }
  }

  if (rho_truth) out.rel_l2_error = detail::rel_l2(out.rho_hat, *rho_truth);
  if (nu_truth && out.nu_hat) {
    double e = detail::rel_l2(*out.nu_hat, *nu_truth);
    out.rel_l2_error = std::max(out.rel_l2_error, e);
  }
  return out;
}

// --- spectral probes -------------------------------------------------------

inline SpectrumReport svd_probe(const DenseOperator& op, double tol = 1e-8) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(op.matrix);
  SpectrumReport r;
  r.tol = tol;
  const auto& s = svd.singularValues();
  r.singular_values.assign(s.data(), s.data() + s.size());
  if (r.singular_values.empty()) return r;
  r.sigma_max = r.singular_values.front();
  r.sigma_min = r.singular_values.back();
  double cut = tol * r.sigma_max;
  double smallest_kept = r.sigma_max;
  for (double v : r.singular_values) {
    if (v <= cut) ++r.numerical_kernel_dim;
    else smallest_kept = v;
  }
  r.condition = smallest_kept > 0.0 ? r.sigma_max / smallest_kept : 0.0;
  return r;
}

// Gather a data field (or stacked fields) into the row space of the operator.
inline Eigen::VectorXcd sample_rows(const DenseOperator& op,
                                    const std::vector<const ScalarField*>& fields) {
  if (fields.empty()) throw std::invalid_argument("sample_rows: no fields");
  size_t block = op.row_map.size() / fields.size();
  if (block * fields.size() != op.row_map.size())
    throw std::invalid_argument("sample_rows: field count does not divide the rows");
  Eigen::VectorXcd b(op.row_map.size());
  for (size_t r = 0; r < op.row_map.size(); ++r)
    b[(Eigen::Index)r] = fields[r / block]->v[op.row_map[r]];
  return b;
}

inline ReconResult svd_pinv_reconstruct(const DenseOperator& op,
                                        const Eigen::VectorXcd& data, const Grid& g,
                                        double tol = 1e-8,
                                        const ScalarField* truth = nullptr) {
  if (data.size() != op.matrix.rows())
    throw std::invalid_argument("svd_pinv_reconstruct: data size mismatch");
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(op.matrix,
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  double cut = s.size() > 0 ? tol * s(0) : 0.0;
  Eigen::VectorXcd y = svd.matrixU().adjoint() * data;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) y[i] /= s(i);
    else y[i] = 0.0;
  Eigen::VectorXcd x = svd.matrixV() * y;

  ReconResult out;
  out.method = ReconMethod::SVD_PINV;
  out.rho_hat = ScalarField(g);
  for (int c = 0; c < op.rho_cols; ++c) out.rho_hat.v[op.col_map[(size_t)c]] = x[c];
  if (op.rho_cols < (int)op.col_map.size()) {
    ScalarField nu(g);
    for (size_t c = (size_t)op.rho_cols; c < op.col_map.size(); ++c)
      nu.v[op.col_map[c]] = x[(Eigen::Index)c];
    out.nu_hat = std::move(nu);
  }
  if (truth) out.rel_l2_error = detail::rel_l2(out.rho_hat, *truth);
  return out;
}

}  // namespace hil
