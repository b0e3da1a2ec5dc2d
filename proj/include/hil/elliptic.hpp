#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/FFT>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hil/grid.hpp"

namespace hil {

// Log-coefficients of the three modalities. Exponentials e^mu, e^sigma,
// e^gamma are taken inside the solvers, so positivity is automatic for real
// inputs. "Admissible" fields vanish outside Omega'.
struct CoefficientSet {
  std::optional<ScalarField> mu;
  std::optional<ScalarField> sigma;
  std::optional<ScalarField> gamma;
  std::optional<double> p;
};

inline bool is_admissible(const ScalarField& f, const DomainMasks& m) {
  for (int j = 0; j < f.grid.n; ++j)
    for (int i = 0; i < f.grid.n; ++i)
      if (!m.in_prime(i, j) && f.at(i, j) != cplx{}) return false;
  return true;
}

enum class BcKind { Dirichlet, Robin };

struct BoundaryCondition {
  BcKind kind = BcKind::Dirichlet;
  Boundary data;         // g in Bu = g
  Boundary robin_gamma;  // gamma(x) in D_nu + gamma(x), Robin only

  static BoundaryCondition dirichlet(Boundary data) {
    return {BcKind::Dirichlet, std::move(data), {}};
  }
  static BoundaryCondition robin(const Grid& g, double gamma, Boundary data) {
    if (!(gamma >= 0.0) || gamma == 0.0)
      throw std::invalid_argument("robin: gamma must be >= 0 and not identically zero");
    return {BcKind::Robin, std::move(data), Boundary(g.n, gamma)};
  }
  static BoundaryCondition homogeneous(const BoundaryCondition& bc, const Grid& g) {
    BoundaryCondition out = bc;
    out.data = Boundary(g.n, 0.0);
    return out;
  }
};

using SpMat = Eigen::SparseMatrix<cplx>;
using VecC = Eigen::VectorXcd;

namespace detail {

struct RhsCoupling {
  int node;
  Side side;
  int edge_index;
  cplx weight;  // rhs += weight * g(boundary node)
};

}  // namespace detail

// Sparse factorization of a discretized elliptic operator on the interior
// nodes. Immutable after construction; repeated solves reuse the
// factorization.
class EllipticOp {
 public:
  // (-Laplace + diag(absorb)) with Dirichlet or Robin boundary operator.
  // Robin ghost values are eliminated through the second-order one-sided
  // normal-derivative stencil, keeping the system n^2 x n^2.
  static EllipticOp schrodinger(const ScalarField& absorb, BcKind kind,
                                const Boundary* robin_gamma) {
    EllipticOp op(absorb.grid);
    op.kind_ = kind;
    if (kind == BcKind::Robin) {
      if (!robin_gamma) throw std::invalid_argument("schrodinger: missing Robin gamma");
      op.robin_gamma_ = *robin_gamma;
    }
    op.unit_edges();
    op.diag_ = absorb.v;
    op.assemble();
    return op;
  }

  // -div(e^sigma grad .) + diag(absorb), Dirichlet only. Edge coefficients
  // are e^{(sigma_i+sigma_j)/2}; sigma at the boundary comes from sigma.bd
  // when present, otherwise the adjacent interior value is reused.
  static EllipticOp divform(const ScalarField& sigma, const std::vector<cplx>* absorb) {
    EllipticOp op(sigma.grid);
    op.kind_ = BcKind::Dirichlet;
    op.edges_from_sigma(sigma);
    if (absorb) op.diag_ = *absorb;
    else op.diag_.assign(sigma.grid.count(), cplx{});
    op.assemble();
    return op;
  }

  // -Laplace with homogeneous-structure Dirichlet boundary
  static EllipticOp laplace(const Grid& g) {
    EllipticOp op(g);
    op.kind_ = BcKind::Dirichlet;
    op.unit_edges();
    op.diag_.assign(g.count(), cplx{});
    op.assemble();
    return op;
  }

  const Grid& grid() const { return grid_; }

  // Solve with boundary data g (and interior source). The returned field
  // carries its boundary values so downstream stencils stay centered.
  ScalarField solve(const ScalarField& source, const Boundary& data) const {
    VecC rhs = VecC::Zero(grid_.count());
    for (int k = 0; k < grid_.count(); ++k) rhs[k] = source.v[k];
    for (const auto& c : couplings_) rhs[c.node] += c.weight * data.at(c.side, c.edge_index);
    VecC u = lu_->solve(rhs);
    check_residual(u, rhs);
    ScalarField out(grid_);
    for (int k = 0; k < grid_.count(); ++k) out.v[k] = u[k];
    out.bd = boundary_trace(out, data);
    return out;
  }

  ScalarField solve(const ScalarField& source) const {
    return solve(source, Boundary(grid_.n, 0.0));
  }

  VecC solve_vec(const VecC& rhs) const {
    VecC u = lu_->solve(rhs);
    check_residual(u, rhs);
    return u;
  }

  VecC apply(const VecC& u) const { return mat_ * u; }
  const SpMat& matrix() const { return mat_; }

  // Directional derivative of the div-form matrix with respect to sigma,
  // applied to a solved field u (which must carry boundary values):
  //   (dA(rho) u)_C = sum_edges a_e (rho_C + rho_nb)/2 (u_C - u_nb) / h^2.
  // rho is extended by zero onto the boundary.
  ScalarField coeff_derivative_apply(const ScalarField& rho, const ScalarField& u) const {
    if (!u.bd) throw std::invalid_argument("coeff_derivative_apply: u needs boundary values");
    const Grid& g = grid_;
    const Boundary& ub = *u.bd;
    ScalarField out(g);
    double h2 = g.h * g.h;
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        int k = g.idx(i, j);
        cplx uc = u.v[k], rc = rho.v[k], acc = 0.0;
        auto edge = [&](cplx a, cplx unb, cplx rnb) {
          acc += a * 0.5 * (rc + rnb) * (uc - unb) / h2;
        };
        edge(aW_[k], i > 0 ? u.at(i - 1, j) : ub.left[j], i > 0 ? rho.at(i - 1, j) : cplx{});
        edge(aE_[k], i < g.n - 1 ? u.at(i + 1, j) : ub.right[j],
             i < g.n - 1 ? rho.at(i + 1, j) : cplx{});
        edge(aS_[k], j > 0 ? u.at(i, j - 1) : ub.bottom[i], j > 0 ? rho.at(i, j - 1) : cplx{});
        edge(aN_[k], j < g.n - 1 ? u.at(i, j + 1) : ub.top[i],
             j < g.n - 1 ? rho.at(i, j + 1) : cplx{});
        out.v[k] = acc;
      }
    return out;
  }

  double last_residual() const { return last_residual_; }

 private:
  explicit EllipticOp(const Grid& g) : grid_(g) {}

  void unit_edges() {
    aW_.assign(grid_.count(), 1.0);
    aE_.assign(grid_.count(), 1.0);
    aS_.assign(grid_.count(), 1.0);
    aN_.assign(grid_.count(), 1.0);
  }

  void edges_from_sigma(const ScalarField& s) {
    const Grid& g = grid_;
    aW_.resize(g.count());
    aE_.resize(g.count());
    aS_.resize(g.count());
    aN_.resize(g.count());
    auto sb = [&](Side side, int k, cplx interior) {
      return s.bd ? s.bd->at(side, k) : interior;
    };
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        int k = g.idx(i, j);
        cplx sc = s.at(i, j);
        cplx sW = i > 0 ? s.at(i - 1, j) : sb(Side::Left, j, sc);
        cplx sE = i < g.n - 1 ? s.at(i + 1, j) : sb(Side::Right, j, sc);
        cplx sS = j > 0 ? s.at(i, j - 1) : sb(Side::Bottom, i, sc);
        cplx sN = j < g.n - 1 ? s.at(i, j + 1) : sb(Side::Top, i, sc);
        aW_[k] = std::exp(0.5 * (sc + sW));
        aE_[k] = std::exp(0.5 * (sc + sE));
        aS_[k] = std::exp(0.5 * (sc + sS));
        aN_[k] = std::exp(0.5 * (sc + sN));
      }
  }

  void assemble() {
    const Grid& g = grid_;
    double h2 = g.h * g.h;
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(5 * g.count());
    couplings_.clear();
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        int k = g.idx(i, j);
        cplx diag = diag_[k];
        auto nb = [&](cplx a, int in_range, int knb, Side side, int edge_index) {
          diag += a / h2;
          if (in_range) {
            trip.emplace_back(k, knb, -a / h2);
          } else if (kind_ == BcKind::Dirichlet) {
            couplings_.push_back({k, side, edge_index, a / h2});
          } else {
            // Robin: u_b = (2h g + 4 u_1 - u_2) / (3 + 2h gamma_b), where u_1
            // is this node and u_2 the next one inward.
            cplx gam = robin_gamma_.at(side, edge_index);
            cplx den = 3.0 + 2.0 * g.h * gam;
            diag += -a * 4.0 / (den * h2);
            int i2 = i, j2 = j;
            switch (side) {
              case Side::Left: i2 = i + 1; break;
              case Side::Right: i2 = i - 1; break;
              case Side::Bottom: j2 = j + 1; break;
              case Side::Top: j2 = j - 1; break;
            }
            trip.emplace_back(k, g.idx(i2, j2), a / (den * h2));
            couplings_.push_back({k, side, edge_index, a * 2.0 * g.h / (den * h2)});
          }
        };
        nb(aW_[k], i > 0, i > 0 ? g.idx(i - 1, j) : 0, Side::Left, j);
        nb(aE_[k], i < g.n - 1, i < g.n - 1 ? g.idx(i + 1, j) : 0, Side::Right, j);
        nb(aS_[k], j > 0, j > 0 ? g.idx(i, j - 1) : 0, Side::Bottom, i);
        nb(aN_[k], j < g.n - 1, j < g.n - 1 ? g.idx(i, j + 1) : 0, Side::Top, i);
        trip.emplace_back(k, k, diag);
      }
    mat_.resize(g.count(), g.count());
    mat_.setFromTriplets(trip.begin(), trip.end());
    mat_.makeCompressed();
    lu_ = std::make_shared<Eigen::SparseLU<SpMat>>();
    lu_->compute(mat_);
    if (lu_->info() != Eigen::Success)
      throw std::runtime_error("EllipticOp: factorization failed (singular system)");
  }

  Boundary boundary_trace(const ScalarField& u, const Boundary& data) const {
    if (kind_ == BcKind::Dirichlet) return data;
    const Grid& g = grid_;
    Boundary b(g.n);
    for (int k = 0; k < g.n; ++k) {
      auto eliminate = [&](Side side, cplx u1, cplx u2) {
        cplx den = 3.0 + 2.0 * g.h * robin_gamma_.at(side, k);
        return (2.0 * g.h * data.at(side, k) + 4.0 * u1 - u2) / den;
      };
      b.left[k] = eliminate(Side::Left, u.at(0, k), u.at(1, k));
      b.right[k] = eliminate(Side::Right, u.at(g.n - 1, k), u.at(g.n - 2, k));
      b.bottom[k] = eliminate(Side::Bottom, u.at(k, 0), u.at(k, 1));
      b.top[k] = eliminate(Side::Top, u.at(k, g.n - 1), u.at(k, g.n - 2));
    }
    return b;
  }

  void check_residual(const VecC& u, const VecC& rhs) const {
    double rn = rhs.norm();
    double res = (mat_ * u - rhs).norm();
    last_residual_ = rn > 0 ? res / rn : res;
    if (last_residual_ > 1e-10)
      throw std::runtime_error("EllipticOp: relative residual above 1e-10 (near-singular)");
  }

  Grid grid_;
  BcKind kind_ = BcKind::Dirichlet;
  Boundary robin_gamma_;
  std::vector<cplx> aW_, aE_, aS_, aN_, diag_;
  SpMat mat_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
  std::vector<detail::RhsCoupling> couplings_;
  mutable double last_residual_ = 0.0;
};

inline std::vector<cplx> exp_values(const ScalarField& f) {
  std::vector<cplx> out(f.v.size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = std::exp(f.v[k]);
  return out;
}

inline ScalarField exp_field(const ScalarField& f) {
  ScalarField out(f.grid);
  out.v = exp_values(f);
  if (f.bd) {
    Boundary b(f.grid.n);
    for (int k = 0; k < f.grid.n; ++k) {
      b.bottom[k] = std::exp(f.bd->bottom[k]);
      b.top[k] = std::exp(f.bd->top[k]);
      b.left[k] = std::exp(f.bd->left[k]);
      b.right[k] = std::exp(f.bd->right[k]);
    }
    out.bd = b;
  }
  return out;
}

// (-Laplace + e^mu) u = f with the given boundary condition
inline ScalarField solve_schrodinger(const CoefficientSet& c, const BoundaryCondition& bc,
                                     const ScalarField& source) {
  if (!c.mu) throw std::invalid_argument("solve_schrodinger: mu required");
  ScalarField absorb = c.mu.value();
  absorb.v = exp_values(*c.mu);
  EllipticOp op = EllipticOp::schrodinger(
      absorb, bc.kind, bc.kind == BcKind::Robin ? &bc.robin_gamma : nullptr);
  return op.solve(source, bc.data);
}

// -div(e^sigma grad u) = 0, u = f on the boundary
inline ScalarField solve_conductivity(const CoefficientSet& c, const Boundary& f) {
  if (!c.sigma) throw std::invalid_argument("solve_conductivity: sigma required");
  EllipticOp op = EllipticOp::divform(*c.sigma, nullptr);
  return op.solve(ScalarField(c.sigma->grid), f);
}

// -div(e^sigma grad u) + e^gamma u = 0, u = f on the boundary
inline ScalarField solve_diffusion(const CoefficientSet& c, const Boundary& f) {
  if (!c.sigma || !c.gamma)
    throw std::invalid_argument("solve_diffusion: sigma and gamma required");
  std::vector<cplx> absorb = exp_values(*c.gamma);
  EllipticOp op = EllipticOp::divform(*c.sigma, &absorb);
  return op.solve(ScalarField(c.sigma->grid), f);
}

// Interior node adjacent to a boundary node, for the Green impulse.
inline std::pair<int, int> adjacent_interior(const Grid& g, const BoundaryNode& eta) {
  switch (eta.side) {
    case Side::Bottom: return {eta.index, 0};
    case Side::Top: return {eta.index, g.n - 1};
    case Side::Left: return {0, eta.index};
    default: return {g.n - 1, eta.index};
  }
}

// Column xi -> G_mu(eta, xi) of the Green's function of the C-problem.
// Convention: the delta source is a unit impulse scaled by 1/h^2 at the
// interior node adjacent to eta, solved with homogeneous boundary data.
inline ScalarField greens_column(const CoefficientSet& c, const BoundaryCondition& bc,
                                 const BoundaryNode& eta) {
  if (!c.mu) throw std::invalid_argument("greens_column: mu required");
  const Grid& g = c.mu->grid;
  if (eta.index < 0 || eta.index >= g.n)
    throw std::invalid_argument("greens_column: eta is not a boundary node");
  ScalarField source(g);
  auto [i, j] = adjacent_interior(g, eta);
  source.at(i, j) = 1.0 / (g.h * g.h);
  BoundaryCondition hom = BoundaryCondition::homogeneous(bc, g);
  return solve_schrodinger(c, hom, source);
}

// w solving Laplace(w) = source, w = 0 on the boundary
inline ScalarField laplacian_inverse_dirichlet(const ScalarField& source) {
  EllipticOp op = EllipticOp::laplace(source.grid);
  ScalarField neg(source.grid);
  for (int k = 0; k < source.grid.count(); ++k) neg.v[k] = -source.v[k];
  return op.solve(neg, Boundary(source.grid.n, 0.0));
}

namespace detail {

// In-place DST-I along x for every row: X_k = sum_j x_j sin(pi j k / (n+1)),
// realized as an odd-extended FFT of length 2(n+1).
inline void dst_rows(std::vector<cplx>& v, int n) {
  Eigen::FFT<double> fft;
  const int m = 2 * (n + 1);
  std::vector<cplx> z(m), Z(m);
  for (int j = 0; j < n; ++j) {
    z[0] = 0.0;
    z[n + 1] = 0.0;
    for (int i = 0; i < n; ++i) {
      z[i + 1] = v[(size_t)j * n + i];
      z[m - 1 - i] = -v[(size_t)j * n + i];
    }
    fft.fwd(Z, z);
    for (int i = 0; i < n; ++i)
      v[(size_t)j * n + i] = cplx(0.0, 0.5) * Z[i + 1];
  }
}

inline void dst2(std::vector<cplx>& v, int n) {
  dst_rows(v, n);
  // transpose, transform, transpose back
  std::vector<cplx> t((size_t)n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) t[(size_t)i * n + j] = v[(size_t)j * n + i];
  dst_rows(t, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) v[(size_t)j * n + i] = t[(size_t)i * n + j];
}

}  // namespace detail

// Same operator and boundary condition as laplacian_inverse_dirichlet, solved
// in the 2-D sine basis where the 5-point Laplacian is diagonal; O(n^2 log n),
// suitable for fine reference grids where the sparse factorization is not.
inline ScalarField laplacian_inverse_dirichlet_fft(const ScalarField& source) {
  const Grid& g = source.grid;
  const int n = g.n;
  std::vector<cplx> c(source.v);
  detail::dst2(c, n);
  const double s = 2.0 / (n + 1);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) {
      double lam = (4.0 - 2.0 * std::cos(M_PI * (k + 1) * g.h) -
                    2.0 * std::cos(M_PI * (l + 1) * g.h)) /
                   (g.h * g.h);
      c[(size_t)l * n + k] *= -s * s / lam;
    }
  detail::dst2(c, n);
  ScalarField w(g);
  w.v = std::move(c);
  w.bd = Boundary(n, 0.0);
  return w;
}

}  // namespace hil
