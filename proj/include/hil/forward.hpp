#pragma once

#include <ostream>
#include <stdexcept>
#include <string>

#include "hil/elliptic.hpp"

namespace hil {

enum class Modality { UMOT, AET_POWER, AET_CROSS, QPAT };

inline const char* modality_name(Modality m) {
  switch (m) {
    case Modality::UMOT: return "UMOT";
    case Modality::AET_POWER: return "AET_POWER";
    case Modality::AET_CROSS: return "AET_CROSS";
    default: return "QPAT";
  }
}

// Everything needed to re-run the forward map bit-identically.
struct Provenance {
  CoefficientSet coeffs;
  BoundaryCondition bc1;                 // B-problem / illumination f (or f1)
  std::optional<BoundaryCondition> bc2;  // UMOT C-problem, or f2 for the cross map
  std::optional<BoundaryNode> eta;       // UMOT detector
};

struct InternalData {
  Modality modality;
  ScalarField field;
  Provenance provenance;
};

namespace detail {

inline VectorField grad_dot_ready(const ScalarField& u) {
  if (!u.bd) throw std::logic_error("forward: solved field lost its boundary trace");
  return gradient(u);
}

}  // namespace detail

// F_mu(xi) = u_mu(xi) G_mu(eta, xi): illumination solve times a Green column.
inline InternalData umot_data(const CoefficientSet& mu, const BoundaryCondition& B_bc,
                              const BoundaryNode& eta, const BoundaryCondition& C_bc) {
  if (!mu.mu) throw std::invalid_argument("umot_data: mu required");
  const Grid& g = mu.mu->grid;
  ScalarField u = solve_schrodinger(mu, B_bc, ScalarField(g));
  ScalarField G = greens_column(mu, C_bc, eta);
  ScalarField F(g);
  for (int k = 0; k < g.count(); ++k) F.v[k] = u.v[k] * G.v[k];
  return {Modality::UMOT, std::move(F), {mu, B_bc, C_bc, eta}};
}

// F(sigma)(x) = e^{2 sigma/p} (grad u . grad u), bilinear dot product.
inline InternalData power_density(const CoefficientSet& c, const Boundary& f) {
  if (!c.sigma || !c.p) throw std::invalid_argument("power_density: sigma and p required");
  if (!(*c.p > 0.0)) throw std::invalid_argument("power_density: p must be positive");
  const Grid& g = c.sigma->grid;
  ScalarField u = solve_conductivity(c, f);
  VectorField w = detail::grad_dot_ready(u);
  ScalarField F(g);
  for (int k = 0; k < g.count(); ++k)
    F.v[k] = std::exp(2.0 * c.sigma->v[k] / *c.p) *
             (w.x.v[k] * w.x.v[k] + w.y.v[k] * w.y.v[k]);
  return {Modality::AET_POWER, std::move(F), {c, BoundaryCondition::dirichlet(f), {}, {}}};
}

// e^{2 sigma} (grad u1 . grad u2), the unsquared cross functional (p = 2).
inline InternalData cross_power(const CoefficientSet& c, const Boundary& f1,
                                const Boundary& f2) {
  if (!c.sigma) throw std::invalid_argument("cross_power: sigma required");
  if (c.p && *c.p != 2.0) throw std::invalid_argument("cross_power: p must be 2");
  const Grid& g = c.sigma->grid;
  VectorField w1 = detail::grad_dot_ready(solve_conductivity(c, f1));
  VectorField w2 = detail::grad_dot_ready(solve_conductivity(c, f2));
  ScalarField F(g);
  for (int k = 0; k < g.count(); ++k)
    F.v[k] = std::exp(2.0 * c.sigma->v[k]) *
             (w1.x.v[k] * w2.x.v[k] + w1.y.v[k] * w2.y.v[k]);
  return {Modality::AET_CROSS, std::move(F),
          {c, BoundaryCondition::dirichlet(f1), BoundaryCondition::dirichlet(f2), {}}};
}

// F = e^gamma u with u from the diffusion solve; Gruneisen coefficient fixed at 1.
inline InternalData qpat_data(const CoefficientSet& c, const Boundary& f) {
  if (!c.sigma || !c.gamma)
    throw std::invalid_argument("qpat_data: sigma and gamma required");
  const Grid& g = c.sigma->grid;
  ScalarField u = solve_diffusion(c, f);
  ScalarField F(g);
  for (int k = 0; k < g.count(); ++k) F.v[k] = std::exp(c.gamma->v[k]) * u.v[k];
  return {Modality::QPAT, std::move(F), {c, BoundaryCondition::dirichlet(f), {}, {}}};
}

// Re-run the forward map from stored provenance; bit-identical by construction
// (same code path, same inputs).
inline ScalarField rerun(const InternalData& d) {
  const Provenance& p = d.provenance;
  switch (d.modality) {
    case Modality::UMOT:
      return umot_data(p.coeffs, p.bc1, *p.eta, *p.bc2).field;
    case Modality::AET_POWER:
      return power_density(p.coeffs, p.bc1.data).field;
    case Modality::AET_CROSS:
      return cross_power(p.coeffs, p.bc1.data, p.bc2->data).field;
    default:
      return qpat_data(p.coeffs, p.bc1.data).field;
  }
}

namespace detail {

inline void sidecar_boundary(std::ostream& os, const std::string& key, const Boundary& b) {
  auto edge = [&](const char* name, const std::vector<cplx>& v) {
    os << key << "." << name << " =";
    os.precision(17);
    for (const auto& z : v) os << " " << z.real() << "," << z.imag();
    os << "\n";
  };
  edge("bottom", b.bottom);
  edge("top", b.top);
  edge("left", b.left);
  edge("right", b.right);
}

}  // namespace detail

// key = value sidecar describing the provenance; coefficient grids travel as
// separate grid dumps referenced by the caller.
inline void write_sidecar(std::ostream& os, const InternalData& d) {
  const Provenance& p = d.provenance;
  os << "modality = " << modality_name(d.modality) << "\n";
  os << "n = " << d.field.grid.n << "\n";
  os.precision(17);
  os << "h = " << d.field.grid.h << "\n";
  if (p.coeffs.p) os << "p = " << *p.coeffs.p << "\n";
  os << "bc1.kind = " << (p.bc1.kind == BcKind::Dirichlet ? "dirichlet" : "robin") << "\n";
  detail::sidecar_boundary(os, "bc1.data", p.bc1.data);
  if (p.bc1.kind == BcKind::Robin)
    detail::sidecar_boundary(os, "bc1.gamma", p.bc1.robin_gamma);
  if (p.bc2) {
    os << "bc2.kind = " << (p.bc2->kind == BcKind::Dirichlet ? "dirichlet" : "robin")
       << "\n";
    detail::sidecar_boundary(os, "bc2.data", p.bc2->data);
    if (p.bc2->kind == BcKind::Robin)
      detail::sidecar_boundary(os, "bc2.gamma", p.bc2->robin_gamma);
  }
  if (p.eta) {
    const char* side = p.eta->side == Side::Bottom ? "bottom"
                       : p.eta->side == Side::Top ? "top"
                       : p.eta->side == Side::Left ? "left"
                                                   : "right";
    os << "eta.side = " << side << "\n";
    os << "eta.index = " << p.eta->index << "\n";
  }
}

}  // namespace hil
