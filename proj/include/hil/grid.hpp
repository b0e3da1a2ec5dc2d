#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hil {

using cplx = std::complex<double>;

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 1.0;
  double height = 1.0;
};

// Uniform lattice of n x n interior nodes on a square domain, spacing
// h = width/(n+1). Boundary nodes live on the four edges and are stored
// separately from interior values.
struct Grid {
  int n = 0;
  double h = 0.0;
  Rect rect;

  int count() const { return n * n; }
  int idx(int i, int j) const { return j * n + i; }
  double x(int i) const { return rect.x0 + (i + 1) * h; }
  double y(int j) const { return rect.y0 + (j + 1) * h; }

  // shortest physical distance from interior node (i,j) to the domain boundary
  double inset(int i, int j) const {
    double dx = std::min(x(i) - rect.x0, rect.x0 + rect.width - x(i));
    double dy = std::min(y(j) - rect.y0, rect.y0 + rect.height - y(j));
    return std::min(dx, dy);
  }

  bool same_as(const Grid& o) const {
    return n == o.n && h == o.h && rect.x0 == o.rect.x0 && rect.y0 == o.rect.y0 &&
           rect.width == o.rect.width && rect.height == o.rect.height;
  }
};

inline Grid make_grid(int n, const Rect& rect = Rect{}) {
  if (n < 4) throw std::invalid_argument("make_grid: n must be >= 4");
  double hx = rect.width / (n + 1);
  double hy = rect.height / (n + 1);
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
    throw std::invalid_argument("make_grid: non-square cells");
  return Grid{n, hx, rect};
}

enum class Side { Bottom, Top, Left, Right };

struct BoundaryNode {
  Side side;
  int index;  // 0..n-1 along the edge, matching the adjacent interior row/column
};

// Values on the boundary nodes adjacent to the interior lattice, one vector
// per edge, each of length n. Corner points are never touched by the 5-point
// stencil and are not stored.
struct Boundary {
  std::vector<cplx> bottom, top, left, right;

  Boundary() = default;
  explicit Boundary(int n, cplx fill = 0.0)
      : bottom(n, fill), top(n, fill), left(n, fill), right(n, fill) {}

  cplx& at(Side s, int k) {
    switch (s) {
      case Side::Bottom: return bottom[k];
      case Side::Top: return top[k];
      case Side::Left: return left[k];
      default: return right[k];
    }
  }
  cplx at(Side s, int k) const {
    switch (s) {
      case Side::Bottom: return bottom[k];
      case Side::Top: return top[k];
      case Side::Left: return left[k];
      default: return right[k];
    }
  }

  template <typename F>
  static Boundary from_function(const Grid& g, F f) {
    Boundary b(g.n);
    double xa = g.rect.x0, xb = g.rect.x0 + g.rect.width;
    double ya = g.rect.y0, yb = g.rect.y0 + g.rect.height;
    for (int k = 0; k < g.n; ++k) {
      b.bottom[k] = f(g.x(k), ya);
      b.top[k] = f(g.x(k), yb);
      b.left[k] = f(xa, g.y(k));
      b.right[k] = f(xb, g.y(k));
    }
    return b;
  }
};

inline std::pair<double, double> boundary_coords(const Grid& g, const BoundaryNode& bn) {
  switch (bn.side) {
    case Side::Bottom: return {g.x(bn.index), g.rect.y0};
    case Side::Top: return {g.x(bn.index), g.rect.y0 + g.rect.height};
    case Side::Left: return {g.rect.x0, g.y(bn.index)};
    default: return {g.rect.x0 + g.rect.width, g.y(bn.index)};
  }
}

// Complex-valued nodal data; real fields are the zero-imaginary special case.
struct ScalarField {
  Grid grid;
  std::vector<cplx> v;
  std::optional<Boundary> bd;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, cplx fill = 0.0) : grid(g), v(g.count(), fill) {}

  cplx& at(int i, int j) { return v[grid.idx(i, j)]; }
  cplx at(int i, int j) const { return v[grid.idx(i, j)]; }

  template <typename F>
  static ScalarField from_function(const Grid& g, F f, bool with_boundary = false) {
    ScalarField u(g);
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) u.at(i, j) = f(g.x(i), g.y(j));
    if (with_boundary) u.bd = Boundary::from_function(g, f);
    return u;
  }
};

struct VectorField {
  ScalarField x, y;  // d/dx1 and d/dx2 components

  VectorField() = default;
  explicit VectorField(const Grid& g) : x(g), y(g) {}
  const Grid& grid() const { return x.grid; }
};

// Nested subdomains: Omega' (perturbation support) inside Omega'' (audit
// region) inside the domain, defined by inset distances m' > m'' > 0.
struct DomainMasks {
  Grid grid;
  double m_prime = 0.0, m_dprime = 0.0;
  std::vector<std::uint8_t> prime, dprime;

  bool in_prime(int i, int j) const { return prime[grid.idx(i, j)] != 0; }
  bool in_dprime(int i, int j) const { return dprime[grid.idx(i, j)] != 0; }

  std::vector<int> prime_nodes() const {
    std::vector<int> out;
    for (int j = 0; j < grid.n; ++j)
      for (int i = 0; i < grid.n; ++i)
        if (in_prime(i, j)) out.push_back(grid.idx(i, j));
    return out;
  }
  std::vector<int> dprime_nodes() const {
    std::vector<int> out;
    for (int j = 0; j < grid.n; ++j)
      for (int i = 0; i < grid.n; ++i)
        if (in_dprime(i, j)) out.push_back(grid.idx(i, j));
    return out;
  }
};

inline DomainMasks make_masks(const Grid& g, double m_prime = 0.25,
                              double m_dprime = 0.125) {
  if (!(m_prime > m_dprime && m_dprime > 0.0))
    throw std::invalid_argument("make_masks: need m' > m'' > 0");
  DomainMasks m{g, m_prime, m_dprime,
                std::vector<std::uint8_t>(g.count(), 0),
                std::vector<std::uint8_t>(g.count(), 0)};
  int count_prime = 0;
  const double tol = 1e-12;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      double d = g.inset(i, j);
      if (d >= m_dprime - tol) m.dprime[g.idx(i, j)] = 1;
      if (d >= m_prime - tol) {
        m.prime[g.idx(i, j)] = 1;
        ++count_prime;
      }
    }
  if (count_prime == 0) throw std::invalid_argument("make_masks: empty Omega'");
  return m;
}

inline double quintic_smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

// Cutoff equal to 1 on Omega' plus a one-cell collar, 0 outside Omega'',
// quintic ramp of the inset distance in between.
inline ScalarField cutoff_chi(const DomainMasks& m) {
  const Grid& g = m.grid;
  ScalarField chi(g);
  double lo = m.m_dprime;
  double hi = m.m_prime - g.h;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      double d = g.inset(i, j);
      chi.at(i, j) = quintic_smoothstep((d - lo) / (hi - lo));
    }
  return chi;
}

// Centered second-order gradient; one-sided second-order at edges when the
// field carries no boundary values.
inline VectorField gradient(const ScalarField& u) {
  const Grid& g = u.grid;
  VectorField w(g);
  const Boundary* b = u.bd ? &*u.bd : nullptr;
  for (int j = 0; j < g.n; ++j) {
    for (int i = 0; i < g.n; ++i) {
      // x-direction
      {
        cplx lo = (i > 0) ? u.at(i - 1, j) : (b ? b->left[j] : cplx{});
        cplx hi = (i < g.n - 1) ? u.at(i + 1, j) : (b ? b->right[j] : cplx{});
        if (i == 0 && !b)
          w.x.at(i, j) = (-3.0 * u.at(0, j) + 4.0 * u.at(1, j) - u.at(2, j)) / (2 * g.h);
        else if (i == g.n - 1 && !b)
          w.x.at(i, j) =
              (3.0 * u.at(i, j) - 4.0 * u.at(i - 1, j) + u.at(i - 2, j)) / (2 * g.h);
        else
          w.x.at(i, j) = (hi - lo) / (2 * g.h);
      }
      // y-direction
      {
        cplx lo = (j > 0) ? u.at(i, j - 1) : (b ? b->bottom[i] : cplx{});
        cplx hi = (j < g.n - 1) ? u.at(i, j + 1) : (b ? b->top[i] : cplx{});
        if (j == 0 && !b)
          w.y.at(i, j) = (-3.0 * u.at(i, 0) + 4.0 * u.at(i, 1) - u.at(i, 2)) / (2 * g.h);
        else if (j == g.n - 1 && !b)
          w.y.at(i, j) =
              (3.0 * u.at(i, j) - 4.0 * u.at(i, j - 1) + u.at(i, j - 2)) / (2 * g.h);
        else
          w.y.at(i, j) = (hi - lo) / (2 * g.h);
      }
    }
  }
  return w;
}

inline ScalarField divergence(const VectorField& w) {
  if (!w.x.grid.same_as(w.y.grid))
    throw std::invalid_argument("divergence: component grid mismatch");
  VectorField gx = gradient(w.x);
  VectorField gy = gradient(w.y);
  ScalarField out(w.grid());
  for (int k = 0; k < w.grid().count(); ++k) out.v[k] = gx.x.v[k] + gy.y.v[k];
  return out;
}

// 5-point Laplacian; when the field has no boundary values the second
// derivative at the edge falls back to the one-sided 4-point formula.
inline ScalarField laplacian(const ScalarField& u) {
  const Grid& g = u.grid;
  const Boundary* b = u.bd ? &*u.bd : nullptr;
  ScalarField out(g);
  double h2 = g.h * g.h;
  auto d2 = [&](cplx um, cplx u0, cplx up) { return (um - 2.0 * u0 + up) / h2; };
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      cplx dxx, dyy;
      if (i == 0 && !b)
        dxx = (2.0 * u.at(0, j) - 5.0 * u.at(1, j) + 4.0 * u.at(2, j) - u.at(3, j)) / h2;
      else if (i == g.n - 1 && !b)
        dxx = (2.0 * u.at(i, j) - 5.0 * u.at(i - 1, j) + 4.0 * u.at(i - 2, j) -
               u.at(i - 3, j)) / h2;
      else
        dxx = d2(i > 0 ? u.at(i - 1, j) : b->left[j], u.at(i, j),
                 i < g.n - 1 ? u.at(i + 1, j) : b->right[j]);
      if (j == 0 && !b)
        dyy = (2.0 * u.at(i, 0) - 5.0 * u.at(i, 1) + 4.0 * u.at(i, 2) - u.at(i, 3)) / h2;
      else if (j == g.n - 1 && !b)
        dyy = (2.0 * u.at(i, j) - 5.0 * u.at(i, j - 1) + 4.0 * u.at(i, j - 2) -
               u.at(i, j - 3)) / h2;
      else
        dyy = d2(j > 0 ? u.at(i, j - 1) : b->bottom[i], u.at(i, j),
                 j < g.n - 1 ? u.at(i, j + 1) : b->top[i]);
      out.at(i, j) = dxx + dyy;
    }
  return out;
}

// discrete L2 pairing h^2 * sum(u*w), bilinear (no conjugation)
inline cplx inner(const ScalarField& a, const ScalarField& b) {
  if (!a.grid.same_as(b.grid)) throw std::invalid_argument("inner: grid mismatch");
  cplx s = 0.0;
  for (int k = 0; k < a.grid.count(); ++k) s += a.v[k] * b.v[k];
  return s * a.grid.h * a.grid.h;
}

inline cplx inner(const VectorField& a, const VectorField& b) {
  return inner(a.x, b.x) + inner(a.y, b.y);
}

inline double norm_l2(const ScalarField& a) {
  double s = 0.0;
  for (const auto& z : a.v) s += std::norm(z);
  return std::sqrt(s) * a.grid.h;
}

inline double norm_l2(const VectorField& a) {
  double sx = norm_l2(a.x), sy = norm_l2(a.y);
  return std::sqrt(sx * sx + sy * sy);
}

inline double max_abs(const ScalarField& a) {
  double m = 0.0;
  for (const auto& z : a.v) m = std::max(m, std::abs(z));
  return m;
}

// Sample a field on a nested fine grid down to a coarse grid: coarse node i
// coincides with fine node k(i+1)-1 when (nf+1) = k (nc+1).
inline ScalarField restrict_nested(const ScalarField& fine, const Grid& coarse) {
  int k = (fine.grid.n + 1) / (coarse.n + 1);
  if (k * (coarse.n + 1) != fine.grid.n + 1)
    throw std::invalid_argument("restrict_nested: grids are not nested");
  ScalarField out(coarse);
  for (int j = 0; j < coarse.n; ++j)
    for (int i = 0; i < coarse.n; ++i)
      out.at(i, j) = fine.v[fine.grid.idx(k * (i + 1) - 1, k * (j + 1) - 1)];
  return out;
}

// --- grid dump formats -----------------------------------------------------
//
// Text: header "grid n h x0 y0 w h_rect", then n^2 rows "i j re im".
// Binary: 8-byte magic "HLGRID01", then int64 n, float64 h,x0,y0,w,h_rect,
// then re,im interleaved float64, row-major.

inline void dump_grid_text(std::ostream& os, const ScalarField& u) {
  const Grid& g = u.grid;
  os.precision(17);
  os << "grid " << g.n << " " << g.h << " " << g.rect.x0 << " " << g.rect.y0 << " "
     << g.rect.width << " " << g.rect.height << "\n";
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      cplx z = u.at(i, j);
      os << i << " " << j << " " << z.real() << " " << z.imag() << "\n";
    }
}

inline void dump_grid_binary(std::ostream& os, const ScalarField& u) {
  const Grid& g = u.grid;
  os.write("HLGRID01", 8);
  std::int64_t n = g.n;
  os.write(reinterpret_cast<const char*>(&n), 8);
  double hdr[5] = {g.h, g.rect.x0, g.rect.y0, g.rect.width, g.rect.height};
  os.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  for (const auto& z : u.v) {
    double re = z.real(), im = z.imag();
    os.write(reinterpret_cast<const char*>(&re), 8);
    os.write(reinterpret_cast<const char*>(&im), 8);
  }
}

inline ScalarField load_grid_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (std::string(magic, 8) != "HLGRID01")
    throw std::runtime_error("load_grid_binary: bad magic");
  std::int64_t n;
  is.read(reinterpret_cast<char*>(&n), 8);
  double hdr[5];
  is.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  Grid g = make_grid(static_cast<int>(n), Rect{hdr[1], hdr[2], hdr[3], hdr[4]});
  ScalarField u(g);
  for (auto& z : u.v) {
    double re, im;
    is.read(reinterpret_cast<char*>(&re), 8);
    is.read(reinterpret_cast<char*>(&im), 8);
    z = {re, im};
  }
  return u;
}

}  // namespace hil
