#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hil/grid.hpp"
#include "hil/rng.hpp"

namespace hil {

// Config-level failures exit with a distinct code from numerical failures;
// the message always names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex16(std::uint64_t h) {
  static const char* d = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[(size_t)i] = d[h & 0xf];
  return s;
}

// [section] / key = value / '#' comments; a TOML-compatible subset.
struct Scenario {
  int n = 31;
  double m_prime = 0.25;
  double m_dprime = 0.125;
  std::string modality = "aet";  // aet | aet-cross | p-small | qpat | umot
  double p = 0.5;
  double lambda = 0.1;
  std::uint64_t seed = 1;
  std::map<std::string, std::string> coeff;  // sigma / gamma / mu -> recipe
  std::vector<std::string> boundary;         // f1, f2, ... recipes
  std::string sweep_kind = "p-small";
  double rho1 = 20.0;
  double rho2 = 20.0 * M_SQRT2;
  int t_samples = 5;
  int xi_angles = 64;
  std::vector<double> cgo_rhos = {5.0, 10.0, 20.0, 40.0};
  std::string method = "a0x1";  // a0x1 | qpat-lambda | svd-pinv
  std::string rho_true = "gaussian-bump 0.5 0.5 60 1.0";
  std::string nu_true = "gaussian-bump 0.55 0.45 90 0.6";
  std::string hash;  // hex16 FNV-1a of the raw config bytes
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double num(const std::map<std::string, std::string>& kv, const std::string& key,
                  double dflt) {
  auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  try {
    size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config field " + key + ": not a number: " + it->second);
  }
}

inline std::string str(const std::map<std::string, std::string>& kv,
                       const std::string& key, const std::string& dflt) {
  auto it = kv.find(key);
  return it == kv.end() ? dflt : it->second;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    if (!val.empty() && val.front() == '"' && val.back() == '"' && val.size() >= 2)
      val = val.substr(1, val.size() - 2);
    kv[section.empty() ? key : section + "." + key] = val;
  }

  Scenario s;
  s.hash = hex16(fnv1a64(text));
  s.n = (int)detail::num(kv, "grid.n", s.n);
  if (s.n < 3) throw ConfigError("config field grid.n: need n >= 3");
  s.m_prime = detail::num(kv, "masks.m_prime", s.m_prime);
  s.m_dprime = detail::num(kv, "masks.m_dprime", s.m_dprime);
  s.modality = detail::str(kv, "modality.kind", s.modality);
  if (s.modality != "aet" && s.modality != "aet-cross" && s.modality != "p-small" &&
      s.modality != "qpat" && s.modality != "umot")
    throw ConfigError("config field modality.kind: unknown modality " + s.modality);
  s.p = detail::num(kv, "modality.p", s.p);
  if ((s.modality == "aet" || s.modality == "aet-cross" || s.modality == "p-small") &&
      !(s.p > 0.0))
    throw ConfigError("config field modality.p: must be positive");
  s.lambda = detail::num(kv, "modality.lambda", s.lambda);
  s.seed = (std::uint64_t)detail::num(kv, "random.seed", (double)s.seed);
  for (const char* c : {"sigma", "gamma", "mu"}) {
    auto it = kv.find(std::string("coefficients.") + c);
    if (it != kv.end()) s.coeff[c] = it->second;
  }
  for (int k = 1;; ++k) {
    auto it = kv.find("boundary.f" + std::to_string(k));
    if (it == kv.end()) break;
    s.boundary.push_back(it->second);
  }
  s.sweep_kind = detail::str(kv, "sweep.kind", s.sweep_kind);
  s.rho1 = detail::num(kv, "sweep.rho1", s.rho1);
  s.rho2 = detail::num(kv, "sweep.rho2", s.rho2);
  s.t_samples = (int)detail::num(kv, "sweep.t_samples", s.t_samples);
  s.xi_angles = (int)detail::num(kv, "sweep.xi_angles", s.xi_angles);
  if (auto it = kv.find("cgo.rhos"); it != kv.end()) {
    s.cgo_rhos.clear();
    std::istringstream rs(it->second);
    double v;
    while (rs >> v) s.cgo_rhos.push_back(v);
    if (s.cgo_rhos.empty()) throw ConfigError("config field cgo.rhos: empty list");
  }
  s.method = detail::str(kv, "reconstruct.method", s.method);
  s.rho_true = detail::str(kv, "reconstruct.rho_true", s.rho_true);
  s.nu_true = detail::str(kv, "reconstruct.nu_true", s.nu_true);
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("config file not readable: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

// --- analytic recipe families ----------------------------------------------

// Coefficient recipes (admissible fields vanish outside Omega' via the cutoff;
// "constant" is the global background and carries its own trace):
//   constant C
//   gaussian-bump CX CY WIDTH AMP      -> AMP exp(-WIDTH r^2) chi(x)
//   product-sine KX KY AMP             -> AMP sin(pi KX x) sin(pi KY y) chi(x)
//   random-smooth COUNT AMP            -> COUNT seeded gaussian bumps in Omega'
inline ScalarField coefficient_recipe(const Grid& g, const DomainMasks& masks,
                                      const std::string& recipe, Rng& rng) {
  std::istringstream is(recipe);
  std::string name;
  is >> name;
  auto want = [&](int k) {
    std::vector<double> a((size_t)k);
    for (auto& v : a)
      if (!(is >> v)) throw ConfigError("coefficient recipe " + name + ": missing parameter");
    return a;
  };
  if (name == "constant") {
    double c = want(1)[0];
    return ScalarField::from_function(g, [c](double, double) { return c; }, true);
  }
  ScalarField chi = cutoff_chi(masks);
  if (name == "gaussian-bump") {
    auto a = want(4);
    ScalarField f(g);
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        double x = g.x(i), y = g.x(j);
        double r2 = (x - a[0]) * (x - a[0]) + (y - a[1]) * (y - a[1]);
        f.at(i, j) = a[3] * std::exp(-a[2] * r2) * chi.at(i, j);
      }
    f.bd = Boundary(g.n, 0.0);
    return f;
  }
  if (name == "product-sine") {
    auto a = want(3);
    ScalarField f(g);
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i)
        f.at(i, j) = a[2] * std::sin(M_PI * a[0] * g.x(i)) *
                     std::sin(M_PI * a[1] * g.x(j)) * chi.at(i, j);
    f.bd = Boundary(g.n, 0.0);
    return f;
  }
  if (name == "random-smooth") {
    auto a = want(2);
    int count = (int)a[0];
    ScalarField f(g);
    for (int b = 0; b < count; ++b) {
      double cx = rng.uniform(0.3, 0.7), cy = rng.uniform(0.3, 0.7);
      double w = rng.uniform(40.0, 120.0), amp = rng.uniform(-a[1], a[1]);
      for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
          double x = g.x(i), y = g.x(j);
          double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          f.at(i, j) += amp * std::exp(-w * r2) * chi.at(i, j);
        }
    }
    f.bd = Boundary(g.n, 0.0);
    return f;
  }
  throw ConfigError("unknown coefficient recipe: " + name);
}

// Boundary recipes:
//   x1 | x2 | constant C | affine A B C (A + B x + C y) | exp LAMBDA SX SY
inline Boundary boundary_recipe(const Grid& g, const std::string& recipe) {
  std::istringstream is(recipe);
  std::string name;
  is >> name;
  auto want = [&](int k) {
    std::vector<double> a((size_t)k);
    for (auto& v : a)
      if (!(is >> v)) throw ConfigError("boundary recipe " + name + ": missing parameter");
    return a;
  };
  if (name == "x1")
    return Boundary::from_function(g, [](double x, double) { return x; });
  if (name == "x2")
    return Boundary::from_function(g, [](double, double y) { return y; });
  if (name == "constant") {
    double c = want(1)[0];
    return Boundary::from_function(g, [c](double, double) { return c; });
  }
  if (name == "affine") {
    auto a = want(3);
    return Boundary::from_function(
        g, [a](double x, double y) { return a[0] + a[1] * x + a[2] * y; });
  }
  if (name == "exp") {
    auto a = want(3);
    return Boundary::from_function(
        g, [a](double x, double y) { return std::exp(a[0] * (a[1] * x + a[2] * y)); });
  }
  throw ConfigError("unknown boundary recipe: " + name);
}

}  // namespace hil
