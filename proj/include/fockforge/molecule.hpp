#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fockforge/error.hpp"

namespace fockforge {

inline constexpr double kAngstromPerBohr = 0.52917721067;
inline constexpr int kMaxElement = 18;

using Vec3 = std::array<double, 3>;

inline constexpr std::array<std::string_view, kMaxElement + 1> kElementSymbols = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",
    "Ne", "Na", "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar"};

/// Atomic number for a symbol such as "C" or "cl"; 0 when unknown.
inline int element_from_symbol(std::string_view symbol) {
  if (symbol.empty() || symbol.size() > 2) return 0;
  std::string norm;
  norm += static_cast<char>(std::toupper(static_cast<unsigned char>(symbol[0])));
  if (symbol.size() == 2) norm += static_cast<char>(std::tolower(static_cast<unsigned char>(symbol[1])));
  for (int z = 1; z <= kMaxElement; ++z)
    if (kElementSymbols[z] == norm) return z;
  return 0;
}

inline std::string_view element_symbol(int z) {
  if (z < 1 || z > kMaxElement) throw Error("element out of supported range: " + std::to_string(z));
  return kElementSymbols[z];
}

struct Atom {
  int element = 1;
  Vec3 position{};  // bohr
};

inline double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Closed-shell molecule. Construction validates the element range, finite
/// coordinates and an even electron count.
class Molecule {
 public:
  explicit Molecule(std::vector<Atom> atoms, int charge = 0) : atoms_(std::move(atoms)), charge_(charge) {
    if (atoms_.empty()) throw Error("molecule has no atoms");
    for (const auto& a : atoms_) {
      if (a.element < 1 || a.element > kMaxElement)
        throw Error("atomic number out of supported range 1..18: " + std::to_string(a.element));
      for (double c : a.position)
        if (!std::isfinite(c)) throw Error("non-finite atomic coordinate");
    }
    if (electron_count() < 0) throw Error("negative electron count");
    if (electron_count() % 2 != 0)
      throw Error("odd electron count " + std::to_string(electron_count()) + " (closed shell required)");
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  int charge() const noexcept { return charge_; }

  int electron_count() const noexcept {
    int n = -charge_;
    for (const auto& a : atoms_) n += a.element;
    return n;
  }

  int occupied_orbitals() const noexcept { return electron_count() / 2; }

 private:
  std::vector<Atom> atoms_;
  int charge_;
};

/// E_nuc = sum_{A<B} Z_A Z_B / |R_A - R_B|, in hartree.
inline double nuclear_repulsion(const Molecule& mol) {
  double e = 0.0;
  const auto& atoms = mol.atoms();
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      const double r = distance(atoms[a].position, atoms[b].position);
      if (r < 1e-8) throw Error("coincident atoms " + std::to_string(b) + " and " + std::to_string(a));
      e += static_cast<double>(atoms[a].element * atoms[b].element) / r;
    }
  }
  return e;
}

// XYZ: count line, comment line, then "El x y z" in angstrom.
inline Molecule parse_xyz(std::string_view text, int charge = 0) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    return true;
  };
  if (!next()) throw ParseError("empty xyz input", 1);
  std::size_t count = 0;
  {
    std::istringstream ls(line);
    long long n = -1;
    if (!(ls >> n) || n < 1) throw ParseError("expected positive atom count", lineno);
    count = static_cast<std::size_t>(n);
  }
  if (!next()) throw ParseError("missing comment line", lineno + 1);
  std::vector<Atom> atoms;
  atoms.reserve(count);
  while (atoms.size() < count) {
    if (!next()) throw ParseError("expected " + std::to_string(count) + " atoms, got " + std::to_string(atoms.size()), lineno + 1);
    std::istringstream ls(line);
    std::string sym;
    double x, y, z;
    if (!(ls >> sym)) continue;  // blank line
    if (!(ls >> x >> y >> z)) throw ParseError("malformed atom line", lineno);
    int zn = element_from_symbol(sym);
    if (zn == 0) throw ParseError("unknown element '" + sym + "'", lineno);
    atoms.push_back({zn, {x / kAngstromPerBohr, y / kAngstromPerBohr, z / kAngstromPerBohr}});
  }
  return Molecule(std::move(atoms), charge);
}

inline Molecule read_xyz_file(const std::string& path, int charge = 0) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open geometry file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_xyz(ss.str(), charge);
}

} // namespace fockforge
