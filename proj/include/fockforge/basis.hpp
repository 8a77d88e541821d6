#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fockforge/error.hpp"
#include "fockforge/molecule.hpp"

namespace fockforge {

inline constexpr int kMaxAngularMomentum = 2;

struct Primitive {
  double exponent = 0.0;     // bohr^-2
  double coefficient = 0.0;  // as written in the basis file
};

enum class GroupType { S, P, D, SP };

inline std::string_view group_type_name(GroupType t) {
  switch (t) {
    case GroupType::S: return "S";
    case GroupType::P: return "P";
    case GroupType::D: return "D";
    case GroupType::SP: return "SP";
  }
  return "?";
}

// One shell group as written in the basis file. For SP groups `primitives`
// holds the S coefficients and `p_coefficients` the P ones.
struct ShellGroupDef {
  GroupType type = GroupType::S;
  std::vector<Primitive> primitives;
  std::vector<double> p_coefficients;
};

struct BasisSpec {
  std::string name;
  std::map<int, std::vector<ShellGroupDef>> elements;

  bool has(int z) const { return elements.count(z) != 0; }
  const std::vector<ShellGroupDef>& groups(int z) const {
    auto it = elements.find(z);
    if (it == elements.end()) throw Error("basis '" + name + "' has no entry for element " + std::string(element_symbol(z)));
    return it->second;
  }
};

/// Parses the block format
///
///   element C
///   S 3
///     71.6168370  0.15432897
///     ...
///   SP 3
///     2.9412494  -0.09996723  0.15591627
///     ...
///   end
///
/// `#` starts a comment. Coefficients are kept as written; normalization
/// happens in assign_basis.
inline BasisSpec parse_basis(std::string_view text, std::string name = "custom") {
  BasisSpec spec;
  spec.name = std::move(name);
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;

  auto tokens_of = [](const std::string& line) {
    std::vector<std::string> toks;
    std::string stripped = line.substr(0, line.find('#'));
    std::istringstream ls(stripped);
    for (std::string t; ls >> t;) toks.push_back(t);
    return toks;
  };
  auto to_double = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      std::string fixed = s;
      for (auto& c : fixed)
        if (c == 'D' || c == 'd') c = 'E';  // Fortran exponents
      v = std::stod(fixed, &pos);
      if (pos != fixed.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw ParseError("invalid number '" + s + "'", lineno);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite number '" + s + "'", lineno);
    return v;
  };

  int current = 0;  // element being read, 0 outside a block
  std::vector<ShellGroupDef>* groups = nullptr;
  while (std::getline(in, raw)) {
    ++lineno;
    auto toks = tokens_of(raw);
    if (toks.empty()) continue;
    if (current == 0) {
      if (toks[0] != "element" || toks.size() != 2) throw ParseError("expected 'element <symbol>'", lineno);
      current = element_from_symbol(toks[1]);
      if (current == 0) throw ParseError("unknown element '" + toks[1] + "'", lineno);
      if (spec.has(current)) throw ParseError("duplicate element '" + toks[1] + "'", lineno);
      groups = &spec.elements[current];
      continue;
    }
    if (toks[0] == "end") {
      if (toks.size() != 1) throw ParseError("unexpected tokens after 'end'", lineno);
      if (groups->empty()) throw ParseError("element has no shells", lineno);
      current = 0;
      groups = nullptr;
      continue;
    }
    ShellGroupDef g;
    if (toks[0] == "S") g.type = GroupType::S;
    else if (toks[0] == "P") g.type = GroupType::P;
    else if (toks[0] == "D") g.type = GroupType::D;
    else if (toks[0] == "SP" || toks[0] == "L") g.type = GroupType::SP;
    else throw ParseError("expected shell type S, P, D, SP or 'end', got '" + toks[0] + "'", lineno);
    if (toks.size() != 2) throw ParseError("expected '<type> <nprim>'", lineno);
    int nprim = 0;
    try {
      nprim = std::stoi(toks[1]);
    } catch (const std::exception&) {
      throw ParseError("invalid primitive count '" + toks[1] + "'", lineno);
    }
    if (nprim < 1) throw ParseError("primitive count must be positive", lineno);
    const std::size_t ncols = g.type == GroupType::SP ? 3 : 2;
    for (int p = 0; p < nprim; ++p) {
      if (!std::getline(in, raw)) throw ParseError("unexpected end of input inside shell", lineno + 1);
      ++lineno;
      auto pt = tokens_of(raw);
      if (pt.empty()) {
        --p;
        continue;
      }
      if (pt.size() != ncols)
        throw ParseError("expected " + std::to_string(ncols) + " columns, got " + std::to_string(pt.size()), lineno);
      Primitive prim{to_double(pt[0]), to_double(pt[1])};
      if (prim.exponent <= 0.0) throw ParseError("non-positive exponent", lineno);
      g.primitives.push_back(prim);
      if (ncols == 3) g.p_coefficients.push_back(to_double(pt[2]));
    }
    groups->push_back(std::move(g));
  }
  if (current != 0) throw ParseError("missing 'end' for element " + std::string(element_symbol(current)), lineno);
  return spec;
}

inline BasisSpec read_basis_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open basis file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_basis(ss.str(), path);
}

struct CartesianPower {
  int x = 0, y = 0, z = 0;
};

inline constexpr int shell_width(int l) { return (l + 1) * (l + 2) / 2; }

/// Cartesian components in the conventional order (xx, xy, xz, yy, yz, zz for d).
inline std::vector<CartesianPower> cartesian_components(int l) {
  std::vector<CartesianPower> out;
  for (int i = l; i >= 0; --i)
    for (int j = l - i; j >= 0; --j) out.push_back({i, j, l - i - j});
  return out;
}

inline double double_factorial(int n) {  // n!! with (-1)!! = 1
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

/// Contracted Cartesian shell. `coefficients` already include primitive and
/// contraction normalization for the (l,0,0) component; the remaining
/// per-component factor lives in `component_scale`.
struct Shell {
  int atom = 0;
  int l = 0;
  Vec3 center{};
  std::vector<double> exponents;
  std::vector<double> coefficients;
  std::vector<double> component_scale;
  int bf_offset = 0;
  int group = 0;  // index of the source shell group

  int width() const noexcept { return shell_width(l); }
  std::size_t nprim() const noexcept { return exponents.size(); }
};

namespace detail {

inline Shell make_shell(int atom, int l, const Vec3& center, const std::vector<Primitive>& prims,
                        const std::vector<double>* coef_override) {
  Shell sh;
  sh.atom = atom;
  sh.l = l;
  sh.center = center;
  const double pi = std::numbers::pi;
  const double dfl = double_factorial(2 * l - 1);
  for (std::size_t k = 0; k < prims.size(); ++k) {
    const double a = prims[k].exponent;
    const double c = coef_override ? (*coef_override)[k] : prims[k].coefficient;
    const double norm = std::pow(2.0 * a / pi, 0.75) * std::pow(4.0 * a, 0.5 * l) / std::sqrt(dfl);
    sh.exponents.push_back(a);
    sh.coefficients.push_back(c * norm);
  }
  // Self-overlap of the (l,0,0) component of the contraction.
  double self = 0.0;
  for (std::size_t i = 0; i < sh.nprim(); ++i) {
    for (std::size_t j = 0; j < sh.nprim(); ++j) {
      const double g = sh.exponents[i] + sh.exponents[j];
      self += sh.coefficients[i] * sh.coefficients[j] * dfl / std::pow(2.0 * g, l) * std::pow(pi / g, 1.5);
    }
  }
  if (!(self > 0.0)) throw Error("contracted shell has zero norm");
  const double scale = 1.0 / std::sqrt(self);
  for (auto& c : sh.coefficients) c *= scale;
  for (const auto& p : cartesian_components(l)) {
    sh.component_scale.push_back(
        std::sqrt(dfl / (double_factorial(2 * p.x - 1) * double_factorial(2 * p.y - 1) * double_factorial(2 * p.z - 1))));
  }
  return sh;
}

} // namespace detail

class BasisSet {
 public:
  BasisSet() = default;
  BasisSet(std::vector<Shell> shells, std::size_t n_atoms, std::size_t n_groups)
      : shells_(std::move(shells)), n_atoms_(n_atoms), n_groups_(n_groups) {
    int off = 0;
    for (auto& s : shells_) {
      if (s.l < 0 || s.l > kMaxAngularMomentum) throw Error("unsupported angular momentum " + std::to_string(s.l));
      if (s.exponents.empty()) throw Error("shell without primitives");
      s.bf_offset = off;
      off += s.width();
      max_width_ = std::max(max_width_, s.width());
      max_l_ = std::max(max_l_, s.l);
    }
    n_bf_ = static_cast<std::size_t>(off);
  }

  const std::vector<Shell>& shells() const noexcept { return shells_; }
  const Shell& operator[](std::size_t i) const { return shells_[i]; }
  std::size_t size() const noexcept { return shells_.size(); }
  std::size_t n_bf() const noexcept { return n_bf_; }
  std::size_t n_atoms() const noexcept { return n_atoms_; }
  std::size_t n_groups() const noexcept { return n_groups_; }
  int max_width() const noexcept { return max_width_; }
  int max_l() const noexcept { return max_l_; }

 private:
  std::vector<Shell> shells_;
  std::size_t n_atoms_ = 0;
  std::size_t n_groups_ = 0;
  std::size_t n_bf_ = 0;
  int max_width_ = 1;
  int max_l_ = 0;
};

/// Shells ordered by atom, then group; an SP group becomes an S shell
/// followed by a P shell with the same exponents.
inline BasisSet assign_basis(const Molecule& mol, const BasisSpec& spec) {
  std::vector<Shell> shells;
  std::size_t group = 0;
  for (std::size_t a = 0; a < mol.size(); ++a) {
    const auto& atom = mol[a];
    if (!spec.has(atom.element))
      throw Error("basis '" + spec.name + "' has no entry for element " + std::string(element_symbol(atom.element)));
    for (const auto& g : spec.groups(atom.element)) {
      const int ai = static_cast<int>(a);
      switch (g.type) {
        case GroupType::S: shells.push_back(detail::make_shell(ai, 0, atom.position, g.primitives, nullptr)); break;
        case GroupType::P: shells.push_back(detail::make_shell(ai, 1, atom.position, g.primitives, nullptr)); break;
        case GroupType::D: shells.push_back(detail::make_shell(ai, 2, atom.position, g.primitives, nullptr)); break;
        case GroupType::SP:
          shells.push_back(detail::make_shell(ai, 0, atom.position, g.primitives, nullptr));
          shells.back().group = static_cast<int>(group);
          shells.push_back(detail::make_shell(ai, 1, atom.position, g.primitives, &g.p_coefficients));
          break;
      }
      shells.back().group = static_cast<int>(group);
      ++group;
    }
  }
  return BasisSet(std::move(shells), mol.size(), group);
}

struct CountReport {
  std::size_t atoms = 0;
  std::size_t shell_groups = 0;
  std::size_t internal_shells = 0;
  std::size_t n_bf = 0;

  friend bool operator==(const CountReport&, const CountReport&) = default;
};

inline CountReport count_report(const BasisSet& basis) {
  return {basis.n_atoms(), basis.n_groups(), basis.size(), basis.n_bf()};
}

} // namespace fockforge
