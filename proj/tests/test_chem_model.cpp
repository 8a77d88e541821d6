#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fockforge/basis.hpp"
#include "fockforge/builtin_basis.hpp"
#include "fockforge/graphene.hpp"
#include "fockforge/molecule.hpp"
#include "support/systems.hpp"

using namespace fockforge;
using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("element symbols round trip") {
  for (int z = 1; z <= kMaxElement; ++z) CHECK(element_from_symbol(element_symbol(z)) == z);
  CHECK(element_from_symbol("c") == 6);
  CHECK(element_from_symbol("CL") == 17);
  CHECK(element_from_symbol("Xx") == 0);
  CHECK(element_from_symbol("") == 0);
  CHECK_THROWS_AS(element_symbol(0), Error);
}

TEST_CASE("molecule validates atoms and parity") {
  CHECK_THROWS_AS(Molecule(std::vector<Atom>{}), Error);
  CHECK_THROWS_AS(Molecule(std::vector<Atom>{{19, {0, 0, 0}}}), Error);
  CHECK_THROWS_AS(Molecule(std::vector<Atom>{{1, {0, 0, 0}}}), Error);
  CHECK_THROWS_AS(Molecule(std::vector<Atom>{{1, {NAN, 0, 0}}, {1, {0, 0, 1}}}), Error);
  const Molecule h(std::vector<Atom>{{1, {0, 0, 0}}}, -1);
  CHECK(h.electron_count() == 2);
  CHECK(h.occupied_orbitals() == 1);
}

TEST_CASE("nuclear repulsion") {
  CHECK(nuclear_repulsion(systems::h2()) == Approx(1.0 / 1.4).epsilon(1e-15));
  const Molecule clash(std::vector<Atom>{{1, {0, 0, 0}}, {1, {0, 0, 0}}});
  CHECK_THROWS_AS(nuclear_repulsion(clash), Error);
}

TEST_CASE("xyz parsing converts angstrom to bohr") {
  const auto mol = parse_xyz("2\nhydrogen\nH 0 0 0\nH 0 0 0.74\n");
  REQUIRE(mol.size() == 2);
  CHECK(mol[1].position[2] == Approx(0.74 / kAngstromPerBohr));
  CHECK(mol[0].element == 1);
}

TEST_CASE("xyz parse errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_xyz(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("") == 1);
  CHECK(line_of("x\n") == 1);
  CHECK(line_of("2\n") == 2);
  CHECK(line_of("2\ncomment\nH 0 0 0\n") == 4);
  CHECK(line_of("1\ncomment\nQq 0 0 0\n") == 3);
  CHECK(line_of("1\ncomment\nH 0 zero 0\n") == 3);
}

TEST_CASE("basis parser reads groups and SP shells") {
  const auto spec = *builtin_basis("sto-3g");
  REQUIRE(spec.has(6));
  const auto& c = spec.groups(6);
  REQUIRE(c.size() == 2);
  CHECK(c[1].type == GroupType::SP);
  CHECK(c[1].p_coefficients.size() == 3);
  CHECK(c[1].primitives[0].exponent == 2.9412494);
  CHECK(spec.groups(1).size() == 1);
  CHECK_THROWS_AS(spec.groups(8), Error);
}

TEST_CASE("basis parser accepts Fortran exponents and comments") {
  const auto spec = parse_basis("element H # hydrogen\nS 1\n  1.0D+00 1.0\nend\n");
  CHECK(spec.groups(1)[0].primitives[0].exponent == 1.0);
}

TEST_CASE("basis parse errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_basis(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("S 1\n") == 1);
  CHECK(line_of("element Zz\n") == 1);
  CHECK(line_of("element H\nF 1\n") == 2);
  CHECK(line_of("element H\nS 0\n") == 2);
  CHECK(line_of("element H\nS 2\n 1.0 1.0\n") == 4);
  CHECK(line_of("element H\nS 1\n 1.0\nend\n") == 3);
  CHECK(line_of("element H\nS 1\n -1.0 1.0\nend\n") == 3);
  CHECK(line_of("element H\nS 1\n 1.0 abc\nend\n") == 3);
  CHECK(line_of("element H\nS 1\n 1.0 1.0\n") == 3);
  CHECK(line_of("element H\nend\n") == 2);
  CHECK(line_of("element H\nS 1\n 1.0 1.0\nend\nelement H\n") == 5);
}

TEST_CASE("builtin basis text matches the data files") {
  const std::string dir = FOCKFORGE_SOURCE_DIR "/data/basis/";
  CHECK(std::string(k631GdText) == slurp(dir + "6-31g_d.bas"));
  CHECK(std::string(kSto3GText) == slurp(dir + "sto-3g.bas"));
  CHECK(builtin_basis("6-31G*"));
  CHECK(builtin_basis("STO-3G"));
  CHECK_FALSE(builtin_basis("cc-pvdz"));
}

TEST_CASE("basis assignment counts functions") {
  const auto basis = assign_basis(systems::c2h2(), systems::basis_631gd());
  // C: S, SP, SP, D groups as 6 shells and 15 functions; H: 2 S groups.
  CHECK(count_report(basis) == CountReport{4, 12, 16, 34});
  CHECK(basis.max_l() == 2);
  CHECK(basis.max_width() == 6);
  int offset = 0;
  for (const auto& s : basis.shells()) {
    CHECK(s.bf_offset == offset);
    offset += s.width();
  }
  CHECK_THROWS_AS(assign_basis(Molecule(std::vector<Atom>{{8, {0, 0, 0}}}), systems::basis_631gd()), Error);
}

TEST_CASE("cartesian components are ordered and complete") {
  for (int l = 0; l <= kMaxAngularMomentum; ++l) {
    const auto c = cartesian_components(l);
    REQUIRE(static_cast<int>(c.size()) == shell_width(l));
    for (const auto& p : c) CHECK(p.x + p.y + p.z == l);
    CHECK(c.front().x == l);
  }
}

TEST_CASE("graphene presets reproduce the benchmark sizes") {
  struct Row {
    const char* name;
    std::size_t atoms, groups, n_bf;
  };
  const Row rows[] = {{"0.5nm", 44, 176, 660},
                      {"1.0nm", 120, 480, 1800},
                      {"1.5nm", 220, 880, 3300},
                      {"2.0nm", 356, 1424, 5340},
                      {"5.0nm", 2016, 8064, 30240}};
  for (const auto& r : rows) {
    INFO(r.name);
    const auto basis = assign_basis(build_graphene_bilayer(r.name), systems::basis_631gd());
    const auto c = count_report(basis);
    CHECK(c.atoms == r.atoms);
    CHECK(c.shell_groups == r.groups);
    CHECK(c.n_bf == r.n_bf);
    CHECK(c.internal_shells == 6 * r.atoms);
  }
  CHECK_THROWS_AS(build_graphene_bilayer("3nm"), Error);
}

TEST_CASE("graphene geometry has carbon-carbon bonds and no clashes") {
  const auto mol = build_graphene_bilayer("0.5nm");
  const double bond = 1.42 / kAngstromPerBohr;
  double closest = 1e9;
  for (std::size_t a = 0; a < mol.size(); ++a) {
    CHECK(mol[a].element == 6);
    for (std::size_t b = 0; b < a; ++b) closest = std::min(closest, distance(mol[a].position, mol[b].position));
  }
  CHECK(closest == Approx(bond).epsilon(1e-12));
  // Every in-plane neighbour sits at one bond length; each atom has 1 to 3.
  for (std::size_t a = 0; a < mol.size(); ++a) {
    int nb = 0;
    for (std::size_t b = 0; b < mol.size(); ++b)
      if (a != b && distance(mol[a].position, mol[b].position) < 1.01 * bond) ++nb;
    CHECK(nb >= 1);
    CHECK(nb <= 3);
  }
}
