#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "fockforge/error.hpp"
#include "fockforge/molecule.hpp"

namespace fockforge {

// Graphene patch geometry. Lengths in angstrom.
struct GraphenePatch {
  int columns = 0;          // atoms per zigzag chain
  int atoms_per_layer = 0;  // chains are filled bottom to top; the last one may be partial
  double bond = 1.42;
  double interlayer = 3.35;
};

struct GraphenePreset {
  std::string_view name;
  GraphenePatch patch;
};

// Patch sizes chosen so that each bilayer has the atom count of the
// corresponding benchmark system.
inline constexpr std::array<GraphenePreset, 5> kGraphenePresets = {{
    {"0.5nm", {6, 22}},
    {"1.0nm", {10, 60}},
    {"1.5nm", {14, 110}},
    {"2.0nm", {17, 178}},
    {"5.0nm", {42, 1008}},
}};

inline const GraphenePreset* find_graphene_preset(std::string_view name) {
  for (const auto& p : kGraphenePresets)
    if (p.name == name) return &p;
  return nullptr;
}

/// Two AB-stacked carbon layers. Chains run along x; atom (c, r) sits at
/// x = c*a/2 with a zigzag offset of bond/2 in y on odd c+r, so vertical
/// bonds join (c, r) and (c, r+1). The second layer is shifted one bond
/// length along y and `interlayer` along z.
inline Molecule build_graphene_bilayer(const GraphenePatch& patch) {
  if (patch.columns < 2) throw Error("graphene patch needs at least 2 columns");
  if (patch.atoms_per_layer < 2) throw Error("graphene patch needs at least 2 atoms per layer");
  if (!(patch.bond > 0.0) || !(patch.interlayer > 0.0)) throw Error("graphene bond and interlayer spacing must be positive");

  const double half_cell = std::sqrt(3.0) * patch.bond / 2.0;
  const double chain_pitch = 1.5 * patch.bond;
  std::vector<Atom> atoms;
  atoms.reserve(2 * static_cast<std::size_t>(patch.atoms_per_layer));
  for (int layer = 0; layer < 2; ++layer) {
    const double dy = layer * patch.bond;
    const double z = layer * patch.interlayer;
    for (int n = 0; n < patch.atoms_per_layer; ++n) {
      const int r = n / patch.columns;
      const int c = n % patch.columns;
      const double x = c * half_cell;
      const double y = r * chain_pitch + ((c + r) % 2 ? 0.5 * patch.bond : 0.0) + dy;
      atoms.push_back({6, {x / kAngstromPerBohr, y / kAngstromPerBohr, z / kAngstromPerBohr}});
    }
  }
  return Molecule(std::move(atoms));
}

inline Molecule build_graphene_bilayer(std::string_view preset) {
  const auto* p = find_graphene_preset(preset);
  if (!p) throw Error("unknown graphene preset '" + std::string(preset) + "'");
  return build_graphene_bilayer(p->patch);
}

} // namespace fockforge
