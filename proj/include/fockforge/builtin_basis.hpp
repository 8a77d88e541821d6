#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "fockforge/basis.hpp"

namespace fockforge {

// Copies of data/basis/*.bas; a test keeps them in sync.
inline constexpr std::string_view k631GdText = R"BAS(# 6-31G(d) for H and C, Cartesian d functions.
element H
S 3
  18.7311370   0.03349460
  2.8253937    0.23472695
  0.6401217    0.81375733
S 1
  0.1612778    1.0
end

element C
S 6
  3047.5249    0.0018347
  457.36951    0.0140373
  103.94869    0.0688426
  29.210155    0.2321844
  9.2866630    0.4679413
  3.1639270    0.3623120
SP 3
  7.8682724   -0.1193324   0.0689991
  1.8812885   -0.1608542   0.3164240
  0.5442493    1.1434564   0.7443083
SP 1
  0.1687144    1.0         1.0
D 1
  0.8          1.0
end
)BAS";

inline constexpr std::string_view kSto3GText = R"BAS(# STO-3G for H and C.
element H
S 3
  3.42525091   0.15432897
  0.62391373   0.53532814
  0.16885540   0.44463454
end

element C
S 3
  71.6168370   0.15432897
  13.0450960   0.53532814
  3.5305122    0.44463454
SP 3
  2.9412494   -0.09996723   0.15591627
  0.6834831    0.39951283   0.60768372
  0.2222899    0.70011547   0.39195739
end
)BAS";

/// Builtin basis by name ("6-31g(d)", "6-31g*", "sto-3g"), case-insensitive.
inline std::optional<BasisSpec> builtin_basis(std::string_view name) {
  std::string n;
  for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "6-31g(d)" || n == "6-31g*" || n == "6-31gd") return parse_basis(k631GdText, "6-31G(d)");
  if (n == "sto-3g" || n == "sto3g") return parse_basis(kSto3GText, "STO-3G");
  return std::nullopt;
}

} // namespace fockforge
