#pragma once

#include <vector>

#include "bdspectral/chain.hpp"

// Shared parameter sets covering every atom configuration:
//   A: p0 = p, single atom beyond the right cut edge
//   B: two atoms, one on each side of the cut
//   C: reflecting boundary at p = 1/2, pure arcsine density, no atoms
//   D: p > 1/2, one pole carries mass and the other is removable
//   E: positive recurrent, atom exactly at 1
namespace fixtures {

inline bdspectral::ChainParams fix_a() { return bdspectral::new_chain(0.2, 0.2, 0.5); }
inline bdspectral::ChainParams fix_b() { return bdspectral::new_chain(0.2, 0.6, 0.1); }
inline bdspectral::ChainParams fix_c() { return bdspectral::new_chain(0.5, 1.0, 0.0); }
inline bdspectral::ChainParams fix_d() { return bdspectral::new_chain(0.85, 0.3, 0.6); }
inline bdspectral::ChainParams fix_e() { return bdspectral::new_chain(0.3, 0.6, 0.4); }

inline std::vector<bdspectral::ChainParams> all() {
    return {fix_a(), fix_b(), fix_c(), fix_d(), fix_e()};
}

}  // namespace fixtures
