#pragma once

#include <ostream>

namespace sdgibm {

// Property battery over the structural identities of the scheme (mesh
// conformity, trace continuity, adjointness, skew symmetry, energy identity,
// divergence-free reconstruction, elastic-force telescoping). Prints one line
// per check; returns the number of failures.
int run_self_check(bool verbose, std::ostream& out);

}  // namespace sdgibm
