#pragma once

#include <string>
#include <vector>

#include "sdbc/channel.hpp"
#include "sdbc/geometry.hpp"
#include "sdbc/prob.hpp"

namespace sdbc {

/// Joint p(x, y, z, s, u) = p_s(s) * pol(x, u | s) * w(y, z | x, s) with
/// axes ordered (X, Y, Z, S, U).
JointDist outer_joint_from_policy(const GeneralChannel& ch, const AuxPolicy& pol);

/// Converse-side rate bounds of a fixed policy on a general channel:
///   a = I(X;Y|S),
///   b = I(U;Z) - I(U;S),
///   c = I(X;Y|S) + I(U;Z) - I(U;S,Y).
/// On an embedded semideterministic channel these coincide with the
/// achievability-side bounds.
BoundTriple outer_triple(const GeneralChannel& ch, const AuxPolicy& pol);

/// Region search result whose value is only a finite-policy approximation.
struct RegionEstimate {
  ConvexRegion2D region;
  std::string note;
};

/// Traces the converse bound by the same weighted-sum policy search used on
/// the achievability side. The hull is taken over finitely many policies,
/// so it can only under-cover the true outer bound; the note records that.
RegionEstimate outer_region_estimate(const GeneralChannel& ch, const SearchConfig& cfg);

/// Input strategy: a map from states to inputs, used as the auxiliary
/// letter for causal state-information. Strategies are enumerated in
/// mixed-radix order with the s = 0 digit least significant:
/// table[s] = (index / x_size^s) % x_size.
struct StrategyLetter {
  int index = 0;
  std::vector<int> table;
};

/// All x_size^s_size strategies; throws GuardError beyond 256 of them.
std::vector<StrategyLetter> enumerate_strategies(int x_size, int s_size);

/// Outer bound under causal state-information: the convex closure of
/// rectangles { r_y <= I(T;Y), r_z <= I(T;Z) } over distributions on the
/// strategy alphabet. Both mutual informations are concave in the strategy
/// distribution, so a sweep of weighted-sum maximizations plus structured
/// seeds (pairwise-uniform and uniform mixtures) traces the hull.
ConvexRegion2D causal_outer_region(const GeneralChannel& ch, const SearchConfig& cfg);

}  // namespace sdbc
