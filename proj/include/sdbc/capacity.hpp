#pragma once

#include <functional>

#include "sdbc/channel.hpp"
#include "sdbc/geometry.hpp"
#include "sdbc/prob.hpp"

namespace sdbc {

/// Auxiliary alphabet size that suffices for the achievable region:
/// |X| * |S| + 1.
int aux_bound(int x_size, int s_size);

/// Joint distribution p(x, y, z, s, u) = p_s(s) * pol(x, u | s)
/// * 1{y = f(x, s)} * w(z | x, s), with axes ordered (X, Y, Z, S, U).
JointDist joint_from_policy(const SemiDetChannel& ch, const AuxPolicy& pol);

/// Rate bounds of a fixed policy:
///   a = H(Y|S),
///   b = I(U;Z) - I(U;S),
///   c = H(Y|S) + I(U;Z) - I(U;S,Y).
BoundTriple bound_triple(const SemiDetChannel& ch, const AuxPolicy& pol);

/// Fast bound_triple over raw policy matrices pol[(s*X + x)*U + u]; the hot
/// path of the region search. The returned closure owns its scratch space
/// (take one per worker) and keeps a pointer into ch, which must outlive it.
std::function<BoundTriple(const double*)> make_triple_eval(const SemiDetChannel& ch,
                                                           int u_size);

/// Achievable-region search: the convex hull of the triple polytopes over
/// optimized policies, traced with a weighted-sum sweep over rate
/// directions and randomized coordinate-ascent restarts. Deterministic for
/// a fixed config; cfg.threads only changes the wall clock.
///
/// With det_selection set, the search is restricted to policies in which
/// the input is a deterministic function of (y, u, s) consistent with
/// y = f(x, s); this mirrors the coding scheme's selection map.
ConvexRegion2D inner_region(const SemiDetChannel& ch, const SearchConfig& cfg,
                            bool det_selection = false);

/// Reduces the auxiliary alphabet of a joint in the factored form above to
/// at most aux_bound(|X|, |S|) atoms while preserving the three bound
/// functionals and the (X, S) marginal to ~1e-9. Input must carry axes
/// (X, Y, Z, S, U); throws std::invalid_argument if the joint is not of the
/// factored form (y not a function of (x, s), or Z dependent on U given
/// (X, S)).
JointDist reduce_support(const JointDist& joint);

/// Extracts the policy p(x, u | s) from a joint with axes (X, Y, Z, S, U).
/// Rows with zero state mass fall back to uniform.
AuxPolicy policy_from_joint(const JointDist& joint);

/// The three bound functionals evaluated directly on a factored joint.
BoundTriple triple_from_joint(const JointDist& joint);

}  // namespace sdbc
