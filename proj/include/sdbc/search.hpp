#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sdbc/channel.hpp"
#include "sdbc/geometry.hpp"

namespace sdbc {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Calls must be
/// independent and write only to caller-owned slots indexed by i, so results
/// never depend on scheduling order.
void run_indexed(int count, int threads, const std::function<void(int)>& fn);

/// Numerically stable softmax; probs and logits have equal size.
void softmax(std::span<const double> logits, std::span<double> probs);

/// Greedy coordinate ascent with a shrinking step schedule and bounded
/// coordinates. Mutates theta toward a local maximum of `objective` and
/// returns the best value reached. Deterministic given the inputs.
double coordinate_ascent(std::vector<double>& theta,
                         const std::function<double(const std::vector<double>&)>& objective,
                         int passes, double tolerance);

/// Support value of the triple polytope { 0 <= ry <= a, 0 <= rz <= max(b,0),
/// ry + rz <= c } in the direction (wy, wz), wy, wz >= 0. Matches the support
/// of ConvexRegion2D::from_triple without building the polygon.
double triple_support(double a, double b, double c, double wy, double wz);

/// Softmax of theta, one row per state, reshaped into a policy p(x, u | s).
AuxPolicy policy_from_theta(int x_size, int s_size, int u_size,
                            const std::vector<double>& theta);

/// Weighted-sum sweep over softmax-parametrized policies p(x, u | s): for
/// each direction in the positive quadrant, coordinate ascent from a
/// canonical start plus seeded random restarts; the result is the convex
/// hull of the winners' triple polytopes. The achievable and converse-side
/// tracers both run exactly this schedule, so a common config makes them
/// explore the same policies and their regions coincide whenever their
/// triple functionals do.
///
/// `make_eval` is called once per worker task and returns the evaluation
/// used during ascent (policies laid out as pol[(s*X + x)*U + u]); `refine`
/// maps each direction's winning policy to the triple its polytope is built
/// from. Results are deterministic and independent of cfg.threads.
ConvexRegion2D sweep_policy_hull(
    int x_size, int s_size, int u_size, const SearchConfig& cfg,
    const std::function<std::function<BoundTriple(const double*)>()>& make_eval,
    const std::function<BoundTriple(const AuxPolicy&)>& refine);

}  // namespace sdbc
