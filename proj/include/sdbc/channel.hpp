#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdbc/prob.hpp"

namespace sdbc {

/// State-dependent channel whose first output is a deterministic function of
/// input and state: Y = f(X, S), with a stochastic second output Z ~ w(.|x,s)
/// and i.i.d. state S ~ p_s known to the encoder ahead of transmission.
struct SemiDetChannel {
  int x_size = 0;
  int y_size = 0;
  int z_size = 0;
  int s_size = 0;
  std::vector<int> f;  // f[x * s_size + s] in [0, y_size)
  CondKernel w;        // rows indexed by (x, s) row-major, cols by z
  ProbVec p_s;

  int f_at(int x, int s) const { return f[static_cast<size_t>(x) * s_size + s]; }
  double w_at(int x, int s, int z) const { return w.at(x * s_size + s, z); }
};

/// State-dependent broadcast channel with a joint stochastic law
/// w(y, z | x, s) and state S ~ p_s.
struct GeneralChannel {
  int x_size = 0;
  int y_size = 0;
  int z_size = 0;
  int s_size = 0;
  CondKernel w;  // rows indexed by (x, s) row-major, cols by (y, z) row-major
  ProbVec p_s;

  double w_at(int x, int s, int y, int z) const {
    return w.at(x * s_size + s, y * z_size + z);
  }
};

/// Embed a semideterministic channel as a general one:
/// w(y, z | x, s) = 1{y = f(x, s)} * w(z | x, s).
GeneralChannel embed(const SemiDetChannel& ch);

/// Conditional input/auxiliary policy P(x, u | s) that, together with the
/// channel law, fixes the joint distribution the rate bounds are evaluated on.
struct AuxPolicy {
  int u_size = 0;
  CondKernel p_xu_given_s;  // rows indexed by s, cols by (x, u) row-major

  double at(int s, int x, int u) const { return p_xu_given_s.at(s, x * u_size + u); }
  int x_size() const { return p_xu_given_s.cols() / u_size; }
};

/// Knobs of the randomized boundary search shared by the inner and outer
/// region tracers. Identical configs give byte-identical results regardless
/// of `threads`.
struct SearchConfig {
  int weight_sweep_count = 64;  // directions in the positive quadrant
  int random_restarts = 50;     // random starts per direction (plus canonical starts)
  int local_steps = 40;         // coordinate-ascent passes per start
  std::uint64_t seed = 1;
  double tolerance = 1e-9;      // stop threshold on objective improvement
  int threads = 1;              // worker cap; does not affect results
};

// --- file formats ------------------------------------------------------
//
// All files are plain text: `key` tokens followed by whitespace-separated
// values, `#` comments to end of line. Alphabet sizes must be declared
// before the tables that depend on them. Parse errors cite the field and
// the entry index.

/// Keys: x_size y_size z_size s_size, f (row-major over (x, s)),
/// w (rows (x, s) row-major, cols z), p_s.
SemiDetChannel parse_semidet_channel(std::istream& in);
SemiDetChannel load_semidet_channel(const std::string& path);

/// Keys: x_size y_size z_size s_size, w (rows (x, s) row-major, cols (y, z)
/// row-major), p_s.
GeneralChannel parse_general_channel(std::istream& in);
GeneralChannel load_general_channel(const std::string& path);

/// Keys: u_size, p_xu_given_s (one row per s, columns (x, u) row-major).
/// Requires the channel's x_size and s_size for shape checks.
AuxPolicy parse_aux_policy(std::istream& in, int x_size, int s_size);
AuxPolicy load_aux_policy(const std::string& path, int x_size, int s_size);

/// Serialization of a policy in the format parse_aux_policy reads.
std::string format_aux_policy(const AuxPolicy& pol, int x_size, int s_size);

}  // namespace sdbc
