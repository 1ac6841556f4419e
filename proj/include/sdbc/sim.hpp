#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sdbc/channel.hpp"
#include "sdbc/prob.hpp"

namespace sdbc {

/// Encoder-side description of the binned random-coding scheme: a joint law
/// for (Y, U) given the state, plus the selection table x = g(y, u, s) that
/// turns the chosen tuples and the state sequence into channel inputs.
struct SimPolicy {
  int y_size = 0;
  int u_size = 0;
  int s_size = 0;
  CondKernel p_yu_given_s;  // rows indexed by s, cols by (y, u) row-major
  std::vector<int> g;       // row-major over (y, u, s), values in [0, x_size)

  double p_at(int s, int y, int u) const {
    return p_yu_given_s.at(s, y * u_size + u);
  }
  int g_at(int y, int u, int s) const {
    return g[(static_cast<size_t>(y) * u_size + u) * s_size + s];
  }
};

/// Keys: u_size, p_yu_given_s (one row per s, columns (y, u) row-major),
/// g (row-major over (y, u, s)). Rejects tables where some (y, u) pair the
/// policy can emit under state s would not reproduce y, i.e. where
/// f(g(y,u,s), s) != y on the support of p_yu_given_s.
SimPolicy parse_sim_policy(std::istream& in, const SemiDetChannel& ch);
SimPolicy load_sim_policy(const std::string& path, const SemiDetChannel& ch);

struct SimConfig {
  int n = 16;                 // block length
  double rate_y = 0.0;        // message rate to the deterministic receiver
  double rate_z = 0.0;        // message rate to the stochastic receiver
  double cover_rate_y = 0.0;  // within-bin rate of y-tuples
  double cover_rate_z = 0.0;  // within-bin rate of u-tuples
  double epsilon = 0.25;      // typicality slack
  int trials = 1000;
  std::uint64_t seed = 1;
  int threads = 1;  // worker cap; does not affect results
};

/// floor(2^(n * rate)), nudged upward by a hair so products whose exponent
/// is mathematically an integer do not lose a whole factor of two to
/// floating-point representation (10 * 0.3 lands just below 3).
std::int64_t bin_count(int n, double rate);

/// Binned IID codebooks. Tuple id t of the y-codebook lives in bin
/// t / y_per_bin; same layout on the u side.
struct Codebook {
  int n = 0;
  int y_bins = 0;
  int y_per_bin = 0;
  int u_bins = 0;
  int u_per_bin = 0;
  std::vector<std::uint8_t> y_symbols;  // tuple id * n + position
  std::vector<std::uint8_t> u_symbols;
  std::vector<int> y_order;  // y tuple ids sorted by contents, for decoding

  std::span<const std::uint8_t> y_tuple(int id) const {
    return {y_symbols.data() + static_cast<size_t>(id) * n, static_cast<size_t>(n)};
  }
  std::span<const std::uint8_t> u_tuple(int id) const {
    return {u_symbols.data() + static_cast<size_t>(id) * n, static_cast<size_t>(n)};
  }

  /// Recomputes y_order from y_symbols; needed after filling the tuple
  /// arrays by hand.
  void rebuild_y_index();
};

/// Draws bin_count(n, rate_y) * bin_count(n, cover_rate_y) y-tuples IID from
/// p_y and likewise u-tuples from p_u, all from streams derived from
/// cfg.seed. Each codebook is capped at 2^22 tuples.
Codebook generate_codebook(const ProbVec& p_y, const ProbVec& p_u, const SimConfig& cfg);

/// Empirical-frequency typicality: for every cell of the joint,
/// |freq - P| <= eps * P, and cells with P = 0 must never occur. The order
/// of `seqs` matches joint.axes().
bool strongly_typical(const std::vector<std::span<const std::uint8_t>>& seqs,
                      const JointDist& joint, double eps);

enum class DecodeStatus { ok, not_found, collision };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::not_found;
  int bin = -1;  // valid only when status == ok
};

struct EncodeResult {
  std::vector<std::uint8_t> x_seq;
  int l_y = -1;  // chosen within-bin indices, -1 on covering failure
  int l_z = -1;
  bool encoder_ok = false;
};

/// Joint law of (Y, U, S) induced by the policy and the state distribution.
JointDist joint_yus(const SemiDetChannel& ch, const SimPolicy& pol);

/// Joint law of (U, Z) once x = g(y, u, s) passes through the channel.
JointDist joint_uz(const SemiDetChannel& ch, const SimPolicy& pol);

/// Scans bin (m_y, m_z) in lexicographic (l_y, l_z) order for the first
/// tuple pair jointly typical with s_seq under joint_yus, then applies g
/// componentwise. On covering failure sends the all-zero codeword.
EncodeResult encode(const Codebook& cb, const SemiDetChannel& ch, const SimPolicy& pol,
                    int m_y, int m_z, std::span<const std::uint8_t> s_seq, double eps);

/// Finds the unique y-bin containing the received sequence exactly.
DecodeResult decode_det(const Codebook& cb, std::span<const std::uint8_t> y_seq);

/// Finds the unique u-bin holding a tuple jointly typical with z_seq under
/// p_uz at slack 2 * eps.
DecodeResult decode_nondet(const Codebook& cb, std::span<const std::uint8_t> z_seq,
                           const JointDist& p_uz, double eps);

struct TrialOutcome {
  bool encoder_ok = false;
  bool det_ok = false;     // deterministic receiver recovered m_y
  bool nondet_ok = false;  // stochastic receiver recovered m_z
};

struct SimReport {
  int n = 0;
  int trials = 0;
  double encoder_fail_rate = 0.0;
  double det_err_rate = 0.0;
  double nondet_err_rate = 0.0;
  double overall_err_rate = 0.0;  // either receiver wrong
  std::uint64_t seed = 0;

  std::string to_text() const;
};

/// Full Monte Carlo run: one codebook per call, then per-trial state/message
/// draws, encoding, channel noise and both decoders. Deterministic in cfg;
/// trials run on up to cfg.threads workers without affecting the result.
SimReport run_trials(const SemiDetChannel& ch, const SimPolicy& pol, const SimConfig& cfg);

}  // namespace sdbc
