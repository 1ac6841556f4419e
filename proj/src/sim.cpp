#include "sdbc/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "sdbc/errors.hpp"
#include "sdbc/rng.hpp"
#include "sdbc/search.hpp"
#include "textform.hpp"

namespace sdbc {

namespace {

constexpr std::int64_t kMaxTuples = std::int64_t{1} << 22;
constexpr int kMaxSimAlphabet = 256;  // tuples are stored as bytes

int cmp_tuples(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  return std::memcmp(a.data(), b.data(), a.size());
}

// Core of strongly_typical without the per-call argument checks, for the
// hot encoder/decoder loops. `counts` must hold joint.mass().size() zeros
// and is left dirty.
bool typical_core(const std::vector<std::span<const std::uint8_t>>& seqs,
                  const JointDist& joint, double eps, int* counts) {
  size_t n = seqs[0].size();
  int rank = joint.rank();
  for (size_t i = 0; i < n; ++i) {
    size_t idx = 0;
    for (int k = 0; k < rank; ++k) idx += joint.stride(k) * seqs[k][i];
    counts[idx]++;
  }
  const auto& mass = joint.mass();
  double scale = 1.0 / static_cast<double>(n);
  for (size_t c = 0; c < mass.size(); ++c) {
    double p = mass[c];
    if (p == 0.0) {
      if (counts[c] != 0) return false;
    } else if (std::abs(counts[c] * scale - p) > eps * p) {
      return false;
    }
  }
  return true;
}

// Scratch-buffer wrapper: zeroes a small local array per call.
class TypicalityCheck {
 public:
  explicit TypicalityCheck(const JointDist& joint, double eps)
      : joint_(joint), eps_(eps), counts_(joint.mass().size()) {}

  bool operator()(const std::vector<std::span<const std::uint8_t>>& seqs) {
    std::fill(counts_.begin(), counts_.end(), 0);
    return typical_core(seqs, joint_, eps_, counts_.data());
  }

 private:
  const JointDist& joint_;
  double eps_;
  std::vector<int> counts_;
};

void check_symbol_range(const char* what, int size) {
  if (size > kMaxSimAlphabet) {
    throw GuardError(std::string(what) + " alphabet exceeds the simulator limit of " +
                     std::to_string(kMaxSimAlphabet) + " symbols");
  }
}

EncodeResult encode_given(const Codebook& cb, const SimPolicy& pol, const JointDist& yus,
                          int m_y, int m_z, std::span<const std::uint8_t> s_seq,
                          double eps) {
  if (m_y < 0 || m_y >= cb.y_bins) throw std::invalid_argument("m_y outside bin range");
  if (m_z < 0 || m_z >= cb.u_bins) throw std::invalid_argument("m_z outside bin range");
  if (static_cast<int>(s_seq.size()) != cb.n) {
    throw std::invalid_argument("state sequence length does not match the codebook");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");

  TypicalityCheck typical(yus, eps);
  std::vector<std::span<const std::uint8_t>> seqs(3);
  seqs[2] = s_seq;
  EncodeResult res;
  for (int l_y = 0; l_y < cb.y_per_bin && !res.encoder_ok; ++l_y) {
    seqs[0] = cb.y_tuple(m_y * cb.y_per_bin + l_y);
    for (int l_z = 0; l_z < cb.u_per_bin; ++l_z) {
      seqs[1] = cb.u_tuple(m_z * cb.u_per_bin + l_z);
      if (typical(seqs)) {
        res.l_y = l_y;
        res.l_z = l_z;
        res.encoder_ok = true;
        break;
      }
    }
  }
  res.x_seq.assign(s_seq.size(), 0);
  if (res.encoder_ok) {
    auto yt = cb.y_tuple(m_y * cb.y_per_bin + res.l_y);
    auto ut = cb.u_tuple(m_z * cb.u_per_bin + res.l_z);
    for (size_t i = 0; i < s_seq.size(); ++i) {
      res.x_seq[i] = static_cast<std::uint8_t>(pol.g_at(yt[i], ut[i], s_seq[i]));
    }
  }
  return res;
}

}  // namespace

SimPolicy parse_sim_policy(std::istream& in, const SemiDetChannel& ch) {
  using namespace textform;
  TokenFile tf = tokenize(in);
  SimPolicy pol;
  pol.y_size = ch.y_size;
  pol.s_size = ch.s_size;
  pol.u_size = parse_size(tf, "u_size");
  size_t cols = static_cast<size_t>(pol.y_size) * pol.u_size;
  std::vector<double> p = parse_numbers(tf, "p_yu_given_s", cols * pol.s_size);
  check_rows("p_yu_given_s", p, pol.s_size, static_cast<int>(cols));
  pol.p_yu_given_s = CondKernel(pol.s_size, static_cast<int>(cols), std::move(p));
  pol.g = parse_ints(tf, "g", cols * pol.s_size, 0, ch.x_size);
  for (int y = 0; y < pol.y_size; ++y) {
    for (int u = 0; u < pol.u_size; ++u) {
      for (int s = 0; s < pol.s_size; ++s) {
        if (pol.p_at(s, y, u) > 0.0 && ch.f_at(pol.g_at(y, u, s), s) != y) {
          throw ParseError("field 'g', entry " +
                           std::to_string((y * pol.u_size + u) * pol.s_size + s) +
                           ": x = g(y,u,s) has f(x,s) != y at (y,u,s) = (" +
                           std::to_string(y) + "," + std::to_string(u) + "," +
                           std::to_string(s) + ")");
        }
      }
    }
  }
  return pol;
}

SimPolicy load_sim_policy(const std::string& path, const SemiDetChannel& ch) {
  auto in = textform::open_or_throw(path);
  return parse_sim_policy(in, ch);
}

std::int64_t bin_count(int n, double rate) {
  double k = std::exp2(static_cast<double>(n) * rate);
  double nudged = k * (1.0 + 1e-12) + 1e-9;
  if (!(nudged < 9.0e18)) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(std::floor(nudged));
}

Codebook generate_codebook(const ProbVec& p_y, const ProbVec& p_u, const SimConfig& cfg) {
  if (cfg.n < 1) throw GuardError("block length must be at least 1");
  if (cfg.rate_y < 0 || cfg.rate_z < 0 || cfg.cover_rate_y < 0 || cfg.cover_rate_z < 0) {
    throw GuardError("rates must be nonnegative");
  }
  check_symbol_range("y", p_y.size());
  check_symbol_range("u", p_u.size());

  std::int64_t y_bins = bin_count(cfg.n, cfg.rate_y);
  std::int64_t y_per = bin_count(cfg.n, cfg.cover_rate_y);
  std::int64_t u_bins = bin_count(cfg.n, cfg.rate_z);
  std::int64_t u_per = bin_count(cfg.n, cfg.cover_rate_z);
  double y_total = static_cast<double>(y_bins) * static_cast<double>(y_per);
  double u_total = static_cast<double>(u_bins) * static_cast<double>(u_per);
  if (y_total > static_cast<double>(kMaxTuples)) {
    throw GuardError("y codebook would need " + std::to_string(y_total) +
                     " tuples; the limit is 4194304 (2^22)");
  }
  if (u_total > static_cast<double>(kMaxTuples)) {
    throw GuardError("u codebook would need " + std::to_string(u_total) +
                     " tuples; the limit is 4194304 (2^22)");
  }

  Codebook cb;
  cb.n = cfg.n;
  cb.y_bins = static_cast<int>(y_bins);
  cb.y_per_bin = static_cast<int>(y_per);
  cb.u_bins = static_cast<int>(u_bins);
  cb.u_per_bin = static_cast<int>(u_per);

  auto fill = [n = cfg.n](std::vector<std::uint8_t>& out, std::int64_t tuples,
                          const ProbVec& p, Rng rng) {
    out.resize(static_cast<size_t>(tuples) * n);
    std::span<const double> w(p.values());
    for (auto& sym : out) sym = static_cast<std::uint8_t>(rng.discrete(w));
  };
  fill(cb.y_symbols, y_bins * y_per, p_y, Rng::derive(cfg.seed, 0, 0));
  fill(cb.u_symbols, u_bins * u_per, p_u, Rng::derive(cfg.seed, 0, 1));
  cb.rebuild_y_index();
  return cb;
}

void Codebook::rebuild_y_index() {
  y_order.resize(y_symbols.size() / static_cast<size_t>(n));
  for (size_t i = 0; i < y_order.size(); ++i) y_order[i] = static_cast<int>(i);
  std::sort(y_order.begin(), y_order.end(), [this](int a, int b) {
    int c = cmp_tuples(y_tuple(a), y_tuple(b));
    return c != 0 ? c < 0 : a < b;
  });
}

bool strongly_typical(const std::vector<std::span<const std::uint8_t>>& seqs,
                      const JointDist& joint, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (static_cast<int>(seqs.size()) != joint.rank()) {
    throw std::invalid_argument("sequence count does not match the joint's rank");
  }
  size_t n = seqs[0].size();
  if (n == 0) throw std::invalid_argument("sequences must be nonempty");
  for (size_t k = 0; k < seqs.size(); ++k) {
    if (seqs[k].size() != n) throw std::invalid_argument("sequence length mismatch");
    int size = joint.axes()[k].size;
    for (std::uint8_t v : seqs[k]) {
      if (v >= size) throw std::invalid_argument("symbol outside the axis alphabet");
    }
  }
  std::vector<int> counts(joint.mass().size(), 0);
  return typical_core(seqs, joint, eps, counts.data());
}

JointDist joint_yus(const SemiDetChannel& ch, const SimPolicy& pol) {
  std::vector<double> mass(static_cast<size_t>(pol.y_size) * pol.u_size * pol.s_size);
  size_t i = 0;
  for (int y = 0; y < pol.y_size; ++y) {
    for (int u = 0; u < pol.u_size; ++u) {
      for (int s = 0; s < pol.s_size; ++s) {
        mass[i++] = ch.p_s[s] * pol.p_at(s, y, u);
      }
    }
  }
  return JointDist({{AxisName::Y, pol.y_size},
                    {AxisName::U, pol.u_size},
                    {AxisName::S, pol.s_size}},
                   std::move(mass));
}

JointDist joint_uz(const SemiDetChannel& ch, const SimPolicy& pol) {
  std::vector<double> mass(static_cast<size_t>(pol.u_size) * ch.z_size, 0.0);
  for (int y = 0; y < pol.y_size; ++y) {
    for (int u = 0; u < pol.u_size; ++u) {
      for (int s = 0; s < pol.s_size; ++s) {
        double w = ch.p_s[s] * pol.p_at(s, y, u);
        if (w == 0.0) continue;
        int x = pol.g_at(y, u, s);
        for (int z = 0; z < ch.z_size; ++z) {
          mass[static_cast<size_t>(u) * ch.z_size + z] += w * ch.w_at(x, s, z);
        }
      }
    }
  }
  return JointDist({{AxisName::U, pol.u_size}, {AxisName::Z, ch.z_size}}, std::move(mass));
}

EncodeResult encode(const Codebook& cb, const SemiDetChannel& ch, const SimPolicy& pol,
                    int m_y, int m_z, std::span<const std::uint8_t> s_seq, double eps) {
  return encode_given(cb, pol, joint_yus(ch, pol), m_y, m_z, s_seq, eps);
}

DecodeResult decode_det(const Codebook& cb, std::span<const std::uint8_t> y_seq) {
  if (static_cast<int>(y_seq.size()) != cb.n) {
    throw std::invalid_argument("received length does not match the codebook");
  }
  auto it = std::lower_bound(cb.y_order.begin(), cb.y_order.end(), y_seq,
                             [&cb](int id, std::span<const std::uint8_t> t) {
                               return cmp_tuples(cb.y_tuple(id), t) < 0;
                             });
  int bin = -1;
  for (; it != cb.y_order.end() && cmp_tuples(cb.y_tuple(*it), y_seq) == 0; ++it) {
    int b = *it / cb.y_per_bin;
    if (bin == -1) {
      bin = b;
    } else if (b != bin) {
      return {DecodeStatus::collision, -1};
    }
  }
  if (bin == -1) return {DecodeStatus::not_found, -1};
  return {DecodeStatus::ok, bin};
}

DecodeResult decode_nondet(const Codebook& cb, std::span<const std::uint8_t> z_seq,
                           const JointDist& p_uz, double eps) {
  if (static_cast<int>(z_seq.size()) != cb.n) {
    throw std::invalid_argument("received length does not match the codebook");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  TypicalityCheck typical(p_uz, 2.0 * eps);
  std::vector<std::span<const std::uint8_t>> seqs(2);
  seqs[1] = z_seq;
  int bin = -1;
  int total = cb.u_bins * cb.u_per_bin;
  for (int id = 0; id < total; ++id) {
    seqs[0] = cb.u_tuple(id);
    if (!typical(seqs)) continue;
    int b = id / cb.u_per_bin;
    if (bin == -1) {
      bin = b;
    } else if (b != bin) {
      return {DecodeStatus::collision, -1};
    }
  }
  if (bin == -1) return {DecodeStatus::not_found, -1};
  return {DecodeStatus::ok, bin};
}

std::string SimReport::to_text() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "n %d\ntrials %d\nencoder_fail_rate %.6f\ndet_err_rate %.6f\n"
                "nondet_err_rate %.6f\noverall_err_rate %.6f\nseed %llu\n",
                n, trials, encoder_fail_rate, det_err_rate, nondet_err_rate,
                overall_err_rate, static_cast<unsigned long long>(seed));
  return buf;
}

SimReport run_trials(const SemiDetChannel& ch, const SimPolicy& pol, const SimConfig& cfg) {
  if (cfg.trials < 0) throw GuardError("trials must be nonnegative");
  if (!(cfg.epsilon > 0.0)) throw GuardError("epsilon must be positive");
  check_symbol_range("x", ch.x_size);
  check_symbol_range("z", ch.z_size);
  check_symbol_range("s", ch.s_size);

  JointDist yus = joint_yus(ch, pol);
  JointDist uz = joint_uz(ch, pol);
  Codebook cb = generate_codebook(yus.marginal_vec(AxisName::Y),
                                  yus.marginal_vec(AxisName::U), cfg);

  std::vector<TrialOutcome> outcomes(cfg.trials);
  run_indexed(cfg.trials, cfg.threads, [&](int t) {
    Rng rng = Rng::derive(cfg.seed, 1, static_cast<std::uint64_t>(t));
    int n = cfg.n;
    std::vector<std::uint8_t> s_seq(n), y_seq(n), z_seq(n);
    std::span<const double> ps(ch.p_s.values());
    for (int i = 0; i < n; ++i) s_seq[i] = static_cast<std::uint8_t>(rng.discrete(ps));
    int m_y = rng.uniform_int(cb.y_bins);
    int m_z = rng.uniform_int(cb.u_bins);

    EncodeResult enc = encode_given(cb, pol, yus, m_y, m_z, s_seq, cfg.epsilon);
    for (int i = 0; i < n; ++i) {
      int x = enc.x_seq[i];
      int s = s_seq[i];
      y_seq[i] = static_cast<std::uint8_t>(ch.f_at(x, s));
      z_seq[i] = static_cast<std::uint8_t>(rng.discrete(ch.w.row(x * ch.s_size + s)));
    }

    DecodeResult det = decode_det(cb, y_seq);
    DecodeResult nondet = decode_nondet(cb, z_seq, uz, cfg.epsilon);
    outcomes[t].encoder_ok = enc.encoder_ok;
    outcomes[t].det_ok = det.status == DecodeStatus::ok && det.bin == m_y;
    outcomes[t].nondet_ok = nondet.status == DecodeStatus::ok && nondet.bin == m_z;
  });

  SimReport rep;
  rep.n = cfg.n;
  rep.trials = cfg.trials;
  rep.seed = cfg.seed;
  if (cfg.trials > 0) {
    int enc_fail = 0, det_err = 0, nondet_err = 0, overall = 0;
    for (const TrialOutcome& o : outcomes) {
      enc_fail += !o.encoder_ok;
      det_err += !o.det_ok;
      nondet_err += !o.nondet_ok;
      overall += !o.det_ok || !o.nondet_ok;
    }
    double inv = 1.0 / cfg.trials;
    rep.encoder_fail_rate = enc_fail * inv;
    rep.det_err_rate = det_err * inv;
    rep.nondet_err_rate = nondet_err * inv;
    rep.overall_err_rate = overall * inv;
  }
  return rep;
}

}  // namespace sdbc
