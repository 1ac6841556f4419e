#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "sdbc/binary_example.hpp"
#include "sdbc/errors.hpp"
#include "sdbc/prob.hpp"
#include "sdbc/sim.hpp"

using namespace sdbc;

namespace {

using Seq = std::vector<std::uint8_t>;
using Spans = std::vector<std::span<const std::uint8_t>>;

// P(y,u|s) = 0.5 * P(V = y xor s xor u) with V ~ Ber(alpha); the selection
// x = y xor s makes the deterministic output reproduce y.
SimPolicy alpha_sim_policy(double alpha) {
  SimPolicy pol;
  pol.y_size = pol.u_size = pol.s_size = 2;
  std::vector<double> p;
  for (int s = 0; s < 2; ++s) {
    for (int y = 0; y < 2; ++y) {
      for (int u = 0; u < 2; ++u) {
        p.push_back(0.5 * (((y ^ s) != u) ? alpha : 1.0 - alpha));
      }
    }
  }
  pol.p_yu_given_s = CondKernel(2, 4, p);
  for (int y = 0; y < 2; ++y) {
    for (int u = 0; u < 2; ++u) {
      for (int s = 0; s < 2; ++s) {
        (void)u;
        pol.g.push_back(y ^ s);
      }
    }
  }
  return pol;
}

SimPolicy uniform_sim_policy() {
  SimPolicy pol = alpha_sim_policy(0.5);  // all cells 0.25
  return pol;
}

JointDist binary_marginal(double q) {
  return JointDist({{AxisName::Y, 2}}, {1.0 - q, q});
}

}  // namespace

TEST_CASE("bin counts floor the exact exponential") {
  CHECK(bin_count(10, 0.3) == 8);   // 10 * 0.3 is not exactly 3 in binary
  CHECK(bin_count(10, 0.2) == 4);
  CHECK(bin_count(10, 0.0) == 1);
  CHECK(bin_count(10, 0.25) == 5);  // floor(2^2.5)
  CHECK(bin_count(16, 1.2) == 602248);
  CHECK(bin_count(1, 0.9) == 1);
}

TEST_CASE("strong typicality counts relative deviations and support") {
  JointDist uni = binary_marginal(0.5);
  Seq five{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  Seq seven{1, 1, 1, 0, 1, 1, 0, 1, 1, 0};
  CHECK(strongly_typical(Spans{five}, uni, 0.1));
  CHECK(!strongly_typical(Spans{seven}, uni, 0.1));
  CHECK(strongly_typical(Spans{seven}, uni, 0.5));  // |0.7-0.5| <= 0.25

  JointDist point = binary_marginal(0.0);
  Seq zeros(10, 0);
  Seq with_one{0, 0, 0, 1, 0, 0, 0, 0, 0, 0};
  CHECK(strongly_typical(Spans{zeros}, point, 0.1));
  CHECK(!strongly_typical(Spans{with_one}, point, 100.0));  // support violation

  // pair typicality against a uniform product law
  JointDist pair({{AxisName::U, 2}, {AxisName::Z, 2}}, {0.25, 0.25, 0.25, 0.25});
  Seq u{0, 0, 1, 1, 0, 0, 1, 1};
  Seq z{0, 1, 0, 1, 0, 1, 0, 1};
  CHECK(strongly_typical(Spans{u, z}, pair, 0.01));
  CHECK(!strongly_typical(Spans{u, u}, pair, 0.5));  // only the diagonal cells occur

  Seq short_seq{0, 1};
  CHECK_THROWS_AS(strongly_typical(Spans{five, short_seq}, pair, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(strongly_typical(Spans{five}, pair, 0.1), std::invalid_argument);
  Seq bad_symbol{0, 2, 0, 1, 0, 1, 0, 1, 0, 1};
  CHECK_THROWS_AS(strongly_typical(Spans{bad_symbol}, uni, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(strongly_typical(Spans{five}, uni, 0.0), std::invalid_argument);
}

TEST_CASE("codebook generation: counts, determinism, sortedness, guard") {
  ProbVec py({0.5, 0.5});
  ProbVec pu({0.9, 0.1});
  SimConfig cfg;
  cfg.n = 10;
  cfg.rate_y = 0.3;
  cfg.cover_rate_y = 0.2;
  cfg.rate_z = 0.0;
  cfg.cover_rate_z = 0.0;
  cfg.seed = 11;

  Codebook cb = generate_codebook(py, pu, cfg);
  CHECK(cb.y_bins == 8);
  CHECK(cb.y_per_bin == 4);
  CHECK(cb.u_bins == 1);
  CHECK(cb.u_per_bin == 1);
  CHECK(cb.y_symbols.size() == 320);
  CHECK(cb.u_symbols.size() == 10);

  Codebook again = generate_codebook(py, pu, cfg);
  CHECK(cb.y_symbols == again.y_symbols);
  CHECK(cb.u_symbols == again.u_symbols);
  CHECK(cb.y_order == again.y_order);

  for (size_t i = 1; i < cb.y_order.size(); ++i) {
    auto a = cb.y_tuple(cb.y_order[i - 1]);
    auto b = cb.y_tuple(cb.y_order[i]);
    CHECK(std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                       std::less_equal<std::uint8_t>()));
  }

  // the skewed u marginal shows up in the drawn symbols
  SimConfig wide = cfg;
  wide.cover_rate_z = 1.0;  // 1024 u-tuples
  Codebook cw = generate_codebook(py, pu, wide);
  double ones = 0;
  for (auto v : cw.u_symbols) ones += v;
  CHECK(ones / static_cast<double>(cw.u_symbols.size()) == doctest::Approx(0.1).epsilon(0.25));

  SimConfig big = cfg;
  big.n = 30;
  big.rate_y = 1.0;
  CHECK_THROWS_WITH_AS(generate_codebook(py, pu, big),
                       doctest::Contains("4194304"), GuardError);
}

TEST_CASE("policy joints match the closed forms of the worked example") {
  SemiDetChannel ch = build_channel({0.5, 0.2});
  SimPolicy pol = alpha_sim_policy(0.25);

  JointDist yus = joint_yus(ch, pol);
  double total = 0.0;
  for (double m : yus.mass()) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  // P(y,u,s) = 0.25 * (0.75 if u == y xor s else 0.25)
  CHECK(yus.at(std::vector<int>{0, 0, 0}) == doctest::Approx(0.1875).epsilon(1e-14));
  CHECK(yus.at(std::vector<int>{0, 1, 0}) == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(mutual_info(yus, {AxisName::Y}, {AxisName::S}) < 1e-12);
  CHECK(mutual_info(yus, {AxisName::U}, {AxisName::S}) < 1e-12);

  JointDist uz = joint_uz(ch, pol);
  // U -> Z is a BSC with crossover beta(0.25, 0.2) = 0.35 and uniform input
  CHECK(uz.at(std::vector<int>{0, 0}) == doctest::Approx(0.325).epsilon(1e-14));
  CHECK(uz.at(std::vector<int>{0, 1}) == doctest::Approx(0.175).epsilon(1e-14));
  CHECK(mutual_info(uz, {AxisName::U}, {AxisName::Z}) ==
        doctest::Approx(1.0 - binary_entropy(0.35)).epsilon(1e-12));
}

TEST_CASE("encoder picks the first typical pair and reproduces y at receiver one") {
  SemiDetChannel ch = build_channel({0.5, 0.2});
  SimPolicy pol = uniform_sim_policy();

  Codebook cb;
  cb.n = 8;
  cb.y_bins = 2;
  cb.y_per_bin = 2;
  cb.u_bins = 1;
  cb.u_per_bin = 1;
  // bin 0: first tuple constant (atypical), second hits every (y,u,s) cell
  // once against the planted u-tuple and state below
  cb.y_symbols = {0, 0, 0, 0, 0, 0, 0, 0,   //
                  0, 0, 0, 0, 1, 1, 1, 1,   //
                  1, 1, 1, 1, 1, 1, 1, 1,   //
                  0, 1, 0, 1, 0, 1, 0, 1};  //
  cb.u_symbols = {0, 0, 1, 1, 0, 0, 1, 1};
  cb.rebuild_y_index();

  Seq s_seq{0, 1, 0, 1, 0, 1, 0, 1};
  EncodeResult enc = encode(cb, ch, pol, 0, 0, s_seq, 0.1);
  CHECK(enc.encoder_ok);
  CHECK(enc.l_y == 1);
  CHECK(enc.l_z == 0);
  REQUIRE(enc.x_seq.size() == 8);
  for (size_t i = 0; i < 8; ++i) {
    // x = g(y,u,s) = y xor s, and feeding it back gives f(x,s) = y
    int y = cb.y_tuple(1)[i];
    CHECK(enc.x_seq[i] == (y ^ s_seq[i]));
    CHECK(ch.f_at(enc.x_seq[i], s_seq[i]) == y);
  }

  // same bin against an all-zero state: no candidate passes, all-zero x out
  Seq s_bad(8, 0);
  EncodeResult fail = encode(cb, ch, pol, 0, 0, s_bad, 0.1);
  CHECK(!fail.encoder_ok);
  CHECK(fail.l_y == -1);
  CHECK(fail.x_seq == Seq(8, 0));

  CHECK_THROWS_AS(encode(cb, ch, pol, 5, 0, s_seq, 0.1), std::invalid_argument);
}

TEST_CASE("deterministic decoder needs a unique owning bin") {
  Codebook cb;
  cb.n = 4;
  cb.y_bins = 3;
  cb.y_per_bin = 2;
  cb.y_symbols = {0, 0, 0, 0,   //
                  0, 0, 0, 1,   // bin 0
                  0, 0, 1, 0,   //
                  0, 0, 1, 0,   // bin 1 (holds the same tuple twice)
                  1, 1, 1, 1,   //
                  0, 0, 0, 0};  // bin 2 (duplicates one of bin 0's tuples)
  cb.rebuild_y_index();

  CHECK(decode_det(cb, Seq{0, 0, 0, 1}).status == DecodeStatus::ok);
  CHECK(decode_det(cb, Seq{0, 0, 0, 1}).bin == 0);
  DecodeResult twice = decode_det(cb, Seq{0, 0, 1, 0});
  CHECK(twice.status == DecodeStatus::ok);  // both copies in the same bin
  CHECK(twice.bin == 1);
  CHECK(decode_det(cb, Seq{0, 0, 0, 0}).status == DecodeStatus::collision);
  CHECK(decode_det(cb, Seq{1, 0, 0, 1}).status == DecodeStatus::not_found);
  CHECK_THROWS_AS(decode_det(cb, Seq{0, 0}), std::invalid_argument);
}

TEST_CASE("nondeterministic decoder scans bins for typical tuples") {
  JointDist puz({{AxisName::U, 2}, {AxisName::Z, 2}}, {0.25, 0.25, 0.25, 0.25});
  Codebook cb;
  cb.n = 8;
  cb.u_bins = 2;
  cb.u_per_bin = 1;
  cb.u_symbols = {0, 0, 1, 1, 0, 0, 1, 1,   // balanced against z below
                  0, 0, 0, 0, 0, 0, 0, 0};  // constant: support violation
  Seq z{0, 1, 0, 1, 0, 1, 0, 1};

  DecodeResult r = decode_nondet(cb, z, puz, 0.05);
  CHECK(r.status == DecodeStatus::ok);
  CHECK(r.bin == 0);

  // make the second bin typical too: ambiguity across bins
  Seq balanced{0, 1, 1, 0, 0, 1, 1, 0};
  std::copy(balanced.begin(), balanced.end(), cb.u_symbols.begin() + 8);
  CHECK(decode_nondet(cb, z, puz, 0.05).status == DecodeStatus::collision);

  // no tuple typical at a tiny slack
  cb.u_symbols.assign(16, 0);
  CHECK(decode_nondet(cb, z, puz, 0.05).status == DecodeStatus::not_found);
}

TEST_CASE("policy files parse and enforce consistency with the channel") {
  SemiDetChannel ch = build_channel({0.5, 0.2});
  std::string good =
      "u_size 2\n"
      "p_yu_given_s\n"
      "0.375 0.125 0.125 0.375  # state 0\n"
      "0.125 0.375 0.375 0.125  # state 1\n"
      "g  0 1 0 1 1 0 1 0\n";
  std::istringstream in(good);
  SimPolicy pol = parse_sim_policy(in, ch);
  CHECK(pol.u_size == 2);
  CHECK(pol.p_at(0, 0, 0) == 0.375);
  CHECK(pol.g_at(0, 0, 0) == 0);
  CHECK(pol.g_at(0, 0, 1) == 1);
  CHECK(pol.g_at(1, 1, 0) == 1);

  // flipping one g entry breaks f(g(y,u,s), s) = y on the support
  std::string bad = good;
  bad.replace(bad.find("g  0"), 4, "g  1");
  std::istringstream bin(bad);
  CHECK_THROWS_WITH_AS(parse_sim_policy(bin, ch), doctest::Contains("f(x,s) != y"),
                       ParseError);

  // the same flip is fine when that (y,u) pair has zero mass in every state
  std::string zeroed =
      "u_size 2\n"
      "p_yu_given_s\n"
      "0 0.5 0.125 0.375\n"
      "0 0.5 0.375 0.125\n"
      "g  1 1 0 1 1 0 1 0\n";
  std::istringstream zin(zeroed);
  CHECK_NOTHROW(parse_sim_policy(zin, ch));

  std::istringstream missing("u_size 2\np_yu_given_s\n0.25 0.25 0.25 0.25\n0.25 0.25 0.25 0.25\n");
  CHECK_THROWS_WITH_AS(parse_sim_policy(missing, ch), doctest::Contains("missing field 'g'"),
                       ParseError);
}

TEST_CASE("full runs are deterministic and shrink their error with block length") {
  SemiDetChannel ch = build_channel({0.5, 0.2});
  SimPolicy pol = alpha_sim_policy(0.3);

  // Covering rates sit well above the covering thresholds (sum threshold is
  // 1 - Hb(0.3) = 0.119 here) so that covering succeeds at moderate n; the
  // message rate then takes 70% of what the bin structure leaves over.
  SimConfig cfg;
  cfg.rate_y = 0.385;
  cfg.cover_rate_y = 0.45;
  cfg.rate_z = 0.0;
  cfg.cover_rate_z = 0.25;
  cfg.epsilon = 0.65;
  cfg.trials = 400;
  cfg.seed = 5007;

  cfg.n = 8;
  SimReport r8 = run_trials(ch, pol, cfg);
  cfg.n = 12;
  SimReport r12 = run_trials(ch, pol, cfg);
  cfg.n = 20;
  SimReport r20 = run_trials(ch, pol, cfg);
  // At n = 8 the rare cells of P(y,u,s) have expected count 0.6, and the band
  // [0.6 * 0.35, 0.6 * 1.65] contains no integer, so covering always fails.
  CHECK(r8.encoder_fail_rate == 1.0);
  CHECK(r8.overall_err_rate > r12.overall_err_rate);
  CHECK(r12.overall_err_rate > r20.overall_err_rate);
  CHECK(r20.encoder_fail_rate < 0.2);
  CHECK(r20.overall_err_rate < 0.35);

  SimReport again = run_trials(ch, pol, cfg);
  CHECK(again.to_text() == r20.to_text());
  SimConfig threaded = cfg;
  threaded.threads = 4;
  CHECK(run_trials(ch, pol, threaded).to_text() == r20.to_text());

  SimConfig empty = cfg;
  empty.trials = 0;
  SimReport r0 = run_trials(ch, pol, empty);
  CHECK(r0.trials == 0);
  CHECK(r0.overall_err_rate == 0.0);
  CHECK(r0.to_text().find("trials 0\n") != std::string::npos);

  SimConfig oversize = cfg;
  oversize.n = 24;
  oversize.rate_y = 1.0;
  CHECK_THROWS_AS(run_trials(ch, pol, oversize), GuardError);
}

TEST_CASE("covering succeeds more often as the within-bin rates grow") {
  SemiDetChannel ch = build_channel({0.5, 0.2});
  SimPolicy pol = alpha_sim_policy(0.25);
  SimConfig cfg;
  cfg.n = 16;
  cfg.rate_y = 0.3;
  cfg.rate_z = 0.0;
  cfg.cover_rate_z = 0.06;
  cfg.epsilon = 0.4;
  cfg.trials = 200;

  int monotone = 0;
  for (int seed = 0; seed < 10; ++seed) {
    cfg.seed = 100 + seed;
    double fail[3];
    int k = 0;
    for (double cover : {0.02, 0.15, 0.35}) {
      cfg.cover_rate_y = cover;
      fail[k++] = run_trials(ch, pol, cfg).encoder_fail_rate;
    }
    if (fail[0] >= fail[1] && fail[1] >= fail[2]) monotone++;
  }
  CHECK(monotone >= 8);
}

TEST_CASE("the deterministic decoder is exact on collision-free codebooks") {
  ProbVec py({0.5, 0.5});
  ProbVec pu({0.5, 0.5});
  SimConfig cfg;
  cfg.n = 24;
  cfg.rate_y = 0.2;
  cfg.cover_rate_y = 0.1;
  cfg.seed = 3;
  Codebook cb = generate_codebook(py, pu, cfg);

  std::set<Seq> distinct;
  int total = cb.y_bins * cb.y_per_bin;
  for (int id = 0; id < total; ++id) {
    auto t = cb.y_tuple(id);
    distinct.insert(Seq(t.begin(), t.end()));
  }
  REQUIRE(static_cast<int>(distinct.size()) == total);  // seed chosen to avoid clashes

  for (int id = 0; id < total; ++id) {
    DecodeResult r = decode_det(cb, cb.y_tuple(id));
    CHECK(r.status == DecodeStatus::ok);
    CHECK(r.bin == id / cb.y_per_bin);
  }
}
