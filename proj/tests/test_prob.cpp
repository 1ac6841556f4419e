#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdbc/prob.hpp"

using namespace sdbc;

namespace {

// Test-local entropy so library results are checked against an independent
// implementation, not against themselves.
double plain_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

JointDist bsc_pair(double flip) {
  // X ~ Ber(0.5), Y = X xor noise(flip)
  std::vector<double> m = {0.5 * (1 - flip), 0.5 * flip, 0.5 * flip, 0.5 * (1 - flip)};
  return JointDist({{AxisName::X, 2}, {AxisName::Y, 2}}, m);
}

}  // namespace

TEST_CASE("binary_entropy matches reference values") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(binary_entropy(0.2) - 0.721928094887362) < 1e-14);
  CHECK(std::abs(binary_entropy(0.1) - 0.468995593589281) < 1e-14);
  CHECK(std::abs(binary_entropy(0.26) - 0.826746372492617) < 1e-14);
  CHECK(binary_entropy(0.3) == binary_entropy(0.7));
  CHECK_THROWS_AS(binary_entropy(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(1.1), std::invalid_argument);
}

TEST_CASE("entropy and mutual information on a binary symmetric pair") {
  JointDist d = bsc_pair(0.2);
  CHECK(std::abs(entropy(d, {AxisName::X}) - 1.0) < 1e-14);
  CHECK(std::abs(entropy(d, {AxisName::Y}) - 1.0) < 1e-14);
  CHECK(std::abs(conditional_entropy(d, {AxisName::Y}, {AxisName::X}) - 0.721928094887362) <
        1e-13);
  CHECK(std::abs(mutual_info(d, {AxisName::X}, {AxisName::Y}) - 0.278071905112637) < 1e-13);
  CHECK(mutual_info(d, {AxisName::X}, {AxisName::Y}) ==
        mutual_info(d, {AxisName::Y}, {AxisName::X}));
}

TEST_CASE("entropy handles zero cells and matches an independent computation") {
  std::vector<double> m = {0.5, 0.0, 0.25, 0.25};
  JointDist d({{AxisName::X, 2}, {AxisName::Z, 2}}, m);
  CHECK(std::abs(entropy(d, {AxisName::X, AxisName::Z}) - plain_entropy(m)) < 1e-14);
  CHECK(std::abs(entropy(d, {AxisName::X, AxisName::Z}) - 1.5) < 1e-14);
}

TEST_CASE("chain rule and marginal consistency on a three-axis joint") {
  std::vector<double> m(12);
  for (int i = 0; i < 12; ++i) m[i] = (i + 1) / 78.0;
  JointDist d({{AxisName::X, 2}, {AxisName::Y, 3}, {AxisName::S, 2}}, m);

  AxisSet x{AxisName::X}, y{AxisName::Y}, s{AxisName::S};
  double hxys = entropy(d, x | y | s);
  double chain = entropy(d, x) + conditional_entropy(d, y, x) + conditional_entropy(d, s, x | y);
  CHECK(std::abs(hxys - chain) < 1e-10);

  // independent recomputation of H(X,Y,S) and H(Y)
  CHECK(std::abs(hxys - plain_entropy(m)) < 1e-13);
  std::vector<double> py(3, 0.0);
  for (int xi = 0; xi < 2; ++xi)
    for (int yi = 0; yi < 3; ++yi)
      for (int si = 0; si < 2; ++si) py[yi] += m[(xi * 3 + yi) * 2 + si];
  CHECK(std::abs(entropy(d, y) - plain_entropy(py)) < 1e-13);

  // marginalization preserves mass and drops the right axes
  JointDist ys = d.marginalize(y | s);
  CHECK(ys.rank() == 2);
  CHECK(ys.axes()[0].name == AxisName::Y);
  CHECK(ys.axes()[1].name == AxisName::S);
  double total = 0.0;
  for (double v : ys.mass()) total += v;
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK(std::abs(entropy(ys, y) - entropy(d, y)) < 1e-12);

  // mutual information identities
  CHECK(std::abs(mutual_info(d, x, y) - (entropy(d, x) - conditional_entropy(d, x, y))) < 1e-12);
  CHECK(mutual_info(d, x, y) > -1e-10);
  CHECK(std::abs(conditional_mutual_info(d, x, y, s) -
                 (conditional_entropy(d, x, s) - conditional_entropy(d, x, y | s))) < 1e-12);
}

TEST_CASE("conditional mutual information vanishes across a Markov chain") {
  // X -> Y -> Z with X ~ Ber(0.5), BSC(0.1) then BSC(0.3)
  double q1 = 0.1, q2 = 0.3;
  std::vector<double> m(8, 0.0);
  for (int xi = 0; xi < 2; ++xi) {
    for (int yi = 0; yi < 2; ++yi) {
      for (int zi = 0; zi < 2; ++zi) {
        double p = 0.5;
        p *= (yi == xi) ? (1 - q1) : q1;
        p *= (zi == yi) ? (1 - q2) : q2;
        m[(xi * 2 + yi) * 2 + zi] = p;
      }
    }
  }
  JointDist d({{AxisName::X, 2}, {AxisName::Y, 2}, {AxisName::Z, 2}}, m);
  CHECK(std::abs(conditional_mutual_info(d, {AxisName::X}, {AxisName::Z}, {AxisName::Y})) <
        1e-12);
  CHECK(mutual_info(d, {AxisName::X}, {AxisName::Z}) > 0.05);
}

TEST_CASE("marginal_vec returns the single-axis marginal") {
  JointDist d = bsc_pair(0.2);
  ProbVec px = d.marginal_vec(AxisName::X);
  REQUIRE(px.size() == 2);
  CHECK(std::abs(px[0] - 0.5) < 1e-15);
}

TEST_CASE("validation rejects malformed inputs") {
  CHECK_THROWS_AS(ProbVec({0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(ProbVec({1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(CondKernel(2, 2, {1.0, 0.0, 0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(JointDist({{AxisName::X, 2}}, {0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(JointDist({{AxisName::X, 2}, {AxisName::X, 2}},
                            {0.25, 0.25, 0.25, 0.25}),
                  std::invalid_argument);

  JointDist d = bsc_pair(0.2);
  CHECK_THROWS_AS(entropy(d, {AxisName::S}), std::invalid_argument);
  CHECK_THROWS_AS(conditional_entropy(d, {AxisName::X}, {AxisName::X}), std::invalid_argument);
  CHECK_THROWS_AS(mutual_info(d, {AxisName::X, AxisName::Y}, {AxisName::Y}),
                  std::invalid_argument);
  CHECK_THROWS_AS(d.axis_size(AxisName::U), std::invalid_argument);
  CHECK(d.axis_index(AxisName::U) == -1);
}

TEST_CASE("axis set operations") {
  AxisSet a{AxisName::X, AxisName::Y};
  AxisSet b{AxisName::Y, AxisName::S};
  CHECK((a & b).contains(AxisName::Y));
  CHECK(!(a & b).contains(AxisName::X));
  CHECK((a | b) == AxisSet{AxisName::X, AxisName::Y, AxisName::S});
  CHECK(!a.disjoint(b));
  CHECK(a.disjoint(AxisSet{AxisName::U}));
  CHECK(AxisSet{AxisName::X}.subset_of(a));
  CHECK(!a.subset_of(AxisSet{AxisName::X}));
  CHECK(AxisSet{}.empty());
}
