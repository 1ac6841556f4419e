#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sdbc/binary_example.hpp"
#include "sdbc/capacity.hpp"
#include "sdbc/errors.hpp"
#include "sdbc/prob.hpp"

using namespace sdbc;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("channel construction matches the closed-form law") {
  SemiDetChannel ch = build_channel({0.5, 0.2});
  CHECK(ch.f == std::vector<int>{0, 1, 1, 0});
  CHECK(ch.w_at(0, 0, 0) == 0.8);
  CHECK(ch.w_at(0, 1, 0) == 0.8);  // z ignores s
  CHECK(ch.w_at(1, 0, 1) == 0.8);
  CHECK(ch.p_s.values()[1] == 0.5);

  SemiDetChannel noiseless = build_channel({0.5, 0.0});
  for (int x = 0; x < 2; ++x) {
    for (int s = 0; s < 2; ++s) {
      CHECK(noiseless.w_at(x, s, x) == 1.0);
    }
  }

  SemiDetChannel frozen = build_channel({0.0, 0.2});
  CHECK(frozen.p_s.values()[0] == 1.0);  // state stuck at 0, so y = x

  CHECK_THROWS_AS(build_channel({1.5, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(build_channel({0.5, -0.1}), std::invalid_argument);
}

TEST_CASE("beta is the composed crossover") {
  CHECK(beta(0.0, 0.2) == 0.2);
  CHECK(beta(1.0, 0.2) == doctest::Approx(0.8).epsilon(1e-15));
  for (double p : {0.0, 0.1, 0.2, 0.35, 0.5}) {
    CHECK(beta(0.5, p) == doctest::Approx(0.5).epsilon(1e-15));
  }
  CHECK(beta(0.1, 0.2) == doctest::Approx(0.26).epsilon(1e-15));
  CHECK_THROWS_AS(beta(-0.1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(beta(0.2, 1.2), std::invalid_argument);
}

TEST_CASE("noncausal region hits the known corners and boundary points") {
  ConvexRegion2D r = noncausal_region(0.2, 512);
  CHECK(std::abs(r.support(1.0, 0.0) - 1.0) < 1e-12);
  CHECK(std::abs(r.support(0.0, 1.0) - 0.278071905112637) < 1e-12);
  CHECK(r.contains({1.0, 0.0}, 1e-12));
  CHECK(r.contains({0.0, 0.278071905112637}, 1e-12));

  // alpha = 0.11 rectangle corner; the value pair is fixed by direct
  // evaluation of h2(0.11) and 1 - h2(0.266)
  CHECK(binary_entropy(0.11) == doctest::Approx(0.499915958164527).epsilon(1e-14));
  CHECK(1.0 - binary_entropy(beta(0.11, 0.2)) ==
        doctest::Approx(0.164333852768147).epsilon(1e-14));
  CHECK(r.contains({0.499915958164527, 0.164333852768147}, 1e-5));

  CHECK_THROWS_AS(noncausal_region(0.2, 1), GuardError);
  CHECK_THROWS_AS(noncausal_region(1.5, 16), std::invalid_argument);
}

TEST_CASE("noncausal hull grows with nested sample grids") {
  double a65 = noncausal_region(0.2, 65).area();
  double a129 = noncausal_region(0.2, 129).area();
  double a257 = noncausal_region(0.2, 257).area();
  CHECK(a65 <= a129 + 1e-15);
  CHECK(a129 <= a257 + 1e-15);
  CHECK(a257 - a65 < 1e-4);  // already nearly converged
}

TEST_CASE("causal region is the fixed triangle") {
  ConvexRegion2D r = causal_region(0.2);
  REQUIRE(r.vertices().size() == 3);
  CHECK(std::abs(r.support(1.0, 0.0) - 1.0) < 1e-12);
  CHECK(std::abs(r.support(0.0, 1.0) - 0.278071905112637) < 1e-12);
  CHECK(r.contains({0.5, 0.139035952556318}, 1e-9));
  CHECK(!r.contains({0.5, 0.145}, 1e-4));

  ConvexRegion2D noiseless = causal_region(0.0);
  CHECK(std::abs(noiseless.support(0.0, 1.0) - 1.0) < 1e-12);

  ConvexRegion2D flat = causal_region(0.5);
  CHECK(flat.support(0.0, 1.0) < 1e-12);
  CHECK(std::abs(flat.support(1.0, 0.0) - 1.0) < 1e-12);
  CHECK(flat.contains({0.3, 0.0}, 1e-12));
}

TEST_CASE("causal region sits inside the noncausal one, strictly at p = 0.2") {
  for (double p : {0.05, 0.1, 0.2, 0.35}) {
    ConvexRegion2D nc = noncausal_region(p, 512);
    ConvexRegion2D ca = causal_region(p);  // keep alive: vertices() is a view
    for (const RatePair& v : ca.vertices()) {
      CHECK(nc.contains(v, 1e-9));
    }
  }
  // at r_y = h2(0.11) ~ 0.49992 the noncausal boundary clears the causal
  // line by more than 0.02 bits
  double ry = 0.499915958164527;
  double noncausal_rz = 0.164333852768147;
  double causal_rz = (1.0 - ry) * 0.278071905112637;
  CHECK(noncausal_rz - causal_rz > 0.02);
}

TEST_CASE("noncausal region equals the searched region of the state-free twin") {
  // same example with the state stripped out: y = x, z = x through the BSC
  SemiDetChannel twin;
  twin.x_size = twin.y_size = twin.z_size = 2;
  twin.s_size = 1;
  twin.f = {0, 1};
  twin.w = CondKernel(2, 2, {0.8, 0.2, 0.2, 0.8});
  twin.p_s = ProbVec({1.0});

  SearchConfig cfg;
  cfg.weight_sweep_count = 33;
  cfg.random_restarts = 16;
  cfg.local_steps = 30;
  cfg.seed = 7;
  cfg.threads = 2;
  ConvexRegion2D searched = inner_region(twin, cfg);
  ConvexRegion2D closed = noncausal_region(0.2, 512);
  CHECK(hausdorff_distance(searched, closed) < 0.02);
  CHECK(hausdorff_distance(closed, searched) < 0.02);
}

TEST_CASE("figure emission writes the two boundary files and the overlay") {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "sdbc_fig1_test";
  emit_figure1(dir.string(), {0.5, 0.2}, 512);

  std::string nc = slurp(dir / "noncausal.csv");
  CHECK(nc.rfind("r_y,r_z\n0.000000000,0.278071905\n", 0) == 0);
  CHECK(nc.find("\n1.000000000,0.000000000\n") != std::string::npos);

  std::string ca = slurp(dir / "causal.csv");
  CHECK(ca.rfind("r_y,r_z\n0.000000000,0.278071905\n", 0) == 0);
  CHECK(ca.find("\n1.000000000,0.000000000\n") != std::string::npos);
  CHECK(ca.find("\n0.500000000,0.139035953\n") != std::string::npos);

  std::string svg = slurp(dir / "figure1.svg");
  CHECK(svg.find("viewBox=\"0 0 1 0.4\"") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK(svg.find("R_y") != std::string::npos);
  CHECK(svg.find("R_z") != std::string::npos);

  // byte determinism across repeated emission
  emit_figure1(dir.string(), {0.5, 0.2}, 512);
  CHECK(slurp(dir / "noncausal.csv") == nc);
  CHECK(slurp(dir / "causal.csv") == ca);
  CHECK(slurp(dir / "figure1.svg") == svg);

  CHECK_THROWS_AS(emit_figure1(dir.string(), {0.3, 0.2}, 512), GuardError);
}
