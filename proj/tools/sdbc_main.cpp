#include <cstdio>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "sdbc/binary_example.hpp"
#include "sdbc/capacity.hpp"
#include "sdbc/channel.hpp"
#include "sdbc/errors.hpp"
#include "sdbc/outer.hpp"
#include "sdbc/sim.hpp"

using namespace sdbc;

namespace {

void print_region(const ConvexRegion2D& r) {
  std::printf("area %.9f\n", r.area());
  for (const RatePair& v : r.vertices())
    std::printf("corner %.9f %.9f\n", v.ry, v.rz);
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GuardError("cannot open output file '" + path + "'");
  out << body;
}

GeneralChannel load_broadcast(const std::string& path, bool general) {
  if (general) return load_general_channel(path);
  return embed(load_semidet_channel(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rate regions and coding simulation for state-dependent broadcast "
      "channels with one deterministic receiver"};
  app.require_subcommand(1);

  std::string channel_path, policy_path, out_path, out_dir = "figure1";
  bool general = false, det_selection = false;
  SearchConfig search;
  SimConfig sim;
  BinaryExampleParams fig;
  int samples = 512;

  auto add_search_flags = [&](CLI::App* cmd) {
    cmd->add_option("--channel", channel_path, "channel spec file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--sweeps", search.weight_sweep_count,
                    "weight directions to sweep");
    cmd->add_option("--restarts", search.random_restarts,
                    "random restarts per direction");
    cmd->add_option("--seed", search.seed, "search seed");
    cmd->add_option("--threads", search.threads, "worker cap");
    cmd->add_option("--out", out_path, "write the vertex CSV here");
  };

  CLI::App* inner = app.add_subcommand(
      "region-inner", "achievable region of a semideterministic channel");
  add_search_flags(inner);
  inner->add_flag("--det-selection", det_selection,
                  "restrict to deterministic input-selection policies");

  CLI::App* outer = app.add_subcommand(
      "region-outer", "converse-bound region traced over sampled policies");
  add_search_flags(outer);
  outer->add_flag("--general", general,
                  "channel file carries a joint w(y,z|x,s) table");

  CLI::App* causal = app.add_subcommand(
      "region-causal", "outer bound when state-information is causal");
  add_search_flags(causal);
  causal->add_flag("--general", general,
                   "channel file carries a joint w(y,z|x,s) table");

  CLI::App* figure = app.add_subcommand(
      "example-figure1", "binary-example boundary files and overlay figure");
  figure->add_option("--p", fig.p, "crossover of the stochastic receiver")
      ->check(CLI::Range(0.0, 1.0));
  figure->add_option("--sigma", fig.sigma, "state bias")
      ->check(CLI::Range(0.0, 1.0));
  figure->add_option("--out-dir", out_dir, "directory for the emitted files");
  figure->add_option("--samples", samples, "boundary sample count")
      ->check(CLI::PositiveNumber);

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo run of the binned coding scheme");
  simulate->add_option("--channel", channel_path, "semideterministic channel spec")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--policy", policy_path, "simulation policy file")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--n", sim.n, "block length");
  simulate->add_option("--ry", sim.rate_y, "message rate, deterministic receiver");
  simulate->add_option("--rz", sim.rate_z, "message rate, stochastic receiver");
  simulate->add_option("--cry", sim.cover_rate_y, "within-bin rate of y-tuples");
  simulate->add_option("--crz", sim.cover_rate_z, "within-bin rate of u-tuples");
  simulate->add_option("--eps", sim.epsilon, "typicality slack");
  simulate->add_option("--trials", sim.trials, "trial count");
  simulate->add_option("--seed", sim.seed, "run seed");
  simulate->add_option("--threads", sim.threads, "worker cap");

  CLI::App* reduce = app.add_subcommand(
      "reduce-support", "shrink an auxiliary alphabet, preserving the bounds");
  reduce->add_option("--channel", channel_path, "semideterministic channel spec")
      ->required()
      ->check(CLI::ExistingFile);
  reduce->add_option("--policy", policy_path, "auxiliary policy file")
      ->required()
      ->check(CLI::ExistingFile);
  reduce->add_option("--out", out_path, "write the reduced policy here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (inner->parsed()) {
      SemiDetChannel ch = load_semidet_channel(channel_path);
      ConvexRegion2D r = inner_region(ch, search, det_selection);
      print_region(r);
      if (!out_path.empty()) write_file(out_path, r.to_csv());
    } else if (outer->parsed()) {
      GeneralChannel ch = load_broadcast(channel_path, general);
      RegionEstimate est = outer_region_estimate(ch, search);
      std::printf("note %s\n", est.note.c_str());
      print_region(est.region);
      if (!out_path.empty()) write_file(out_path, est.region.to_csv());
    } else if (causal->parsed()) {
      GeneralChannel ch = load_broadcast(channel_path, general);
      ConvexRegion2D r = causal_outer_region(ch, search);
      print_region(r);
      if (!out_path.empty()) write_file(out_path, r.to_csv());
    } else if (figure->parsed()) {
      emit_figure1(out_dir, fig, samples);
      std::printf("wrote %s/noncausal.csv %s/causal.csv %s/figure1.svg\n",
                  out_dir.c_str(), out_dir.c_str(), out_dir.c_str());
    } else if (simulate->parsed()) {
      SemiDetChannel ch = load_semidet_channel(channel_path);
      SimPolicy pol = load_sim_policy(policy_path, ch);
      SimReport report = run_trials(ch, pol, sim);
      std::fputs(report.to_text().c_str(), stdout);
    } else if (reduce->parsed()) {
      SemiDetChannel ch = load_semidet_channel(channel_path);
      AuxPolicy pol = load_aux_policy(policy_path, ch.x_size, ch.s_size);
      JointDist joint = joint_from_policy(ch, pol);
      JointDist reduced = reduce_support(joint);
      BoundTriple before = triple_from_joint(joint);
      BoundTriple after = triple_from_joint(reduced);
      std::printf("before support %d a %.12f b %.12f c %.12f\n",
                  joint.axis_size(AxisName::U), before.a, before.b, before.c);
      std::printf("after support %d a %.12f b %.12f c %.12f\n",
                  reduced.axis_size(AxisName::U), after.a, after.b, after.c);
      if (!out_path.empty()) {
        AuxPolicy small = policy_from_joint(reduced);
        write_file(out_path, format_aux_policy(small, ch.x_size, ch.s_size));
      }
    }
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 2;
  } catch (const GuardError& e) {
    std::fprintf(stderr, "guard violation: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
