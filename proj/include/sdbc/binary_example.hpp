#pragma once

#include <string>

#include "sdbc/channel.hpp"
#include "sdbc/geometry.hpp"

namespace sdbc {

// The worked binary example: the state flips the deterministic output
// (Y = X xor S, S ~ Ber(sigma)) while the other receiver sees X through a
// binary symmetric channel with crossover p, unaffected by S.
struct BinaryExampleParams {
  double sigma = 0.5;
  double p = 0.2;
};

SemiDetChannel build_channel(const BinaryExampleParams& params);

// Effective crossover of the channel U -> Z when X = U xor Ber(alpha).
double beta(double alpha, double p);

// Closed-form region when the transmitter knows the whole state sequence in
// advance: hull over alpha in [0, 0.5] of the rectangles
// [0, h2(alpha)] x [0, 1 - h2(beta(alpha, p))].  Requires sigma = 0.5.
ConvexRegion2D noncausal_region(double p, int alpha_samples = 512);

// Closed-form region when the transmitter learns the state only as it
// arrives: the triangle r_y + r_z / (1 - h2(p)) <= 1, degenerating to the
// segment [0,1] x {0} at p = 0.5.  Requires sigma = 0.5.
ConvexRegion2D causal_region(double p);

// Writes noncausal.csv, causal.csv and figure1.svg (solid vs dashed
// boundary overlay) into dir, creating it if needed.
void emit_figure1(const std::string& dir, const BinaryExampleParams& params,
                  int alpha_samples = 512);

}  // namespace sdbc
