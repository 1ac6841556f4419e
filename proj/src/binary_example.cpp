#include "sdbc/binary_example.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "sdbc/errors.hpp"
#include "sdbc/prob.hpp"

namespace sdbc {

namespace {

void check_prob(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

// Boundary trace from (0, 1 - h2(p)) down to (1, 0); both coordinates are
// monotone in alpha, so this is the upper-right frontier of the region.
std::vector<RatePair> noncausal_boundary(double p, int alpha_samples) {
  std::vector<RatePair> pts;
  pts.reserve(alpha_samples);
  for (int i = 0; i < alpha_samples; ++i) {
    double alpha = 0.5 * i / (alpha_samples - 1);
    double rz = 1.0 - binary_entropy(beta(alpha, p));
    if (rz < 0.0) rz = 0.0;
    pts.push_back({binary_entropy(alpha), rz});
  }
  return pts;
}

void write_polyline_csv(const std::filesystem::path& path,
                        const std::vector<RatePair>& pts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "r_y,r_z\n";
  char line[80];
  for (const RatePair& pt : pts) {
    std::snprintf(line, sizeof line, "%.9f,%.9f\n", pt.ry, pt.rz);
    out << line;
  }
}

std::string svg_polyline(const std::vector<RatePair>& pts, const char* style) {
  std::string s = "  <polyline fill=\"none\" ";
  s += style;
  s += " points=\"";
  char buf[64];
  for (size_t i = 0; i < pts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6f,%.6f", i ? " " : "", pts[i].ry,
                  0.4 - pts[i].rz);
    s += buf;
  }
  s += "\"/>\n";
  return s;
}

}  // namespace

SemiDetChannel build_channel(const BinaryExampleParams& params) {
  check_prob(params.sigma, "sigma");
  check_prob(params.p, "p");
  SemiDetChannel ch;
  ch.x_size = ch.y_size = ch.z_size = ch.s_size = 2;
  ch.f = {0, 1, 1, 0};  // f(x,s) = x xor s
  std::vector<double> w;
  for (int x = 0; x < 2; ++x) {
    for (int s = 0; s < 2; ++s) {
      (void)s;
      w.push_back(x == 0 ? 1.0 - params.p : params.p);
      w.push_back(x == 0 ? params.p : 1.0 - params.p);
    }
  }
  ch.w = CondKernel(4, 2, w);
  ch.p_s = ProbVec({1.0 - params.sigma, params.sigma});
  return ch;
}

double beta(double alpha, double p) {
  check_prob(alpha, "alpha");
  check_prob(p, "p");
  return alpha * (1.0 - p) + (1.0 - alpha) * p;
}

ConvexRegion2D noncausal_region(double p, int alpha_samples) {
  check_prob(p, "p");
  if (alpha_samples < 2) throw GuardError("alpha_samples must be at least 2");
  std::vector<RatePair> pts;
  pts.reserve(static_cast<size_t>(alpha_samples) * 3 + 1);
  pts.push_back({0.0, 0.0});
  for (const RatePair& corner : noncausal_boundary(p, alpha_samples)) {
    pts.push_back({corner.ry, 0.0});
    pts.push_back({0.0, corner.rz});
    pts.push_back(corner);
  }
  return ConvexRegion2D::from_points(pts);
}

ConvexRegion2D causal_region(double p) {
  check_prob(p, "p");
  double rz_max = 1.0 - binary_entropy(p);
  std::vector<RatePair> pts = {{0.0, 0.0}, {1.0, 0.0}};
  if (rz_max > 0.0) pts.push_back({0.0, rz_max});
  return ConvexRegion2D::from_points(pts);
}

void emit_figure1(const std::string& dir, const BinaryExampleParams& params,
                  int alpha_samples) {
  if (params.sigma != 0.5) {
    throw GuardError("the causal overlay requires sigma = 0.5");
  }
  check_prob(params.p, "p");
  if (alpha_samples < 2) throw GuardError("alpha_samples must be at least 2");

  std::vector<RatePair> noncausal = noncausal_boundary(params.p, alpha_samples);
  double rz_max = 1.0 - binary_entropy(params.p);
  std::vector<RatePair> causal;
  const int causal_samples = 65;
  for (int i = 0; i < causal_samples; ++i) {
    double lambda = static_cast<double>(i) / (causal_samples - 1);
    causal.push_back({lambda, (1.0 - lambda) * rz_max});
  }

  std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  write_polyline_csv(base / "noncausal.csv", noncausal);
  write_polyline_csv(base / "causal.csv", causal);

  std::ofstream svg(base / "figure1.svg", std::ios::binary);
  if (!svg) throw std::runtime_error("cannot write figure1.svg");
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" "
         "height=\"288\" viewBox=\"0 0 1 0.4\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"1\" height=\"0.4\" fill=\"white\" "
         "stroke=\"black\" stroke-width=\"0.003\"/>\n";
  // tick marks every 0.1 on both axes
  char buf[256];
  for (int i = 1; i < 10; ++i) {
    double t = 0.1 * i;
    std::snprintf(buf, sizeof buf,
                  "  <line x1=\"%.1f\" y1=\"0.4\" x2=\"%.1f\" y2=\"0.388\" "
                  "stroke=\"black\" stroke-width=\"0.002\"/>\n",
                  t, t);
    svg << buf;
    if (i <= 3) {
      std::snprintf(buf, sizeof buf,
                    "  <line x1=\"0\" y1=\"%.1f\" x2=\"0.012\" y2=\"%.1f\" "
                    "stroke=\"black\" stroke-width=\"0.002\"/>\n",
                    0.4 - t, 0.4 - t);
      svg << buf;
    }
  }
  svg << svg_polyline(noncausal,
                      "stroke=\"black\" stroke-width=\"0.004\"");
  svg << svg_polyline(causal,
                      "stroke=\"black\" stroke-width=\"0.004\" "
                      "stroke-dasharray=\"0.02,0.012\"");
  svg << "  <text x=\"0.92\" y=\"0.385\" font-size=\"0.03\" "
         "font-family=\"sans-serif\">R_y</text>\n";
  svg << "  <text x=\"0.015\" y=\"0.04\" font-size=\"0.03\" "
         "font-family=\"sans-serif\">R_z</text>\n";
  svg << "  <text x=\"0.55\" y=\"0.09\" font-size=\"0.025\" "
         "font-family=\"sans-serif\">noncausal (solid)</text>\n";
  svg << "  <text x=\"0.55\" y=\"0.13\" font-size=\"0.025\" "
         "font-family=\"sans-serif\">causal (dashed)</text>\n";
  svg << "</svg>\n";
}

}  // namespace sdbc
