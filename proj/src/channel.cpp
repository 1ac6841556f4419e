#include "sdbc/channel.hpp"

#include <cstdio>
#include <fstream>

#include "sdbc/errors.hpp"
#include "textform.hpp"

namespace sdbc {

using namespace textform;

GeneralChannel embed(const SemiDetChannel& ch) {
  GeneralChannel g;
  g.x_size = ch.x_size;
  g.y_size = ch.y_size;
  g.z_size = ch.z_size;
  g.s_size = ch.s_size;
  g.p_s = ch.p_s;
  std::vector<double> w(static_cast<size_t>(ch.x_size) * ch.s_size * ch.y_size * ch.z_size, 0.0);
  int yz = ch.y_size * ch.z_size;
  for (int x = 0; x < ch.x_size; ++x) {
    for (int s = 0; s < ch.s_size; ++s) {
      int row = x * ch.s_size + s;
      int y = ch.f_at(x, s);
      for (int z = 0; z < ch.z_size; ++z) {
        w[static_cast<size_t>(row) * yz + y * ch.z_size + z] = ch.w_at(x, s, z);
      }
    }
  }
  g.w = CondKernel(ch.x_size * ch.s_size, yz, std::move(w));
  return g;
}

SemiDetChannel parse_semidet_channel(std::istream& in) {
  TokenFile tf = tokenize(in);
  SemiDetChannel ch;
  ch.x_size = parse_size(tf, "x_size");
  ch.y_size = parse_size(tf, "y_size");
  ch.z_size = parse_size(tf, "z_size");
  ch.s_size = parse_size(tf, "s_size");
  size_t xs = static_cast<size_t>(ch.x_size) * ch.s_size;
  ch.f = parse_ints(tf, "f", xs, 0, ch.y_size);
  std::vector<double> w = parse_numbers(tf, "w", xs * ch.z_size);
  check_rows("w", w, static_cast<int>(xs), ch.z_size);
  ch.w = CondKernel(static_cast<int>(xs), ch.z_size, std::move(w));
  ch.p_s = parse_p_s(tf, ch.s_size);
  return ch;
}

GeneralChannel parse_general_channel(std::istream& in) {
  TokenFile tf = tokenize(in);
  GeneralChannel ch;
  ch.x_size = parse_size(tf, "x_size");
  ch.y_size = parse_size(tf, "y_size");
  ch.z_size = parse_size(tf, "z_size");
  ch.s_size = parse_size(tf, "s_size");
  size_t xs = static_cast<size_t>(ch.x_size) * ch.s_size;
  size_t yz = static_cast<size_t>(ch.y_size) * ch.z_size;
  std::vector<double> w = parse_numbers(tf, "w", xs * yz);
  check_rows("w", w, static_cast<int>(xs), static_cast<int>(yz));
  ch.w = CondKernel(static_cast<int>(xs), static_cast<int>(yz), std::move(w));
  ch.p_s = parse_p_s(tf, ch.s_size);
  return ch;
}

AuxPolicy parse_aux_policy(std::istream& in, int x_size, int s_size) {
  TokenFile tf = tokenize(in);
  AuxPolicy pol;
  pol.u_size = parse_size(tf, "u_size");
  size_t cols = static_cast<size_t>(x_size) * pol.u_size;
  std::vector<double> p = parse_numbers(tf, "p_xu_given_s", cols * s_size);
  check_rows("p_xu_given_s", p, s_size, static_cast<int>(cols));
  pol.p_xu_given_s = CondKernel(s_size, static_cast<int>(cols), std::move(p));
  return pol;
}

std::string format_aux_policy(const AuxPolicy& pol, int x_size, int s_size) {
  std::string out = "u_size " + std::to_string(pol.u_size) + "\np_xu_given_s\n";
  char buf[40];
  for (int s = 0; s < s_size; ++s) {
    for (int x = 0; x < x_size; ++x) {
      for (int u = 0; u < pol.u_size; ++u) {
        std::snprintf(buf, sizeof(buf), "%.17g", pol.at(s, x, u));
        out += buf;
        out += (x == x_size - 1 && u == pol.u_size - 1) ? '\n' : ' ';
      }
    }
  }
  return out;
}

SemiDetChannel load_semidet_channel(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_semidet_channel(in);
}

GeneralChannel load_general_channel(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_general_channel(in);
}

AuxPolicy load_aux_policy(const std::string& path, int x_size, int s_size) {
  auto in = open_or_throw(path);
  return parse_aux_policy(in, x_size, s_size);
}

}  // namespace sdbc
