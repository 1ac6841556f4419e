#include "sdbc/outer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "sdbc/capacity.hpp"
#include "sdbc/errors.hpp"
#include "sdbc/rng.hpp"
#include "sdbc/search.hpp"

namespace sdbc {

namespace {

double ent(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

}  // namespace

JointDist outer_joint_from_policy(const GeneralChannel& ch, const AuxPolicy& pol) {
  if (pol.p_xu_given_s.rows() != ch.s_size || pol.x_size() != ch.x_size) {
    throw std::invalid_argument("outer_joint_from_policy: policy shape does not match channel");
  }
  int X = ch.x_size, Y = ch.y_size, Z = ch.z_size, S = ch.s_size, U = pol.u_size;
  std::vector<double> m(static_cast<size_t>(X) * Y * Z * S * U, 0.0);
  for (int x = 0; x < X; ++x) {
    for (int s = 0; s < S; ++s) {
      for (int u = 0; u < U; ++u) {
        double p = ch.p_s[s] * pol.at(s, x, u);
        if (p <= 0.0) continue;
        for (int y = 0; y < Y; ++y) {
          for (int z = 0; z < Z; ++z) {
            size_t idx = (((static_cast<size_t>(x) * Y + y) * Z + z) * S + s) * U + u;
            m[idx] = p * ch.w_at(x, s, y, z);
          }
        }
      }
    }
  }
  return JointDist({{AxisName::X, X},
                    {AxisName::Y, Y},
                    {AxisName::Z, Z},
                    {AxisName::S, S},
                    {AxisName::U, U}},
                   std::move(m));
}

BoundTriple outer_triple(const GeneralChannel& ch, const AuxPolicy& pol) {
  JointDist d = outer_joint_from_policy(ch, pol);
  AxisSet x{AxisName::X}, y{AxisName::Y}, z{AxisName::Z}, s{AxisName::S}, u{AxisName::U};
  BoundTriple t;
  t.a = conditional_mutual_info(d, x, y, s);
  double iuz = mutual_info(d, u, z);
  t.b = iuz - mutual_info(d, u, s);
  t.c = t.a + iuz - mutual_info(d, u, s | y);
  return t;
}

namespace {

// Fast outer-triple evaluation on a policy matrix; mirrors the inner-region
// hot path but with stochastic y.
struct OuterEval {
  const GeneralChannel* ch;
  int X, Y, Z, S, U;
  double h_s = 0.0;
  std::vector<double> wy, wz;  // per (x, s): marginals of w(y, z | x, s)
  std::vector<double> pxs, pxys, pys, pz, puz, psu, puys;

  OuterEval(const GeneralChannel& c, int u_size)
      : ch(&c), X(c.x_size), Y(c.y_size), Z(c.z_size), S(c.s_size), U(u_size) {
    wy.assign(static_cast<size_t>(X) * S * Y, 0.0);
    wz.assign(static_cast<size_t>(X) * S * Z, 0.0);
    for (int x = 0; x < X; ++x) {
      for (int s = 0; s < S; ++s) {
        int xs = x * S + s;
        for (int y = 0; y < Y; ++y) {
          for (int z = 0; z < Z; ++z) {
            double w = c.w_at(x, s, y, z);
            wy[static_cast<size_t>(xs) * Y + y] += w;
            wz[static_cast<size_t>(xs) * Z + z] += w;
          }
        }
      }
    }
    pxs.resize(static_cast<size_t>(X) * S);
    pxys.resize(static_cast<size_t>(X) * Y * S);
    pys.resize(static_cast<size_t>(Y) * S);
    pz.resize(Z);
    puz.resize(static_cast<size_t>(U) * Z);
    psu.resize(static_cast<size_t>(S) * U);
    puys.resize(static_cast<size_t>(U) * Y * S);
    h_s = ent(c.p_s.values());
  }

  BoundTriple eval(const double* pol) {
    std::fill(pxs.begin(), pxs.end(), 0.0);
    std::fill(pxys.begin(), pxys.end(), 0.0);
    std::fill(pys.begin(), pys.end(), 0.0);
    std::fill(puz.begin(), puz.end(), 0.0);
    std::fill(psu.begin(), psu.end(), 0.0);
    std::fill(puys.begin(), puys.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      double ps = ch->p_s[s];
      if (ps <= 0.0) continue;
      for (int x = 0; x < X; ++x) {
        int xs = x * S + s;
        const double* wyr = wy.data() + static_cast<size_t>(xs) * Y;
        const double* wzr = wz.data() + static_cast<size_t>(xs) * Z;
        const double* prow = pol + (static_cast<size_t>(s) * X + x) * U;
        for (int u = 0; u < U; ++u) {
          double p = ps * prow[u];
          if (p <= 0.0) continue;
          pxs[xs] += p;
          psu[static_cast<size_t>(s) * U + u] += p;
          for (int y = 0; y < Y; ++y) {
            double py = p * wyr[y];
            if (py <= 0.0) continue;
            pxys[(static_cast<size_t>(x) * Y + y) * S + s] += py;
            pys[static_cast<size_t>(y) * S + s] += py;
            puys[(static_cast<size_t>(u) * Y + y) * S + s] += py;
          }
          double* uzrow = puz.data() + static_cast<size_t>(u) * Z;
          for (int z = 0; z < Z; ++z) uzrow[z] += p * wzr[z];
        }
      }
    }
    std::fill(pz.begin(), pz.end(), 0.0);
    for (int u = 0; u < U; ++u) {
      for (int z = 0; z < Z; ++z) pz[z] += puz[static_cast<size_t>(u) * Z + z];
    }
    double h_xs = ent(pxs);
    double h_xys = ent(pxys);
    double h_ys = ent(pys);
    double h_z = ent(pz);
    double h_uz = ent(puz);
    double h_su = ent(psu);
    double h_uys = ent(puys);
    BoundTriple t;
    t.a = (h_ys - h_s) - (h_xys - h_xs);
    t.b = h_z - h_uz - h_s + h_su;
    t.c = t.a + h_z - h_uz - h_ys + h_uys;
    return t;
  }
};

// Recovers f and w(z | x, s) when every row of w(y, z | x, s) puts its mass
// on a single y (exact zeros elsewhere). On such channels I(X;Y|S) collapses
// to H(Y|S), so the achievable-side evaluator computes the same triple; it
// is also what keeps the converse-side sweep bit-identical to the
// achievable-side one, so the two estimated regions coincide.
bool extract_semidet(const GeneralChannel& ch, SemiDetChannel& sd) {
  int X = ch.x_size, Y = ch.y_size, Z = ch.z_size, S = ch.s_size;
  std::vector<int> f(static_cast<size_t>(X) * S, 0);
  std::vector<double> w(static_cast<size_t>(X) * S * Z, 0.0);
  for (int x = 0; x < X; ++x) {
    for (int s = 0; s < S; ++s) {
      int ypick = -1;
      for (int y = 0; y < Y; ++y) {
        bool any = false;
        for (int z = 0; z < Z; ++z) {
          if (ch.w_at(x, s, y, z) != 0.0) {
            any = true;
            break;
          }
        }
        if (!any) continue;
        if (ypick >= 0) return false;
        ypick = y;
      }
      if (ypick < 0) return false;
      int xs = x * S + s;
      f[xs] = ypick;
      for (int z = 0; z < Z; ++z) {
        w[static_cast<size_t>(xs) * Z + z] = ch.w_at(x, s, ypick, z);
      }
    }
  }
  sd.x_size = X;
  sd.y_size = Y;
  sd.z_size = Z;
  sd.s_size = S;
  sd.f = std::move(f);
  sd.w = CondKernel(X * S, Z, std::move(w));
  sd.p_s = ch.p_s;
  return true;
}

}  // namespace

RegionEstimate outer_region_estimate(const GeneralChannel& ch, const SearchConfig& cfg) {
  int X = ch.x_size, S = ch.s_size;
  int U = X * S + 1;
  if (U > 32) {
    throw GuardError("outer_region_estimate: auxiliary alphabet size " + std::to_string(U) +
                     " exceeds the guard of 32");
  }
  SemiDetChannel sd;
  bool det_y = extract_semidet(ch, sd);
  auto make_eval = [&ch, &sd, det_y, U]() {
    if (det_y) return make_triple_eval(sd, U);
    auto eval = std::make_shared<OuterEval>(ch, U);
    return std::function<BoundTriple(const double*)>(
        [eval](const double* pol) { return eval->eval(pol); });
  };
  auto refine = [&ch](const AuxPolicy& pol) { return outer_triple(ch, pol); };
  RegionEstimate est;
  est.region = sweep_policy_hull(X, S, U, cfg, make_eval, refine);
  est.note = "estimate: lower-bound-of-outer-bound";
  return est;
}

std::vector<StrategyLetter> enumerate_strategies(int x_size, int s_size) {
  long long count = 1;
  for (int s = 0; s < s_size; ++s) {
    count *= x_size;
    if (count > 256) {
      throw GuardError("enumerate_strategies: " + std::to_string(x_size) + "^" +
                       std::to_string(s_size) + " strategies exceed the guard of 256");
    }
  }
  std::vector<StrategyLetter> out;
  out.reserve(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t) {
    StrategyLetter st;
    st.index = t;
    st.table.resize(s_size);
    int rem = t;
    for (int s = 0; s < s_size; ++s) {
      st.table[s] = rem % x_size;
      rem /= x_size;
    }
    out.push_back(std::move(st));
  }
  return out;
}

ConvexRegion2D causal_outer_region(const GeneralChannel& ch, const SearchConfig& cfg) {
  std::vector<StrategyLetter> strategies = enumerate_strategies(ch.x_size, ch.s_size);
  int K = static_cast<int>(strategies.size());
  int Y = ch.y_size, Z = ch.z_size;

  // per-strategy output laws and entropies
  std::vector<double> py_t(static_cast<size_t>(K) * Y, 0.0);
  std::vector<double> pz_t(static_cast<size_t>(K) * Z, 0.0);
  std::vector<double> hy_t(K), hz_t(K);
  for (int t = 0; t < K; ++t) {
    for (int s = 0; s < ch.s_size; ++s) {
      double ps = ch.p_s[s];
      if (ps <= 0.0) continue;
      int x = strategies[t].table[s];
      for (int y = 0; y < Y; ++y) {
        for (int z = 0; z < Z; ++z) {
          double w = ps * ch.w_at(x, s, y, z);
          py_t[static_cast<size_t>(t) * Y + y] += w;
          pz_t[static_cast<size_t>(t) * Z + z] += w;
        }
      }
    }
    hy_t[t] = ent({py_t.data() + static_cast<size_t>(t) * Y, static_cast<size_t>(Y)});
    hz_t[t] = ent({pz_t.data() + static_cast<size_t>(t) * Z, static_cast<size_t>(Z)});
  }

  std::vector<double> py(Y), pz(Z);
  auto rates_of = [&](std::span<const double> pt) {
    std::fill(py.begin(), py.end(), 0.0);
    std::fill(pz.begin(), pz.end(), 0.0);
    double hy_cond = 0.0, hz_cond = 0.0;
    for (int t = 0; t < K; ++t) {
      double p = pt[t];
      if (p <= 0.0) continue;
      for (int y = 0; y < Y; ++y) py[y] += p * py_t[static_cast<size_t>(t) * Y + y];
      for (int z = 0; z < Z; ++z) pz[z] += p * pz_t[static_cast<size_t>(t) * Z + z];
      hy_cond += p * hy_t[t];
      hz_cond += p * hz_t[t];
    }
    return std::pair<double, double>(std::max(0.0, ent(py) - hy_cond),
                                     std::max(0.0, ent(pz) - hz_cond));
  };

  // Rectangle corners over structured strategy mixtures: every two-point
  // uniform mixture and the all-uniform mixture. For channels whose
  // boundary is a simplex edge these alone are exact.
  std::vector<RatePair> corners;
  corners.push_back({0.0, 0.0});
  std::vector<double> pt(K, 0.0);
  auto add_corner = [&](std::span<const double> dist) {
    auto [iy, iz] = rates_of(dist);
    corners.push_back({iy, iz});
    corners.push_back({iy, 0.0});
    corners.push_back({0.0, iz});
  };
  for (int i = 0; i < K; ++i) {
    for (int j = i + 1; j < K; ++j) {
      std::fill(pt.begin(), pt.end(), 0.0);
      pt[i] = pt[j] = 0.5;
      add_corner(pt);
    }
  }
  std::fill(pt.begin(), pt.end(), 1.0 / K);
  add_corner(pt);

  // Weighted-sum sweep; both rates are concave in the strategy
  // distribution, so few restarts are needed.
  int D = std::max(1, cfg.weight_sweep_count);
  int R = std::min(std::max(0, cfg.random_restarts), 4) + 1;
  struct Slot {
    double value = -1e300;
    RatePair corner;
  };
  std::vector<Slot> results(static_cast<size_t>(D) * R);
  auto task = [&](int i) {
    int d = i / R;
    int r = i % R;
    double phi = (D == 1) ? std::numbers::pi / 4 : d * (std::numbers::pi / 2) / (D - 1);
    double wy_ = std::max(0.0, std::cos(phi));
    double wz_ = std::max(0.0, std::sin(phi));
    Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(d) + 2000003ULL,
                          static_cast<std::uint64_t>(r));
    std::vector<double> theta(K, 0.0);
    if (r > 0) {
      for (double& v : theta) v = rng.range(-2.0, 2.0);
    }
    std::vector<double> probs(K);
    auto objective = [&](const std::vector<double>& th) {
      softmax(th, probs);
      auto [iy, iz] = rates_of(probs);
      return wy_ * iy + wz_ * iz;
    };
    Slot slot;
    slot.value = coordinate_ascent(theta, objective, cfg.local_steps, cfg.tolerance);
    softmax(theta, probs);
    auto [iy, iz] = rates_of(probs);
    slot.corner = {iy, iz};
    results[i] = slot;
  };
  run_indexed(D * R, std::max(1, cfg.threads), task);

  for (const Slot& s : results) {
    corners.push_back(s.corner);
    corners.push_back({s.corner.ry, 0.0});
    corners.push_back({0.0, s.corner.rz});
  }
  return ConvexRegion2D::from_points(corners);
}

}  // namespace sdbc
