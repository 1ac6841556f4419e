#include "sdbc/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

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

// Accumulates the marginals the three bounds need, without touching
// JointDist; this is the hot path of the region search.
struct TripleEval {
  const SemiDetChannel* ch = nullptr;
  int X = 0, Y = 0, Z = 0, S = 0, U = 0;
  double h_s = 0.0;
  std::vector<double> pys, pz, puz, psu, puys;

  TripleEval(const SemiDetChannel& c, int u_size)
      : ch(&c), X(c.x_size), Y(c.y_size), Z(c.z_size), S(c.s_size), U(u_size) {
    pys.resize(static_cast<size_t>(Y) * S);
    pz.resize(Z);
    puz.resize(static_cast<size_t>(U) * Z);
    psu.resize(static_cast<size_t>(S) * U);
    puys.resize(static_cast<size_t>(U) * Y * S);
    h_s = ent(c.p_s.values());
  }

  // pol laid out as pol[(s*X + x)*U + u] = P(x, u | s)
  BoundTriple eval(const double* pol) {
    std::fill(pys.begin(), pys.end(), 0.0);
    std::fill(puz.begin(), puz.end(), 0.0);
    std::fill(psu.begin(), psu.end(), 0.0);
    std::fill(puys.begin(), puys.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      double ps = ch->p_s[s];
      if (ps <= 0.0) continue;
      for (int x = 0; x < X; ++x) {
        int y = ch->f_at(x, s);
        std::span<const double> wrow = ch->w.row(x * S + s);
        const double* prow = pol + (static_cast<size_t>(s) * X + x) * U;
        for (int u = 0; u < U; ++u) {
          double p = ps * prow[u];
          if (p <= 0.0) continue;
          pys[static_cast<size_t>(y) * S + s] += p;
          psu[static_cast<size_t>(s) * U + u] += p;
          puys[(static_cast<size_t>(u) * Y + y) * S + s] += p;
          double* uzrow = puz.data() + static_cast<size_t>(u) * Z;
          for (int z = 0; z < Z; ++z) uzrow[z] += p * wrow[z];
        }
      }
    }
    std::fill(pz.begin(), pz.end(), 0.0);
    for (int u = 0; u < U; ++u) {
      for (int z = 0; z < Z; ++z) pz[z] += puz[static_cast<size_t>(u) * Z + z];
    }
    double h_ys = ent(pys);
    double h_z = ent(pz);
    double h_uz = ent(puz);
    double h_su = ent(psu);
    double h_uys = ent(puys);
    BoundTriple t;
    t.a = h_ys - h_s;
    t.b = h_z - h_uz - h_s + h_su;
    t.c = t.a + h_z - h_uz - h_ys + h_uys;
    return t;
  }
};

}  // namespace

int aux_bound(int x_size, int s_size) { return x_size * s_size + 1; }

JointDist joint_from_policy(const SemiDetChannel& ch, const AuxPolicy& pol) {
  if (pol.p_xu_given_s.rows() != ch.s_size || pol.x_size() != ch.x_size) {
    throw std::invalid_argument("joint_from_policy: policy shape does not match channel");
  }
  int X = ch.x_size, Y = ch.y_size, Z = ch.z_size, S = ch.s_size, U = pol.u_size;
  std::vector<double> m(static_cast<size_t>(X) * Y * Z * S * U, 0.0);
  for (int x = 0; x < X; ++x) {
    for (int s = 0; s < S; ++s) {
      int y = ch.f_at(x, s);
      for (int u = 0; u < U; ++u) {
        double p = ch.p_s[s] * pol.at(s, x, u);
        if (p <= 0.0) continue;
        for (int z = 0; z < Z; ++z) {
          size_t idx = (((static_cast<size_t>(x) * Y + y) * Z + z) * S + s) * U + u;
          m[idx] = p * ch.w_at(x, s, z);
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

BoundTriple triple_from_joint(const JointDist& d) {
  AxisSet y{AxisName::Y}, z{AxisName::Z}, s{AxisName::S}, u{AxisName::U};
  BoundTriple t;
  t.a = conditional_entropy(d, y, s);
  double iuz = mutual_info(d, u, z);
  t.b = iuz - mutual_info(d, u, s);
  t.c = t.a + iuz - mutual_info(d, u, s | y);
  return t;
}

BoundTriple bound_triple(const SemiDetChannel& ch, const AuxPolicy& pol) {
  return triple_from_joint(joint_from_policy(ch, pol));
}

std::function<BoundTriple(const double*)> make_triple_eval(const SemiDetChannel& ch,
                                                           int u_size) {
  auto eval = std::make_shared<TripleEval>(ch, u_size);
  return [eval](const double* pol) { return eval->eval(pol); };
}

namespace {

// Search state for one (direction, restart) task.
struct TaskResult {
  double value = -1e300;
  std::vector<double> theta;
  std::vector<int> g;
};

// Deterministic-selection variant: theta parametrizes P(y, u | s) and g maps
// (y, u, s) to an input with f(g(y, u, s), s) = y. Cells whose y has no
// preimage under f(., s) are masked out.
struct DetParam {
  int X, Y, S, U;
  std::vector<std::vector<int>> pre;  // pre[y*S + s] = inputs x with f(x,s) = y

  DetParam(const SemiDetChannel& ch, int u_size)
      : X(ch.x_size), Y(ch.y_size), S(ch.s_size), U(u_size), pre(static_cast<size_t>(Y) * S) {
    for (int x = 0; x < X; ++x) {
      for (int s = 0; s < S; ++s) pre[static_cast<size_t>(ch.f_at(x, s)) * S + s].push_back(x);
    }
  }

  // Expands (theta, g) into a policy over (x, u); returns row-major
  // pol[(s*X + x)*U + u].
  void expand(const std::vector<double>& theta, const std::vector<int>& g,
              std::vector<double>& pol, std::vector<double>& scratch) const {
    pol.assign(static_cast<size_t>(S) * X * U, 0.0);
    scratch.resize(static_cast<size_t>(Y) * U);
    std::vector<double> logits(static_cast<size_t>(Y) * U);
    for (int s = 0; s < S; ++s) {
      for (int y = 0; y < Y; ++y) {
        for (int u = 0; u < U; ++u) {
          double v = theta[(static_cast<size_t>(s) * Y + y) * U + u];
          logits[static_cast<size_t>(y) * U + u] = pre[static_cast<size_t>(y) * S + s].empty()
                                                       ? -1e30
                                                       : v;
        }
      }
      softmax(logits, scratch);
      for (int y = 0; y < Y; ++y) {
        for (int u = 0; u < U; ++u) {
          double p = scratch[static_cast<size_t>(y) * U + u];
          if (p <= 0.0) continue;
          int x = g[(static_cast<size_t>(y) * U + u) * S + s];
          pol[(static_cast<size_t>(s) * X + x) * U + u] += p;
        }
      }
    }
  }
};

AuxPolicy policy_from_det(const SemiDetChannel& ch, int U, const std::vector<double>& theta,
                          const std::vector<int>& g) {
  DetParam dp(ch, U);
  std::vector<double> pol, scratch;
  dp.expand(theta, g, pol, scratch);
  // rows already sum to one per state
  AuxPolicy out;
  out.u_size = U;
  out.p_xu_given_s = CondKernel(ch.s_size, ch.x_size * U, std::move(pol));
  return out;
}

}  // namespace

ConvexRegion2D inner_region(const SemiDetChannel& ch, const SearchConfig& cfg,
                            bool det_selection) {
  int X = ch.x_size, Y = ch.y_size, S = ch.s_size;
  int U = aux_bound(X, S);
  if (U > 32) {
    throw GuardError("inner_region: auxiliary alphabet size " + std::to_string(U) +
                     " exceeds the guard of 32");
  }

  if (!det_selection) {
    auto make_eval = [&ch, U]() { return make_triple_eval(ch, U); };
    auto refine = [&ch](const AuxPolicy& pol) { return bound_triple(ch, pol); };
    return sweep_policy_hull(X, S, U, cfg, make_eval, refine);
  }

  int D = std::max(1, cfg.weight_sweep_count);
  int R = std::max(0, cfg.random_restarts) + 1;  // restart 0 is the uniform start

  std::vector<std::pair<double, double>> dirs(D);
  for (int d = 0; d < D; ++d) {
    double phi = (D == 1) ? std::numbers::pi / 4
                          : d * (std::numbers::pi / 2) / (D - 1);
    dirs[d] = {std::max(0.0, std::cos(phi)), std::max(0.0, std::sin(phi))};
  }

  int ntheta = S * Y * U;
  std::vector<TaskResult> results(static_cast<size_t>(D) * R);

  auto task = [&](int i) {
    int d = i / R;
    int r = i % R;
    auto [wy, wz] = dirs[d];
    Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(r));
    TripleEval eval(ch, U);

    std::vector<double> theta(ntheta, 0.0);
    if (r > 0) {
      for (double& t : theta) t = rng.range(-3.0, 3.0);
    }

    DetParam dp(ch, U);
    std::vector<int> g(static_cast<size_t>(Y) * U * S, 0);
    for (int y = 0; y < Y; ++y) {
      for (int u = 0; u < U; ++u) {
        for (int s = 0; s < S; ++s) {
          const auto& opts = dp.pre[static_cast<size_t>(y) * S + s];
          if (opts.empty()) continue;
          int pick = (r == 0) ? 0 : rng.uniform_int(static_cast<int>(opts.size()));
          g[(static_cast<size_t>(y) * U + u) * S + s] = opts[pick];
        }
      }
    }
    std::vector<double> pol, scratch;
    auto value_of = [&](const std::vector<double>& th, const std::vector<int>& gg) {
      dp.expand(th, gg, pol, scratch);
      BoundTriple t = eval.eval(pol.data());
      return triple_support(t.a, t.b, t.c, wy, wz);
    };
    double best = value_of(theta, g);
    int rounds = 4;
    for (int round = 0; round < rounds; ++round) {
      auto objective = [&](const std::vector<double>& th) { return value_of(th, g); };
      best = coordinate_ascent(theta, objective,
                               std::max(1, cfg.local_steps / rounds), cfg.tolerance);
      // discrete sweep over the selection map
      for (int y = 0; y < Y; ++y) {
        for (int u = 0; u < U; ++u) {
          for (int s = 0; s < S; ++s) {
            const auto& opts = dp.pre[static_cast<size_t>(y) * S + s];
            if (opts.size() < 2) continue;
            size_t cell = (static_cast<size_t>(y) * U + u) * S + s;
            int keep = g[cell];
            for (int x : opts) {
              if (x == keep) continue;
              g[cell] = x;
              double v = value_of(theta, g);
              if (v > best) {
                best = v;
                keep = x;
              } else {
                g[cell] = keep;
              }
            }
          }
        }
      }
    }
    TaskResult res;
    res.value = best;
    res.theta = std::move(theta);
    res.g = std::move(g);
    results[i] = std::move(res);
  };

  run_indexed(D * R, std::max(1, cfg.threads), task);

  // Merge in fixed index order: per direction, best restart wins, ties going
  // to the smaller restart index. Vertices come from the reference
  // evaluation of the winning policy, not the fast path.
  std::vector<ConvexRegion2D> polys;
  polys.reserve(D);
  for (int d = 0; d < D; ++d) {
    int best_r = 0;
    for (int r = 1; r < R; ++r) {
      if (results[static_cast<size_t>(d) * R + r].value >
          results[static_cast<size_t>(d) * R + best_r].value) {
        best_r = r;
      }
    }
    const TaskResult& win = results[static_cast<size_t>(d) * R + best_r];
    AuxPolicy pol = policy_from_det(ch, U, win.theta, win.g);
    polys.push_back(ConvexRegion2D::from_triple(bound_triple(ch, pol)));
  }
  return union_hull(polys);
}

// --- support reduction --------------------------------------------------

namespace {

// Input joint reshaped to canonical (X, Y, Z, S, U) order plus the pieces
// of the factored form inferred from it.
struct Factored {
  int X, Y, Z, S, U;
  std::vector<double> q;     // weight of each auxiliary atom
  std::vector<double> atom;  // atom[u * XS + (x*S + s)] = P(x, s | u)
  std::vector<int> f;        // f[x*S + s]
  std::vector<double> w;     // w[(x*S + s)*Z + z]
};

JointDist reorder_canonical(const JointDist& d) {
  static const AxisName order[5] = {AxisName::X, AxisName::Y, AxisName::Z, AxisName::S,
                                    AxisName::U};
  if (d.rank() != 5) {
    throw std::invalid_argument("reduce_support: joint must carry axes X, Y, Z, S, U");
  }
  std::vector<Axis> axes;
  std::vector<int> perm;  // canonical position -> input axis index
  for (AxisName n : order) {
    int k = d.axis_index(n);
    if (k < 0) {
      throw std::invalid_argument(std::string("reduce_support: joint is missing axis ") +
                                  axis_label(n));
    }
    axes.push_back({n, d.axes()[k].size});
    perm.push_back(k);
  }
  std::vector<size_t> out_strides(5, 1);
  for (int k = 3; k >= 0; --k) {
    out_strides[k] = out_strides[k + 1] * static_cast<size_t>(axes[k + 1].size);
  }
  std::vector<double> out(d.mass().size(), 0.0);
  std::vector<int> idx(5, 0);
  const auto& in_axes = d.axes();
  for (size_t flat = 0; flat < d.mass().size(); ++flat) {
    size_t o = 0;
    for (int k = 0; k < 5; ++k) o += out_strides[k] * static_cast<size_t>(idx[perm[k]]);
    out[o] = d.mass()[flat];
    for (int k = 4; k >= 0; --k) {
      if (++idx[k] < in_axes[k].size) break;
      idx[k] = 0;
    }
  }
  return JointDist(std::move(axes), std::move(out));
}

Factored extract_factored(const JointDist& canonical) {
  Factored fc;
  fc.X = canonical.axes()[0].size;
  fc.Y = canonical.axes()[1].size;
  fc.Z = canonical.axes()[2].size;
  fc.S = canonical.axes()[3].size;
  fc.U = canonical.axes()[4].size;
  int XS = fc.X * fc.S;
  fc.q.assign(fc.U, 0.0);
  std::vector<double> pxs_u(static_cast<size_t>(fc.U) * XS, 0.0);
  std::vector<double> yacc(static_cast<size_t>(XS) * fc.Y, 0.0);
  std::vector<double> zacc(static_cast<size_t>(XS) * fc.Z, 0.0);
  std::vector<double> zu(static_cast<size_t>(XS) * fc.U * fc.Z, 0.0);

  const auto& m = canonical.mass();
  size_t flat = 0;
  for (int x = 0; x < fc.X; ++x) {
    for (int y = 0; y < fc.Y; ++y) {
      for (int z = 0; z < fc.Z; ++z) {
        for (int s = 0; s < fc.S; ++s) {
          int xs = x * fc.S + s;
          for (int u = 0; u < fc.U; ++u, ++flat) {
            double p = m[flat];
            if (p <= 0.0) continue;
            fc.q[u] += p;
            pxs_u[static_cast<size_t>(u) * XS + xs] += p;
            yacc[static_cast<size_t>(xs) * fc.Y + y] += p;
            zacc[static_cast<size_t>(xs) * fc.Z + z] += p;
            zu[(static_cast<size_t>(xs) * fc.U + u) * fc.Z + z] += p;
          }
        }
      }
    }
  }

  // infer f and check y is a function of (x, s)
  fc.f.assign(XS, 0);
  fc.w.assign(static_cast<size_t>(XS) * fc.Z, 0.0);
  for (int xs = 0; xs < XS; ++xs) {
    double tot = 0.0;
    int ybest = 0;
    for (int y = 0; y < fc.Y; ++y) {
      double v = yacc[static_cast<size_t>(xs) * fc.Y + y];
      tot += v;
      if (v > yacc[static_cast<size_t>(xs) * fc.Y + ybest]) ybest = y;
    }
    if (tot <= 0.0) {
      for (int z = 0; z < fc.Z; ++z) fc.w[static_cast<size_t>(xs) * fc.Z + z] = 1.0 / fc.Z;
      continue;
    }
    if (yacc[static_cast<size_t>(xs) * fc.Y + ybest] < (1.0 - 1e-9) * tot) {
      throw std::invalid_argument(
          "reduce_support: y is not a deterministic function of (x, s)");
    }
    fc.f[xs] = ybest;
    for (int z = 0; z < fc.Z; ++z) {
      fc.w[static_cast<size_t>(xs) * fc.Z + z] = zacc[static_cast<size_t>(xs) * fc.Z + z] / tot;
    }
    // z must be conditionally independent of u given (x, s)
    for (int u = 0; u < fc.U; ++u) {
      double mu = 0.0;
      for (int z = 0; z < fc.Z; ++z) mu += zu[(static_cast<size_t>(xs) * fc.U + u) * fc.Z + z];
      if (mu <= 0.0) continue;
      for (int z = 0; z < fc.Z; ++z) {
        double cond = zu[(static_cast<size_t>(xs) * fc.U + u) * fc.Z + z] / mu;
        if (std::abs(cond - fc.w[static_cast<size_t>(xs) * fc.Z + z]) > 1e-9) {
          throw std::invalid_argument(
              "reduce_support: z depends on the auxiliary beyond (x, s)");
        }
      }
    }
  }

  fc.atom.assign(static_cast<size_t>(fc.U) * XS, 0.0);
  for (int u = 0; u < fc.U; ++u) {
    if (fc.q[u] <= 0.0) continue;
    for (int xs = 0; xs < XS; ++xs) {
      fc.atom[static_cast<size_t>(u) * XS + xs] = pxs_u[static_cast<size_t>(u) * XS + xs] / fc.q[u];
    }
  }
  return fc;
}

// Moment map of an atom position: the first XS - 1 cells of P(x, s | u),
// then h0 = H(S|u) - H(Z|u) and h1 = H(Y,S|u) - H(Z|u). Together with
// normalization these pin the (X, S) marginal and the three bounds.
struct MomentMap {
  const Factored* fc;
  int XS, dim;  // dim = XS + 1 functionals
  mutable std::vector<double> ps, pz, pys;

  explicit MomentMap(const Factored& f)
      : fc(&f), XS(f.X * f.S), dim(f.X * f.S + 1), ps(f.S), pz(f.Z),
        pys(static_cast<size_t>(f.Y) * f.S) {}

  void operator()(const double* pos, double* out) const {
    for (int k = 0; k < XS - 1; ++k) out[k] = pos[k];
    std::fill(ps.begin(), ps.end(), 0.0);
    std::fill(pz.begin(), pz.end(), 0.0);
    std::fill(pys.begin(), pys.end(), 0.0);
    for (int x = 0; x < fc->X; ++x) {
      for (int s = 0; s < fc->S; ++s) {
        int xs = x * fc->S + s;
        double p = pos[xs];
        if (p <= 0.0) continue;
        ps[s] += p;
        pys[static_cast<size_t>(fc->f[xs]) * fc->S + s] += p;
        for (int z = 0; z < fc->Z; ++z) {
          pz[z] += p * fc->w[static_cast<size_t>(xs) * fc->Z + z];
        }
      }
    }
    double hz = ent(pz);
    out[XS - 1] = ent(ps) - hz;
    out[XS] = ent(pys) - hz;
  }
};

// One nonzero kernel vector of the rows x cols matrix `a` (rows < cols),
// via Gaussian elimination with partial pivoting.
std::vector<double> kernel_vector(std::vector<double> a, int rows, int cols) {
  std::vector<int> pivot_col(rows, -1);
  int rr = 0;
  for (int c = 0; c < cols && rr < rows; ++c) {
    int pr = rr;
    for (int r = rr + 1; r < rows; ++r) {
      if (std::abs(a[static_cast<size_t>(r) * cols + c]) >
          std::abs(a[static_cast<size_t>(pr) * cols + c])) {
        pr = r;
      }
    }
    if (std::abs(a[static_cast<size_t>(pr) * cols + c]) < 1e-13) continue;
    if (pr != rr) {
      for (int cc = 0; cc < cols; ++cc) {
        std::swap(a[static_cast<size_t>(pr) * cols + cc], a[static_cast<size_t>(rr) * cols + cc]);
      }
    }
    double piv = a[static_cast<size_t>(rr) * cols + c];
    for (int r = 0; r < rows; ++r) {
      if (r == rr) continue;
      double factor = a[static_cast<size_t>(r) * cols + c] / piv;
      if (factor == 0.0) continue;
      for (int cc = c; cc < cols; ++cc) {
        a[static_cast<size_t>(r) * cols + cc] -= factor * a[static_cast<size_t>(rr) * cols + cc];
      }
    }
    pivot_col[rr] = c;
    ++rr;
  }
  // first non-pivot column becomes the free variable
  std::vector<bool> is_pivot(cols, false);
  for (int r = 0; r < rr; ++r) is_pivot[pivot_col[r]] = true;
  int free_col = -1;
  for (int c = 0; c < cols; ++c) {
    if (!is_pivot[c]) {
      free_col = c;
      break;
    }
  }
  std::vector<double> k(cols, 0.0);
  if (free_col < 0) return k;  // caller treats all-zero as failure
  k[free_col] = 1.0;
  for (int r = rr - 1; r >= 0; --r) {
    int pc = pivot_col[r];
    double acc = a[static_cast<size_t>(r) * cols + free_col];
    for (int c = pc + 1; c < cols; ++c) {
      if (c != free_col && k[c] != 0.0) acc += a[static_cast<size_t>(r) * cols + c] * k[c];
    }
    k[pc] = -acc / a[static_cast<size_t>(r) * cols + pc];
  }
  double peak = 0.0;
  for (double v : k) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : k) v /= peak;
  }
  return k;
}

// Solves the square system a * x = b in place; returns false if a pivot is
// too small.
bool solve_square(std::vector<double> a, std::vector<double> b, int n, std::vector<double>& x) {
  for (int c = 0; c < n; ++c) {
    int pr = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(a[static_cast<size_t>(r) * n + c]) >
          std::abs(a[static_cast<size_t>(pr) * n + c])) {
        pr = r;
      }
    }
    if (std::abs(a[static_cast<size_t>(pr) * n + c]) < 1e-12) return false;
    if (pr != c) {
      for (int cc = 0; cc < n; ++cc) {
        std::swap(a[static_cast<size_t>(pr) * n + cc], a[static_cast<size_t>(c) * n + cc]);
      }
      std::swap(b[pr], b[c]);
    }
    double piv = a[static_cast<size_t>(c) * n + c];
    for (int r = c + 1; r < n; ++r) {
      double factor = a[static_cast<size_t>(r) * n + c] / piv;
      if (factor == 0.0) continue;
      for (int cc = c; cc < n; ++cc) {
        a[static_cast<size_t>(r) * n + cc] -= factor * a[static_cast<size_t>(c) * n + cc];
      }
      b[r] -= factor * b[c];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a[static_cast<size_t>(r) * n + c] * x[c];
    x[r] = acc / a[static_cast<size_t>(r) * n + r];
  }
  return true;
}

}  // namespace

JointDist reduce_support(const JointDist& joint) {
  JointDist canonical = reorder_canonical(joint);
  Factored fc = extract_factored(canonical);
  int XS = fc.X * fc.S;
  int cap = aux_bound(fc.X, fc.S);
  MomentMap phi(fc);
  int dim = phi.dim;  // XS + 1

  std::vector<int> support;
  for (int u = 0; u < fc.U; ++u) {
    if (fc.q[u] > 0.0) support.push_back(u);
  }

  // Coinciding atoms make every later linear system singular; merge them
  // up front (their weights simply add).
  auto merge_duplicates = [&]() {
    for (size_t i = 0; i < support.size(); ++i) {
      for (size_t j = i + 1; j < support.size();) {
        double gap = 0.0;
        const double* ai = fc.atom.data() + static_cast<size_t>(support[i]) * XS;
        const double* aj = fc.atom.data() + static_cast<size_t>(support[j]) * XS;
        for (int c = 0; c < XS; ++c) gap = std::max(gap, std::abs(ai[c] - aj[c]));
        if (gap <= 1e-12) {
          fc.q[support[i]] += fc.q[support[j]];
          fc.q[support[j]] = 0.0;
          support.erase(support.begin() + static_cast<long>(j));
        } else {
          ++j;
        }
      }
    }
  };
  merge_duplicates();

  // Moment target over the full original support, plus normalization.
  std::vector<double> target(dim + 1, 0.0);
  {
    std::vector<double> buf(dim);
    for (int u : support) {
      phi(fc.atom.data() + static_cast<size_t>(u) * XS, buf.data());
      for (int k = 0; k < dim; ++k) target[k] += fc.q[u] * buf[k];
    }
    target[dim] = 1.0;
  }

  auto col_of = [&](int u, std::vector<double>& buf) {
    phi(fc.atom.data() + static_cast<size_t>(u) * XS, buf.data());
  };

  // One exact reduction step: travel along a kernel direction of the
  // constraint matrix until a weight hits zero. All functionals are
  // preserved exactly. Returns false when the columns are independent and
  // no such direction exists.
  auto try_kernel_step = [&]() -> bool {
    int m = static_cast<int>(support.size());
    int rows = dim + 1;
    std::vector<double> a(static_cast<size_t>(rows) * m);
    std::vector<double> buf(dim);
    for (int j = 0; j < m; ++j) {
      col_of(support[j], buf);
      for (int k = 0; k < dim; ++k) a[static_cast<size_t>(k) * m + j] = buf[k];
      a[static_cast<size_t>(dim) * m + j] = 1.0;
    }
    std::vector<double> k = kernel_vector(std::move(a), rows, m);
    double peak = 0.0;
    for (double v : k) peak = std::max(peak, std::abs(v));
    if (peak <= 0.0) return false;
    double t_best = 1e300;
    bool any_pos = false;
    for (int j = 0; j < m; ++j) {
      if (k[j] > 1e-14) {
        any_pos = true;
        t_best = std::min(t_best, fc.q[support[j]] / k[j]);
      }
    }
    if (!any_pos) {
      for (double& v : k) v = -v;
      for (int j = 0; j < m; ++j) {
        if (k[j] > 1e-14) t_best = std::min(t_best, fc.q[support[j]] / k[j]);
      }
    }
    std::vector<int> next;
    for (int j = 0; j < m; ++j) {
      double nq = fc.q[support[j]] - t_best * k[j];
      if (nq < 1e-14) nq = 0.0;
      fc.q[support[j]] = nq;
      if (nq > 0.0) next.push_back(support[j]);
    }
    if (static_cast<int>(next.size()) == m) {
      throw std::runtime_error("reduce_support: kernel step removed no atom");
    }
    support = std::move(next);
    return true;
  };

  // Phase 1: with more atoms than constraints a kernel direction always
  // exists; step until the counts match.
  while (static_cast<int>(support.size()) > cap + 1) {
    if (!try_kernel_step()) {
      throw std::runtime_error("reduce_support: kernel search failed");
    }
  }

  // Degenerate channels (say, y a function of s alone) make some moment
  // rows coincide, so even cap + 1 columns can be dependent. Keep stepping
  // while that is the case; each step is still exact.
  while (support.size() > 1 && try_kernel_step()) {
  }

  // Phase 2: with exactly cap + 1 atoms, slide one atom toward another and
  // re-solve the square system for the weights; either a weight crosses
  // zero on the way (drop that atom) or the two endpoints merge.
  if (static_cast<int>(support.size()) == cap + 1) {
    int m = cap + 1;  // == dim + 1 rows
    int n = dim + 1;
    std::vector<double> buf(dim);

    auto build_solve = [&](int moving_slot, const std::vector<double>& moved_pos,
                           std::vector<double>& lambda) {
      std::vector<double> a(static_cast<size_t>(n) * m);
      for (int j = 0; j < m; ++j) {
        if (j == moving_slot) {
          phi(moved_pos.data(), buf.data());
        } else {
          col_of(support[j], buf);
        }
        for (int k = 0; k < dim; ++k) a[static_cast<size_t>(k) * m + j] = buf[k];
        a[static_cast<size_t>(dim) * m + j] = 1.0;
      }
      return solve_square(std::move(a), target, n, lambda);
    };

    // Try close pairs first: short paths merge cleanly and are far from the
    // singular configurations that long slides can pass through.
    std::vector<std::pair<double, std::pair<int, int>>> pair_order;
    for (int si = 0; si < m; ++si) {
      for (int sj = 0; sj < m; ++sj) {
        if (si == sj) continue;
        double gap = 0.0;
        const double* ai = fc.atom.data() + static_cast<size_t>(support[si]) * XS;
        const double* aj = fc.atom.data() + static_cast<size_t>(support[sj]) * XS;
        for (int c = 0; c < XS; ++c) gap = std::max(gap, std::abs(ai[c] - aj[c]));
        pair_order.push_back({gap, {si, sj}});
      }
    }
    std::stable_sort(pair_order.begin(), pair_order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    bool done = false;
    for (const auto& entry : pair_order) {
      if (done) break;
      {
        int si = entry.second.first;
        int sj = entry.second.second;
        const double* from = fc.atom.data() + static_cast<size_t>(support[si]) * XS;
        const double* to = fc.atom.data() + static_cast<size_t>(support[sj]) * XS;
        std::vector<double> pos(XS), lambda, good_lambda(m);
        for (int j = 0; j < m; ++j) good_lambda[j] = fc.q[support[j]];
        double t_good = 0.0;  // the untouched weights solve the system at t = 0
        constexpr int kSteps = 64;
        const double t_end = 1.0 - 0x1.0p-46;

        auto at_t = [&](double t) {
          for (int c = 0; c < XS; ++c) pos[c] = (1.0 - t) * from[c] + t * to[c];
        };

        for (int step = 1; step <= kSteps && !done; ++step) {
          double t = (step == kSteps) ? t_end : static_cast<double>(step) / kSteps;
          at_t(t);
          // isolated singular spots along the path are skipped; the
          // bisection below copes without them
          if (!build_solve(si, pos, lambda)) continue;
          double lo = *std::min_element(lambda.begin(), lambda.end());
          if (lo >= -1e-13) {
            t_good = t;
            good_lambda = lambda;
            if (step == kSteps) {
              // merge the moved atom into its destination
              for (int j = 0; j < m; ++j) {
                fc.q[support[j]] = std::max(0.0, good_lambda[j]);
              }
              fc.q[support[sj]] += fc.q[support[si]];
              fc.q[support[si]] = 0.0;
              done = true;
            }
            continue;
          }
          // a weight crossed zero in (t_good, t); bisect to the crossing
          double lo_t = t_good, hi_t = t;
          for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo_t + hi_t);
            at_t(mid);
            std::vector<double> lmid;
            if (!build_solve(si, pos, lmid)) {
              hi_t = mid;
              continue;
            }
            if (*std::min_element(lmid.begin(), lmid.end()) >= -1e-13) {
              lo_t = mid;
              good_lambda = lmid;
              t_good = mid;
            } else {
              hi_t = mid;
            }
          }
          at_t(t_good);
          int drop = static_cast<int>(std::min_element(good_lambda.begin(), good_lambda.end()) -
                                      good_lambda.begin());
          for (int j = 0; j < m; ++j) {
            fc.q[support[j]] = (j == drop) ? 0.0 : std::max(0.0, good_lambda[j]);
          }
          if (drop != si) {
            // the moved atom survives at its new position
            double* dst = fc.atom.data() + static_cast<size_t>(support[si]) * XS;
            for (int c = 0; c < XS; ++c) dst[c] = pos[c];
          }
          done = true;
        }
      }
    }
    if (!done) {
      throw std::runtime_error("reduce_support: path reduction failed");
    }
    std::vector<int> next;
    for (int u : support) {
      if (fc.q[u] > 0.0) next.push_back(u);
    }
    support = std::move(next);
  }

  // Rebuild the factored joint over the compacted auxiliary alphabet.
  int U2 = static_cast<int>(support.size());
  double total = 0.0;
  for (int u : support) total += fc.q[u];
  std::vector<double> m2(static_cast<size_t>(fc.X) * fc.Y * fc.Z * fc.S * U2, 0.0);
  for (int j = 0; j < U2; ++j) {
    int u = support[j];
    double qn = fc.q[u] / total;
    for (int x = 0; x < fc.X; ++x) {
      for (int s = 0; s < fc.S; ++s) {
        int xs = x * fc.S + s;
        double p = qn * fc.atom[static_cast<size_t>(u) * XS + xs];
        if (p <= 0.0) continue;
        int y = fc.f[xs];
        for (int z = 0; z < fc.Z; ++z) {
          size_t idx = (((static_cast<size_t>(x) * fc.Y + y) * fc.Z + z) * fc.S + s) *
                           static_cast<size_t>(U2) +
                       j;
          m2[idx] = p * fc.w[static_cast<size_t>(xs) * fc.Z + z];
        }
      }
    }
  }
  JointDist out({{AxisName::X, fc.X},
                 {AxisName::Y, fc.Y},
                 {AxisName::Z, fc.Z},
                 {AxisName::S, fc.S},
                 {AxisName::U, U2}},
                std::move(m2));

  // The reduction must preserve the three bound functionals.
  BoundTriple before = triple_from_joint(canonical);
  BoundTriple after = triple_from_joint(out);
  double drift = std::max({std::abs(before.a - after.a), std::abs(before.b - after.b),
                           std::abs(before.c - after.c)});
  if (drift > 1e-9) {
    throw std::runtime_error("reduce_support: functional drift " + std::to_string(drift));
  }
  return out;
}

AuxPolicy policy_from_joint(const JointDist& joint) {
  JointDist canonical = reorder_canonical(joint);
  int X = canonical.axes()[0].size;
  int S = canonical.axes()[3].size;
  int U = canonical.axes()[4].size;
  JointDist xsu = canonical.marginalize({AxisName::X, AxisName::S, AxisName::U});
  // axes keep canonical relative order (X, S, U)
  std::vector<double> rows(static_cast<size_t>(S) * X * U, 0.0);
  std::vector<double> psum(S, 0.0);
  const auto& m = xsu.mass();
  size_t flat = 0;
  for (int x = 0; x < X; ++x) {
    for (int s = 0; s < S; ++s) {
      for (int u = 0; u < U; ++u, ++flat) {
        rows[(static_cast<size_t>(s) * X + x) * U + u] = m[flat];
        psum[s] += m[flat];
      }
    }
  }
  for (int s = 0; s < S; ++s) {
    double* row = rows.data() + static_cast<size_t>(s) * X * U;
    if (psum[s] <= 0.0) {
      for (int k = 0; k < X * U; ++k) row[k] = 1.0 / (X * U);
    } else {
      for (int k = 0; k < X * U; ++k) row[k] /= psum[s];
    }
  }
  AuxPolicy pol;
  pol.u_size = U;
  pol.p_xu_given_s = CondKernel(S, X * U, std::move(rows));
  return pol;
}

}  // namespace sdbc
