#include "sdbc/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "sdbc/rng.hpp"

namespace sdbc {

void run_indexed(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

void softmax(std::span<const double> logits, std::span<double> probs) {
  double peak = logits[0];
  for (double v : logits) peak = std::max(peak, v);
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - peak);
    total += probs[i];
  }
  for (size_t i = 0; i < probs.size(); ++i) probs[i] /= total;
}

double coordinate_ascent(std::vector<double>& theta,
                         const std::function<double(const std::vector<double>&)>& objective,
                         int passes, double tolerance) {
  constexpr double kThetaCap = 30.0;  // softmax saturates well before this
  double best = objective(theta);
  double step = 1.5;
  int n = static_cast<int>(theta.size());

  auto try_move = [&](int i, double d) {
    double old = theta[i];
    theta[i] = std::clamp(old + d, -kThetaCap, kThetaCap);
    if (theta[i] == old) return false;
    double v = objective(theta);
    if (v > best) {
      best = v;
      return true;
    }
    theta[i] = old;
    return false;
  };

  for (int pass = 0; pass < passes; ++pass) {
    double at_start = best;
    bool moved = false;
    for (int i = 0; i < n; ++i) {
      for (double dir : {step, -step}) {
        if (try_move(i, dir)) {
          moved = true;
          for (int rep = 0; rep < 8 && try_move(i, dir); ++rep) {
          }
          break;
        }
      }
    }
    if (!moved) {
      step *= 0.5;
      if (step < 1e-3) break;
    } else {
      step = std::max(step * 0.9, 1e-3);
      if (best - at_start < tolerance && step <= 1e-3) break;
    }
  }
  return best;
}

double triple_support(double a, double b, double c, double wy, double wz) {
  if (c <= 0.0 || a < 0.0) return 0.0;
  double bb = std::max(b, 0.0);
  double ry_max = std::min(a, c);
  double rz_max = std::min(bb, c);
  double best = 0.0;
  best = std::max(best, wy * ry_max + wz * std::clamp(c - ry_max, 0.0, rz_max));
  best = std::max(best, wy * std::clamp(c - rz_max, 0.0, ry_max) + wz * rz_max);
  best = std::max(best, wy * ry_max);
  best = std::max(best, wz * rz_max);
  return best;
}

AuxPolicy policy_from_theta(int x_size, int s_size, int u_size,
                            const std::vector<double>& theta) {
  int per_state = x_size * u_size;
  std::vector<double> rows(static_cast<size_t>(s_size) * per_state);
  for (int s = 0; s < s_size; ++s) {
    std::span<const double> in(theta.data() + static_cast<size_t>(s) * per_state,
                               static_cast<size_t>(per_state));
    std::span<double> out(rows.data() + static_cast<size_t>(s) * per_state,
                          static_cast<size_t>(per_state));
    softmax(in, out);
  }
  AuxPolicy pol;
  pol.u_size = u_size;
  pol.p_xu_given_s = CondKernel(s_size, per_state, std::move(rows));
  return pol;
}

ConvexRegion2D sweep_policy_hull(
    int x_size, int s_size, int u_size, const SearchConfig& cfg,
    const std::function<std::function<BoundTriple(const double*)>()>& make_eval,
    const std::function<BoundTriple(const AuxPolicy&)>& refine) {
  int X = x_size, S = s_size, U = u_size;
  int D = std::max(1, cfg.weight_sweep_count);
  int R = std::max(0, cfg.random_restarts) + 1;  // restart 0 is the uniform start

  std::vector<std::pair<double, double>> dirs(D);
  for (int d = 0; d < D; ++d) {
    double phi = (D == 1) ? std::numbers::pi / 4
                          : d * (std::numbers::pi / 2) / (D - 1);
    dirs[d] = {std::max(0.0, std::cos(phi)), std::max(0.0, std::sin(phi))};
  }

  int ntheta = S * X * U;
  struct Slot {
    double value = -1e300;
    std::vector<double> theta;
  };
  std::vector<Slot> results(static_cast<size_t>(D) * R);

  auto task = [&](int i) {
    int d = i / R;
    int r = i % R;
    auto [wy, wz] = dirs[d];
    Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(d),
                          static_cast<std::uint64_t>(r));
    std::function<BoundTriple(const double*)> eval = make_eval();

    std::vector<double> theta(ntheta, 0.0);
    if (r > 0) {
      switch (r % 3) {
        case 1:
          for (double& t : theta) t = rng.range(-3.0, 3.0);
          break;
        case 2:
          // couple u to x, with a random tilt on the input marginal
          for (int s = 0; s < S; ++s) {
            for (int x = 0; x < X; ++x) {
              double tilt = rng.range(-2.0, 2.0);
              for (int u = 0; u < U; ++u) {
                theta[(static_cast<size_t>(s) * X + x) * U + u] =
                    tilt + (u == x ? 4.0 : -4.0);
              }
            }
          }
          break;
        default: {
          // product structure: independent input and auxiliary scores
          std::vector<double> ax(static_cast<size_t>(S) * X), bu(U);
          for (double& v : ax) v = rng.range(-2.0, 2.0);
          for (double& v : bu) v = rng.range(-2.0, 2.0);
          for (int s = 0; s < S; ++s) {
            for (int x = 0; x < X; ++x) {
              for (int u = 0; u < U; ++u) {
                theta[(static_cast<size_t>(s) * X + x) * U + u] =
                    ax[static_cast<size_t>(s) * X + x] + bu[u];
              }
            }
          }
        }
      }
    }

    std::vector<double> probs(static_cast<size_t>(ntheta));
    auto objective = [&](const std::vector<double>& th) {
      for (int s = 0; s < S; ++s) {
        std::span<const double> in(th.data() + static_cast<size_t>(s) * X * U,
                                   static_cast<size_t>(X) * U);
        std::span<double> out(probs.data() + static_cast<size_t>(s) * X * U,
                              static_cast<size_t>(X) * U);
        softmax(in, out);
      }
      BoundTriple t = eval(probs.data());
      return triple_support(t.a, t.b, t.c, wy, wz);
    };

    Slot res;
    res.value = coordinate_ascent(theta, objective, cfg.local_steps, cfg.tolerance);
    res.theta = std::move(theta);
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
    const Slot& win = results[static_cast<size_t>(d) * R + best_r];
    AuxPolicy pol = policy_from_theta(X, S, U, win.theta);
    polys.push_back(ConvexRegion2D::from_triple(refine(pol)));
  }
  return union_hull(polys);
}

}  // namespace sdbc
