#include "sdbc/prob.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace sdbc {

namespace {

constexpr double kNormTol = 1e-12;

void check_mass_entry(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + ": entries must be finite and nonnegative");
  }
}

}  // namespace

const char* axis_label(AxisName n) {
  switch (n) {
    case AxisName::X: return "X";
    case AxisName::Y: return "Y";
    case AxisName::Z: return "Z";
    case AxisName::S: return "S";
    case AxisName::U: return "U";
  }
  return "?";
}

ProbVec::ProbVec(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw std::invalid_argument("ProbVec: empty");
  double sum = 0.0;
  for (double v : p_) {
    check_mass_entry(v, "ProbVec");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormTol) {
    throw std::invalid_argument("ProbVec: mass sums to " + std::to_string(sum));
  }
}

CondKernel::CondKernel(int rows, int cols, std::vector<double> p)
    : rows_(rows), cols_(cols), p_(std::move(p)) {
  if (rows_ <= 0 || cols_ <= 0) throw std::invalid_argument("CondKernel: empty shape");
  if (p_.size() != static_cast<size_t>(rows_) * cols_) {
    throw std::invalid_argument("CondKernel: size mismatch");
  }
  for (int r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (int c = 0; c < cols_; ++c) {
      double v = at(r, c);
      check_mass_entry(v, "CondKernel");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kNormTol) {
      throw std::invalid_argument("CondKernel: row " + std::to_string(r) + " sums to " +
                                  std::to_string(sum));
    }
  }
}

JointDist::JointDist(std::vector<Axis> axes, std::vector<double> mass)
    : axes_(std::move(axes)), mass_(std::move(mass)) {
  if (axes_.empty()) throw std::invalid_argument("JointDist: no axes");
  size_t total = 1;
  unsigned seen = 0;
  for (const Axis& a : axes_) {
    if (a.size <= 0) throw std::invalid_argument("JointDist: axis size must be positive");
    unsigned b = 1u << static_cast<unsigned>(a.name);
    if (seen & b) throw std::invalid_argument("JointDist: duplicate axis");
    seen |= b;
    total *= static_cast<size_t>(a.size);
  }
  if (mass_.size() != total) throw std::invalid_argument("JointDist: mass size mismatch");
  double sum = 0.0;
  for (double v : mass_) {
    check_mass_entry(v, "JointDist");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormTol) {
    throw std::invalid_argument("JointDist: mass sums to " + std::to_string(sum));
  }
  strides_.assign(axes_.size(), 1);
  for (int k = rank() - 2; k >= 0; --k) {
    strides_[k] = strides_[k + 1] * static_cast<size_t>(axes_[k + 1].size);
  }
}

int JointDist::axis_index(AxisName n) const {
  for (int k = 0; k < rank(); ++k) {
    if (axes_[k].name == n) return k;
  }
  return -1;
}

int JointDist::axis_size(AxisName n) const {
  int k = axis_index(n);
  if (k < 0) throw std::invalid_argument(std::string("JointDist: missing axis ") + axis_label(n));
  return axes_[k].size;
}

AxisSet JointDist::axis_set() const {
  AxisSet s;
  for (const Axis& a : axes_) s = s | AxisSet::single(a.name);
  return s;
}

double JointDist::at(std::span<const int> idx) const {
  if (idx.size() != axes_.size()) throw std::invalid_argument("JointDist::at: rank mismatch");
  size_t flat = 0;
  for (int k = 0; k < rank(); ++k) {
    if (idx[k] < 0 || idx[k] >= axes_[k].size) {
      throw std::out_of_range("JointDist::at: index out of range");
    }
    flat += strides_[k] * static_cast<size_t>(idx[k]);
  }
  return mass_[flat];
}

JointDist JointDist::marginalize(AxisSet keep) const {
  if (!keep.subset_of(axis_set())) {
    throw std::invalid_argument("marginalize: kept axis not present");
  }
  std::vector<Axis> out_axes;
  std::vector<int> kept_pos;
  for (int k = 0; k < rank(); ++k) {
    if (keep.contains(axes_[k].name)) {
      out_axes.push_back(axes_[k]);
      kept_pos.push_back(k);
    }
  }
  if (out_axes.empty()) throw std::invalid_argument("marginalize: empty result");

  std::vector<size_t> out_strides(out_axes.size(), 1);
  for (int k = static_cast<int>(out_axes.size()) - 2; k >= 0; --k) {
    out_strides[k] = out_strides[k + 1] * static_cast<size_t>(out_axes[k + 1].size);
  }
  size_t out_total = out_strides[0] * static_cast<size_t>(out_axes[0].size);
  std::vector<double> out(out_total, 0.0);

  std::vector<int> idx(axes_.size(), 0);
  for (size_t flat = 0; flat < mass_.size(); ++flat) {
    size_t o = 0;
    for (size_t j = 0; j < kept_pos.size(); ++j) {
      o += out_strides[j] * static_cast<size_t>(idx[kept_pos[j]]);
    }
    out[o] += mass_[flat];
    for (int k = rank() - 1; k >= 0; --k) {
      if (++idx[k] < axes_[k].size) break;
      idx[k] = 0;
    }
  }
  return JointDist(std::move(out_axes), std::move(out));
}

ProbVec JointDist::marginal_vec(AxisName n) const {
  JointDist m = marginalize(AxisSet::single(n));
  return ProbVec(m.mass());
}

double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("binary_entropy: q outside [0,1]");
  double h = 0.0;
  if (q > 0.0) h -= q * std::log2(q);
  if (q < 1.0) h -= (1.0 - q) * std::log2(1.0 - q);
  return h;
}

double entropy(const JointDist& d, AxisSet targets) {
  if (targets.empty()) throw std::invalid_argument("entropy: empty target set");
  JointDist m = d.marginalize(targets);
  double h = 0.0;
  for (double p : m.mass()) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double conditional_entropy(const JointDist& d, AxisSet targets, AxisSet given) {
  if (!targets.disjoint(given)) {
    throw std::invalid_argument("conditional_entropy: overlapping axis sets");
  }
  if (given.empty()) return entropy(d, targets);
  double h = entropy(d, targets | given) - entropy(d, given);
  return h < 0.0 ? 0.0 : h;
}

double mutual_info(const JointDist& d, AxisSet a, AxisSet b) {
  if (!a.disjoint(b)) throw std::invalid_argument("mutual_info: overlapping axis sets");
  return entropy(d, a) + entropy(d, b) - entropy(d, a | b);
}

double conditional_mutual_info(const JointDist& d, AxisSet a, AxisSet b, AxisSet c) {
  if (!a.disjoint(b) || !a.disjoint(c) || !b.disjoint(c)) {
    throw std::invalid_argument("conditional_mutual_info: overlapping axis sets");
  }
  if (c.empty()) return mutual_info(d, a, b);
  return entropy(d, a | c) + entropy(d, b | c) - entropy(d, a | b | c) - entropy(d, c);
}

}  // namespace sdbc
