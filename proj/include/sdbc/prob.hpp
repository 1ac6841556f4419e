#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sdbc {

/// Random-variable labels used throughout: channel input X, legitimate
/// output Y, eavesdropper-side output Z, channel state S, auxiliary U.
enum class AxisName : unsigned char { X = 0, Y, Z, S, U };

constexpr int kAxisCount = 5;

const char* axis_label(AxisName n);

/// Small set of axis labels, used to select the arguments of entropies and
/// marginalizations.
class AxisSet {
 public:
  AxisSet() = default;
  AxisSet(std::initializer_list<AxisName> names) {
    for (AxisName n : names) bits_ |= bit(n);
  }
  static AxisSet single(AxisName n) { return AxisSet{n}; }

  AxisSet operator|(AxisSet o) const { return AxisSet(bits_ | o.bits_); }
  AxisSet operator&(AxisSet o) const { return AxisSet(bits_ & o.bits_); }
  bool operator==(const AxisSet&) const = default;

  bool contains(AxisName n) const { return (bits_ & bit(n)) != 0; }
  bool empty() const { return bits_ == 0; }
  bool disjoint(AxisSet o) const { return (bits_ & o.bits_) == 0; }
  bool subset_of(AxisSet o) const { return (bits_ & ~o.bits_) == 0; }
  unsigned bits() const { return bits_; }

 private:
  explicit AxisSet(unsigned b) : bits_(b) {}
  static unsigned bit(AxisName n) { return 1u << static_cast<unsigned>(n); }
  unsigned bits_ = 0;
};

struct Axis {
  AxisName name;
  int size;
};

/// Probability vector over a finite alphabet.
class ProbVec {
 public:
  ProbVec() = default;
  explicit ProbVec(std::vector<double> p);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[i]; }
  const std::vector<double>& values() const { return p_; }

 private:
  std::vector<double> p_;
};

/// Row-stochastic kernel: `rows` conditioning cells, each a distribution
/// over `cols` outcomes, stored row-major.
class CondKernel {
 public:
  CondKernel() = default;
  CondKernel(int rows, int cols, std::vector<double> p);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double at(int r, int c) const { return p_[static_cast<size_t>(r) * cols_ + c]; }
  std::span<const double> row(int r) const {
    return {p_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
  }
  const std::vector<double>& values() const { return p_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> p_;
};

/// Dense joint distribution over a list of named axes. Mass is stored
/// row-major in axis order; the first axis varies slowest.
class JointDist {
 public:
  JointDist(std::vector<Axis> axes, std::vector<double> mass);

  int rank() const { return static_cast<int>(axes_.size()); }
  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<double>& mass() const { return mass_; }

  /// Index of the axis with the given name, or -1 if absent.
  int axis_index(AxisName n) const;
  bool has_axis(AxisName n) const { return axis_index(n) >= 0; }
  int axis_size(AxisName n) const;
  AxisSet axis_set() const;

  /// Stride of axis `k` in the flat mass array.
  size_t stride(int k) const { return strides_[k]; }

  double at(std::span<const int> idx) const;

  /// Sum out every axis not in `keep`; kept axes stay in their current
  /// relative order. Total mass is preserved up to summation order.
  JointDist marginalize(AxisSet keep) const;

  /// Single-axis marginal as a plain probability vector.
  ProbVec marginal_vec(AxisName n) const;

 private:
  std::vector<Axis> axes_;
  std::vector<size_t> strides_;
  std::vector<double> mass_;
};

/// Binary entropy in bits; q must lie in [0, 1]. H(0) = H(1) = 0.
double binary_entropy(double q);

/// Shannon entropy in bits of the marginal over `targets`. The convention
/// 0 log 0 = 0 applies everywhere.
double entropy(const JointDist& d, AxisSet targets);

/// H(targets | given) = H(targets, given) - H(given); requires the two sets
/// disjoint. Tiny negative rounding residue is clamped to zero.
double conditional_entropy(const JointDist& d, AxisSet targets, AxisSet given);

/// I(a; b). May return values as low as -1e-10 due to rounding; never
/// meaningfully negative.
double mutual_info(const JointDist& d, AxisSet a, AxisSet b);

/// I(a; b | c).
double conditional_mutual_info(const JointDist& d, AxisSet a, AxisSet b, AxisSet c);

}  // namespace sdbc
