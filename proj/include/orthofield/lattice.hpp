#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace orthofield {

inline constexpr int kMaxDim = 3;

/// A point of the integer lattice Z^d, d in {1,2,3}.
///
/// The partial order used throughout is coordinate-wise: u <= v iff
/// u[i] <= v[i] for every axis. Lexicographic order is provided separately
/// for use as a container key and has no probabilistic meaning.
class MultiIndex {
 public:
  MultiIndex() : dim_(0) { coords_.fill(0); }

  explicit MultiIndex(int dim, int fill = 0) : dim_(dim) {
    check_dim(dim);
    coords_.fill(0);
    for (int i = 0; i < dim_; ++i) coords_[i] = fill;
  }

  MultiIndex(std::initializer_list<int> cs) : dim_(static_cast<int>(cs.size())) {
    check_dim(dim_);
    coords_.fill(0);
    int i = 0;
    for (int c : cs) coords_[i++] = c;
  }

  static MultiIndex zero(int dim) { return MultiIndex(dim, 0); }
  static MultiIndex ones(int dim) { return MultiIndex(dim, 1); }

  int dim() const { return dim_; }
  int operator[](int axis) const { return coords_[axis]; }
  int& operator[](int axis) { return coords_[axis]; }

  bool operator==(const MultiIndex& o) const {
    return dim_ == o.dim_ && coords_ == o.coords_;
  }
  bool operator!=(const MultiIndex& o) const { return !(*this == o); }

  /// Lexicographic order, for std::map keys only.
  bool operator<(const MultiIndex& o) const {
    if (dim_ != o.dim_) return dim_ < o.dim_;
    for (int i = 0; i < dim_; ++i)
      if (coords_[i] != o.coords_[i]) return coords_[i] < o.coords_[i];
    return false;
  }

  /// Coordinate-wise u <= v.
  bool leq(const MultiIndex& v) const {
    for (int i = 0; i < dim_; ++i)
      if (coords_[i] > v.coords_[i]) return false;
    return true;
  }
  bool geq(const MultiIndex& v) const { return v.leq(*this); }

  bool all_nonpositive() const {
    for (int i = 0; i < dim_; ++i)
      if (coords_[i] > 0) return false;
    return true;
  }
  bool all_nonnegative() const {
    for (int i = 0; i < dim_; ++i)
      if (coords_[i] < 0) return false;
    return true;
  }
  bool all_positive() const {
    for (int i = 0; i < dim_; ++i)
      if (coords_[i] < 1) return false;
    return true;
  }

  MultiIndex operator+(const MultiIndex& o) const {
    MultiIndex r(dim_);
    for (int i = 0; i < dim_; ++i) r.coords_[i] = coords_[i] + o.coords_[i];
    return r;
  }
  MultiIndex operator-(const MultiIndex& o) const {
    MultiIndex r(dim_);
    for (int i = 0; i < dim_; ++i) r.coords_[i] = coords_[i] - o.coords_[i];
    return r;
  }

  friend MultiIndex coordinate_min(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r(a.dim_);
    for (int i = 0; i < a.dim_; ++i)
      r.coords_[i] = a.coords_[i] < b.coords_[i] ? a.coords_[i] : b.coords_[i];
    return r;
  }
  friend MultiIndex coordinate_max(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r(a.dim_);
    for (int i = 0; i < a.dim_; ++i)
      r.coords_[i] = a.coords_[i] > b.coords_[i] ? a.coords_[i] : b.coords_[i];
    return r;
  }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < dim_; ++i) {
      if (i) s += ",";
      s += std::to_string(coords_[i]);
    }
    return s + ")";
  }

 private:
  static void check_dim(int d) {
    if (d < 1 || d > kMaxDim)
      throw std::invalid_argument("MultiIndex: dimension must be 1..3, got " +
                                  std::to_string(d));
  }

  std::array<int, kMaxDim> coords_;
  int dim_;
};

/// The rectangle {1..n_1} x ... x {1..n_d}. All coordinates of the upper
/// corner must be >= 1, so the volume is positive.
class Window {
 public:
  explicit Window(MultiIndex upper) : upper_(upper) {
    if (!upper_.all_positive())
      throw std::invalid_argument("Window: all coordinates must be >= 1, got " +
                                  upper.str());
  }

  Window(std::initializer_list<int> cs) : Window(MultiIndex(cs)) {}

  int dim() const { return upper_.dim(); }
  const MultiIndex& upper() const { return upper_; }
  int extent(int axis) const { return upper_[axis]; }

  std::int64_t volume() const {
    std::int64_t v = 1;
    for (int i = 0; i < dim(); ++i) v *= upper_[i];
    return v;
  }

  bool contains(const MultiIndex& u) const {
    if (u.dim() != dim()) return false;
    return u.all_positive() && u.leq(upper_);
  }

  /// Visits every lattice point of the window in row-major order
  /// (last axis fastest).
  template <typename Fn>
  void for_each(Fn&& fn) const {
    MultiIndex u = MultiIndex::ones(dim());
    for (;;) {
      fn(static_cast<const MultiIndex&>(u));
      int axis = dim() - 1;
      while (axis >= 0) {
        if (++u[axis] <= upper_[axis]) break;
        u[axis] = 1;
        --axis;
      }
      if (axis < 0) return;
    }
  }

 private:
  MultiIndex upper_;
};

/// Iterates the box [lo, hi] coordinate-wise, row-major. Empty if some
/// lo[i] > hi[i].
template <typename Fn>
void for_each_in_box(const MultiIndex& lo, const MultiIndex& hi, Fn&& fn) {
  const int d = lo.dim();
  for (int i = 0; i < d; ++i)
    if (lo[i] > hi[i]) return;
  MultiIndex u = lo;
  for (;;) {
    fn(static_cast<const MultiIndex&>(u));
    int axis = d - 1;
    while (axis >= 0) {
      if (++u[axis] <= hi[axis]) break;
      u[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) return;
  }
}

}  // namespace orthofield
