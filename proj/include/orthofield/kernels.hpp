#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "orthofield/lattice.hpp"

namespace orthofield {

struct KernelInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class KernelKind { Table, Geometric, PolyLog };

inline const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::Table: return "table";
    case KernelKind::Geometric: return "geometric";
    case KernelKind::PolyLog: return "poly_log";
  }
  return "?";
}

namespace series_detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// f(j) = (j+1)^{-alpha} log^{-beta}(j+2), j >= 0: the axis factor family
/// covering 1/u kernels and slowly varying log corrections.
inline double polylog_factor(double j, double alpha, double beta) {
  return std::pow(j + 1.0, -alpha) * std::pow(std::log(j + 2.0), -beta);
}

inline bool polylog_summable(double alpha, double beta) {
  return alpha > 1.0 || (alpha == 1.0 && beta > 1.0);
}

/// Certified upper bound on sum_{j >= j0} (j+1)^{-alpha} log^{-beta}(j+2),
/// by integral comparison with the decreasing integrand. Infinite when the
/// series diverges.
inline double polylog_tail_upper(double alpha, double beta, long j0) {
  if (!polylog_summable(alpha, beta)) return kInf;
  if (j0 < 1) return polylog_factor(0.0, alpha, beta) + polylog_tail_upper(alpha, beta, 1);
  const double x0 = static_cast<double>(j0);
  const double head = polylog_factor(x0, alpha, beta);
  double integral;
  if (alpha > 1.0)
    integral = std::pow(std::log(x0 + 2.0), -beta) * std::pow(x0 + 1.0, 1.0 - alpha) /
               (alpha - 1.0);
  else  // alpha == 1, beta > 1
    integral = std::pow(std::log(x0 + 1.0), 1.0 - beta) / (beta - 1.0);
  return head + integral;
}

/// Certified lower bound on the partial sum_{j=j0}^{H} of the same factor,
/// via sum_{j=a}^{b} g(j) >= int_a^{b+1} g(x) dx for decreasing g. Grows
/// without bound in H exactly when the series diverges.
inline double polylog_partial_lower(double alpha, double beta, long j0, long horizon) {
  const double a = static_cast<double>(j0), b = static_cast<double>(horizon) + 1.0;
  if (b <= a) return 0.0;
  // int (x+1)^{-alpha} log^{-beta}(x+2) >= int (x+2)^{-alpha} log^{-beta}(x+2)
  auto antiderivative_bound = [&](double lo, double hi) {
    // substitute u = log(x+2); integrand becomes e^{(1-alpha) u} u^{-beta}
    const int steps = 512;
    double sum = 0.0;
    const double ulo = std::log(lo + 2.0), uhi = std::log(hi + 2.0);
    const double du = (uhi - ulo) / steps;
    for (int i = 0; i < steps; ++i) {
      const double u = ulo + (i + 0.5) * du;
      sum += std::exp((1.0 - alpha) * u) * std::pow(u, -beta) * du;
    }
    return sum;
  };
  return antiderivative_bound(a, b);
}

}  // namespace series_detail

/// Coefficient family a_j, j >= 0 coordinate-wise, for linear fields.
///
///   Table:     finite explicit map, arbitrary signs.
///   Geometric: amplitude * prod_i rho_i^{j_i}, rho_i in (0,1).
///   PolyLog:   amplitude * prod_i (j_i+1)^{-p_i} log^{-L_i}(j_i+2);
///              the log powers are the supported slowly varying factors.
///
/// Square summability is certified at construction.
class CoefficientKernel {
 public:
  static CoefficientKernel table(int dim, std::map<MultiIndex, double> entries) {
    CoefficientKernel k;
    k.kind_ = KernelKind::Table;
    k.dim_ = dim;
    for (const auto& [j, c] : entries) {
      if (j.dim() != dim) throw KernelInvalid("table kernel: index dimension mismatch");
      if (!j.all_nonnegative())
        throw KernelInvalid("table kernel: support must satisfy j >= 0, got " + j.str());
    }
    k.table_ = std::move(entries);
    return k;
  }

  static CoefficientKernel geometric(std::vector<double> rho, double amplitude = 1.0) {
    CoefficientKernel k;
    k.kind_ = KernelKind::Geometric;
    k.dim_ = static_cast<int>(rho.size());
    for (double r : rho)
      if (!(r > 0.0 && r < 1.0))
        throw KernelInvalid("geometric kernel: rate must lie in (0,1), got " + std::to_string(r));
    k.rho_ = std::move(rho);
    k.amplitude_ = amplitude;
    return k;
  }

  static CoefficientKernel poly_log(std::vector<double> power, std::vector<double> log_power,
                                    double amplitude = 1.0) {
    CoefficientKernel k;
    k.kind_ = KernelKind::PolyLog;
    k.dim_ = static_cast<int>(power.size());
    if (log_power.size() != power.size())
      throw KernelInvalid("poly_log kernel: exponent lists must have equal length");
    for (std::size_t i = 0; i < power.size(); ++i) {
      if (power[i] < 0.0 || log_power[i] < 0.0)
        throw KernelInvalid("poly_log kernel: exponents must be nonnegative");
      if (!series_detail::polylog_summable(2.0 * power[i], 2.0 * log_power[i]))
        throw KernelInvalid("poly_log kernel: axis " + std::to_string(i) +
                            " has non-square-summable coefficients");
    }
    k.power_ = std::move(power);
    k.log_power_ = log_power;
    k.amplitude_ = amplitude;
    return k;
  }

  KernelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double amplitude() const { return amplitude_; }
  const std::map<MultiIndex, double>& table_entries() const { return table_; }
  double rho(int axis) const { return rho_[axis]; }
  double power(int axis) const { return power_[axis]; }
  double log_power(int axis) const { return log_power_[axis]; }

  /// a_j; zero outside the support {j >= 0}.
  double coefficient(const MultiIndex& j) const {
    if (!j.all_nonnegative()) return 0.0;
    switch (kind_) {
      case KernelKind::Table: {
        auto it = table_.find(j);
        return it == table_.end() ? 0.0 : it->second;
      }
      case KernelKind::Geometric: {
        double c = amplitude_;
        for (int i = 0; i < dim_; ++i) c *= std::pow(rho_[i], j[i]);
        return c;
      }
      case KernelKind::PolyLog: {
        double c = amplitude_;
        for (int i = 0; i < dim_; ++i)
          c *= series_detail::polylog_factor(j[i], power_[i], log_power_[i]);
        return c;
      }
    }
    return 0.0;
  }

  /// Smallest box [0, b] containing the support, or radius for the infinite
  /// families (their mass outside any box is certified separately).
  MultiIndex support_bound_within(int radius) const {
    if (kind_ == KernelKind::Table) {
      MultiIndex b = MultiIndex::zero(dim_);
      for (const auto& [j, c] : table_) b = coordinate_max(b, j);
      MultiIndex r(dim_, radius);
      return coordinate_min(b, r);
    }
    return MultiIndex(dim_, radius);
  }

  /// Axis factor without the amplitude (Geometric/PolyLog only).
  double axis_factor(int axis, long j) const {
    if (kind_ == KernelKind::Geometric) return std::pow(rho_[axis], static_cast<double>(j));
    return series_detail::polylog_factor(static_cast<double>(j), power_[axis], log_power_[axis]);
  }

  /// sum_{j=0}^{r} axis_factor^power, exact accumulation (power 1 or 2).
  double axis_partial(int axis, long r, int factor_power) const {
    if (kind_ == KernelKind::Geometric) {
      const double rr = std::pow(rho_[axis], factor_power);
      return (1.0 - std::pow(rr, static_cast<double>(r) + 1.0)) / (1.0 - rr);
    }
    double s = 0.0;
    for (long j = r; j >= 0; --j) s += std::pow(axis_factor(axis, j), factor_power);
    return s;
  }

  /// Certified upper bound on sum_{j >= j0} axis_factor^power; infinity when
  /// the axis series diverges.
  double axis_tail_upper(int axis, long j0, int factor_power) const {
    if (kind_ == KernelKind::Geometric) {
      const double rr = std::pow(rho_[axis], factor_power);
      return std::pow(rr, static_cast<double>(j0)) / (1.0 - rr);
    }
    return series_detail::polylog_tail_upper(factor_power * power_[axis],
                                             factor_power * log_power_[axis], j0);
  }

  bool axis_summable(int axis, int factor_power) const {
    if (kind_ == KernelKind::Geometric) return true;
    return series_detail::polylog_summable(factor_power * power_[axis],
                                           factor_power * log_power_[axis]);
  }

  /// Certified upper bound on sum of |a_j|^power over j outside [0,r]^d.
  double mass_outside_box(int radius, int factor_power) const {
    const double amp = std::pow(std::abs(amplitude_), factor_power);
    switch (kind_) {
      case KernelKind::Table: {
        double s = 0.0;
        const MultiIndex r(dim_, radius);
        for (const auto& [j, c] : table_)
          if (!j.leq(r)) s += std::pow(std::abs(c), factor_power);
        return s;
      }
      default: {
        // prod(P_i + T_i) - prod(P_i) expanded over nonempty axis subsets,
        // avoiding the cancellation of two nearly equal products.
        std::vector<double> part(dim_), tail(dim_);
        for (int i = 0; i < dim_; ++i) {
          part[i] = axis_partial(i, radius, factor_power);
          tail[i] = axis_tail_upper(i, radius + 1, factor_power);
        }
        double outside = 0.0;
        for (int mask = 1; mask < (1 << dim_); ++mask) {
          double term = 1.0;
          for (int i = 0; i < dim_; ++i) term *= (mask & (1 << i)) ? tail[i] : part[i];
          outside += term;
        }
        return amp * outside;
      }
    }
  }

  /// sum of a_j over [0,r]^d (signed, exact up to fp accumulation).
  double sum_within_box(int radius) const {
    if (kind_ == KernelKind::Table) {
      double s = 0.0;
      const MultiIndex r(dim_, radius);
      for (const auto& [j, c] : table_)
        if (j.leq(r)) s += c;
      return s;
    }
    double s = amplitude_;
    for (int i = 0; i < dim_; ++i) s *= axis_partial(i, radius, 1);
    return s;
  }

  /// sum of a_j over the whole support with a certified remainder bound.
  /// Throws when sum |a_j| diverges.
  double total_sum(double* tail_bound = nullptr) const {
    if (kind_ == KernelKind::Table) {
      double s = 0.0;
      for (const auto& [j, c] : table_) s += c;
      if (tail_bound) *tail_bound = 0.0;
      return s;
    }
    for (int i = 0; i < dim_; ++i)
      if (!axis_summable(i, 1))
        throw KernelInvalid("total_sum: sum |a_j| diverges for this kernel");
    const int horizon = kind_ == KernelKind::Geometric ? 256 : 100000;
    const double tail = mass_outside_box(horizon, 1);
    if (tail_bound) *tail_bound = tail;
    return sum_within_box(horizon);
  }

 private:
  CoefficientKernel() = default;

  KernelKind kind_ = KernelKind::Table;
  int dim_ = 1;
  double amplitude_ = 1.0;
  std::map<MultiIndex, double> table_;
  std::vector<double> rho_;
  std::vector<double> power_, log_power_;
};

/// Finite quadratic kernel a_{u,v} for Volterra fields. Zero diagonal is a
/// structural requirement: products xi_{k-u} xi_{k-v} must involve two
/// distinct sites so that conditional expectations stay exact.
class PairKernel {
 public:
  struct Entry {
    MultiIndex u, v;
    double coeff;
  };

  PairKernel(int dim, std::vector<Entry> entries) : dim_(dim), entries_(std::move(entries)) {
    for (const auto& e : entries_) {
      if (e.u.dim() != dim_ || e.v.dim() != dim_)
        throw KernelInvalid("pair kernel: index dimension mismatch");
      if (!e.u.all_nonnegative() || !e.v.all_nonnegative())
        throw KernelInvalid("pair kernel: support must satisfy (u,v) >= 0");
      if (e.u == e.v)
        throw KernelInvalid("pair kernel: diagonal coefficients must vanish (a_{u,u} = 0), got " +
                            e.u.str());
    }
  }

  int dim() const { return dim_; }
  const std::vector<Entry>& entries() const { return entries_; }

  MultiIndex max_offset() const {
    MultiIndex m = MultiIndex::zero(dim_);
    for (const auto& e : entries_) m = coordinate_max(m, coordinate_max(e.u, e.v));
    return m;
  }

  /// sum of a_{u,v}^2 over (u,v) >= (k-1, k-1) coordinate-wise, u != v.
  double sum_sq_from(const MultiIndex& k) const {
    MultiIndex lo = k - MultiIndex::ones(dim_);
    double s = 0.0;
    for (const auto& e : entries_)
      if (lo.leq(e.u) && lo.leq(e.v)) s += e.coeff * e.coeff;
    return s;
  }

  double sum_sq() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.coeff * e.coeff;
    return s;
  }

 private:
  int dim_;
  std::vector<Entry> entries_;
};

}  // namespace orthofield
