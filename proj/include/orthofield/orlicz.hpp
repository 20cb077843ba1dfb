#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "orthofield/innovations.hpp"
#include "orthofield/polynomial.hpp"
#include "orthofield/quadrature.hpp"

namespace orthofield {

struct NonIntegrable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The Young function used by the dimension-d moment conditions:
/// phi_d(x) = x^2 log^{d-1}(1 + |x|). For d = 1 this is plain x^2 and the
/// Luxemburg norm reduces to the L2 norm.
inline double young_phi(double x, int d) {
  x = std::abs(x);
  if (d <= 1) return x * x;
  return x * x * std::pow(std::log1p(x), d - 1);
}

namespace orlicz_detail {

/// Bisection for inf{k : E phi(|f|/k) <= 1} given the monotone decreasing
/// map k -> E phi(|f|/k). scale_hint should be of the order of ||f||_2.
template <typename MeanPhi>
double luxemburg_bisect(MeanPhi&& mean_phi, double scale_hint, double tol) {
  double hi = scale_hint > 0.0 ? scale_hint : 1.0;
  int guard = 0;
  while (mean_phi(hi) > 1.0) {
    hi *= 2.0;
    if (++guard > 1200) throw NonIntegrable("luxemburg norm: E phi(|f|/k) stays above 1");
  }
  double lo = hi / 2.0;
  guard = 0;
  while (mean_phi(lo) <= 1.0) {
    hi = lo;
    lo /= 2.0;
    if (lo < 1e-300) return 0.0;  // f vanishes a.s.
    ++guard;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (mean_phi(mid) <= 1.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

inline void require_integrable(const InnovationSpec& spec) {
  // phi_d grows like x^2 log^{d-1}: finite exactly when E xi^2 log^{d-1} is,
  // which for Student t needs nu > 2.
  if (spec.distribution == Distribution::StudentT && !(spec.student_nu > 2.0))
    throw NonIntegrable("luxemburg norm: E phi(|xi|) undefined for Student t with nu = " +
                        std::to_string(spec.student_nu));
}

}  // namespace orlicz_detail

/// || c ||_phi_d of a constant.
inline double luxemburg_norm_constant(double c, int d, double tol = 1e-10) {
  c = std::abs(c);
  if (c == 0.0) return 0.0;
  return c * orlicz_detail::luxemburg_bisect([&](double k) { return young_phi(1.0 / k, d); },
                                             1.0, tol / c);
}

/// || c * xi ||_phi_d for a scaled innovation.
inline double luxemburg_norm_scaled_innovation(const InnovationSpec& spec, double c, int d,
                                               double tol = 1e-10, int nodes = 128) {
  orlicz_detail::require_integrable(spec);
  c = std::abs(c);
  if (c == 0.0) return 0.0;
  const auto atoms = innovation_quadrature(spec, nodes);
  auto mean_phi = [&](double k) {
    double s = 0.0;
    for (const auto& [x, p] : atoms) s += p * young_phi(c * x / k, d);
    return s;
  };
  return orlicz_detail::luxemburg_bisect(mean_phi, c * std::sqrt(spec.variance), tol);
}

/// Luxemburg norm of a multilinear polynomial of innovations, by tensor
/// quadrature over its sites (same caps as expectation_of).
inline double luxemburg_norm_polynomial(const SitePolynomial& poly, const InnovationSpec& spec,
                                        int d, double tol = 1e-8, int nodes = 32,
                                        int site_cap = 4) {
  orlicz_detail::require_integrable(spec);
  const double l2 = poly.l2_norm(spec);
  if (l2 == 0.0) return 0.0;
  auto mean_phi = [&](double k) {
    return expectation_of(poly, spec, [&](double v) { return young_phi(v / k, d); }, nodes,
                          site_cap);
  };
  return orlicz_detail::luxemburg_bisect(mean_phi, l2, tol);
}

/// E|xi|^q for arbitrary q >= 1 (closed form where available, quadrature
/// otherwise); used for the q-norm constants of the projective criteria.
inline double innovation_abs_moment(const InnovationSpec& spec, double q, int nodes = 128) {
  if (q > spec.moment_order_available())
    throw NonIntegrable("E|xi|^q undefined: q = " + std::to_string(q) + " exceeds " +
                        std::to_string(spec.moment_order_available()));
  switch (spec.distribution) {
    case Distribution::Rademacher:
    case Distribution::StandardNormal:
      return spec.absolute_moment(q);
    default: {
      double s = 0.0;
      for (const auto& [x, p] : innovation_quadrature(spec, nodes))
        s += p * std::pow(std::abs(x), q);
      return s;
    }
  }
}

}  // namespace orthofield
