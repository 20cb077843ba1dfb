#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "orthofield/innovations.hpp"

namespace orthofield {

/// Nodes and weights approximating an integral against the rule's weight
/// function: integral w(x) f(x) dx ~= sum_i weights[i] * f(nodes[i]).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace quad_detail {
constexpr double kPi = 3.141592653589793238462643;
constexpr double kNewtonEps = 1e-14;
}  // namespace quad_detail

/// Weight e^{-x^2} on the whole line. Newton iteration on the orthonormal
/// Hermite recurrence; stable up to a few hundred nodes.
inline QuadratureRule gauss_hermite(int n) {
  using namespace quad_detail;
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * rule.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * rule.nodes[1];
    else
      z = 2.0 * z - rule.nodes[i - 2];
    for (int it = 0; it < 200; ++it) {
      double p1 = 0.7511255444649424828587;  // pi^{-1/4}
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kNewtonEps) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

/// Weight e^{-x} on (0, infinity).
inline QuadratureRule gauss_laguerre(int n) {
  using namespace quad_detail;
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == 0)
      z = 3.0 / (1.0 + 2.4 * n);
    else if (i == 1)
      z += 15.0 / (1.0 + 2.5 * n);
    else {
      const double ai = i - 1.0;
      z += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - rule.nodes[i - 2]);
    }
    double p2 = 0.0, pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = 1.0;
      p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0 - z) * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (p1 - p2) / z;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kNewtonEps) break;
    }
    rule.nodes[i] = z;
    rule.weights[i] = -1.0 / (pp * n * p2);
  }
  return rule;
}

/// Weight 1 on [-1, 1].
inline QuadratureRule gauss_legendre(int n) {
  using namespace quad_detail;
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kNewtonEps) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

/// Atoms (value, probability) such that E g(xi) ~= sum p_i g(t_i) under the
/// innovation law. Exact two-atom rule for Rademacher; n-node Gauss rules
/// otherwise.
inline std::vector<std::pair<double, double>> innovation_quadrature(const InnovationSpec& spec,
                                                                    int n = 64) {
  using namespace quad_detail;
  std::vector<std::pair<double, double>> atoms;
  const double s = std::sqrt(spec.variance);
  switch (spec.distribution) {
    case Distribution::Rademacher:
      atoms.push_back({s, 0.5});
      atoms.push_back({-s, 0.5});
      return atoms;
    case Distribution::StandardNormal: {
      const QuadratureRule rule = gauss_hermite(n);
      const double norm = 1.0 / std::sqrt(kPi);
      for (int i = 0; i < n; ++i)
        atoms.push_back({s * std::sqrt(2.0) * rule.nodes[i], norm * rule.weights[i]});
      return atoms;
    }
    case Distribution::CenteredExponential: {
      const QuadratureRule rule = gauss_laguerre(n);
      for (int i = 0; i < n; ++i) atoms.push_back({s * (rule.nodes[i] - 1.0), rule.weights[i]});
      return atoms;
    }
    case Distribution::StudentT: {
      // t = c * sqrt(nu) * tan(theta) maps the density to
      // const * cos^{nu-1}(theta) on (-pi/2, pi/2), smooth at the endpoints.
      const double nu = spec.student_nu;
      const double scale = std::sqrt(spec.variance * (nu - 2.0) / nu);
      const double cnu =
          std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0)) / std::sqrt(nu * kPi);
      const QuadratureRule rule = gauss_legendre(std::max(n, 128));
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double theta = rule.nodes[i] * kPi / 2.0;
        const double value = scale * std::sqrt(nu) * std::tan(theta);
        const double density = cnu * std::sqrt(nu) * std::pow(std::cos(theta), nu - 1.0);
        atoms.push_back({value, rule.weights[i] * (kPi / 2.0) * density});
      }
      return atoms;
    }
  }
  throw UnsupportedDistribution("innovation_quadrature: unknown distribution");
}

}  // namespace orthofield
