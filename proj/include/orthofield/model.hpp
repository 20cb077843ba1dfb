#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "orthofield/innovations.hpp"
#include "orthofield/kernels.hpp"
#include "orthofield/lattice.hpp"
#include "orthofield/polynomial.hpp"
#include "orthofield/quadrature.hpp"

namespace orthofield {

struct TruncationInsufficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedModelClass : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ModelClass { Linear, Volterra, FiniteSupport };

inline const char* model_class_name(ModelClass c) {
  switch (c) {
    case ModelClass::Linear: return "linear";
    case ModelClass::Volterra: return "volterra";
    case ModelClass::FiniteSupport: return "finite_support";
  }
  return "?";
}

/// f over a finite stencil of offsets. The multilinear terms make the model
/// exactly representable; a black-box function is accepted instead, in which
/// case conditional expectations fall back to numerical integration.
struct FiniteSupportSpec {
  std::vector<MultiIndex> stencil;  // offsets j >= 0, distinct
  struct Term {
    std::vector<int> stencil_ids;  // subset of stencil, no repeats
    double coeff = 0.0;
  };
  std::vector<Term> terms;
  std::function<double(const std::vector<double>&)> fn;  // used when terms is empty

  bool is_multilinear() const { return !terms.empty() || !fn; }
};

/// X_k = f(innovations at k - j, j >= 0): one of the three built-in classes,
/// truncated to an explicit radius with a certified L2 tail budget.
class FieldModel {
 public:
  static FieldModel linear(CoefficientKernel kernel, InnovationSpec innovation,
                           int truncation_radius, double tail_tolerance) {
    innovation.validate();
    FieldModel m;
    m.class_ = ModelClass::Linear;
    m.dim_ = kernel.dim();
    m.kernel_ = std::move(kernel);
    m.innovation_ = innovation;
    m.radius_ = truncation_radius;
    m.tail_tolerance_ = tail_tolerance;
    m.tail_variance_ = innovation.variance * m.kernel_->mass_outside_box(truncation_radius, 2);
    if (!(m.tail_variance_ <= tail_tolerance))
      throw TruncationInsufficient(
          "linear model: truncation radius " + std::to_string(truncation_radius) +
          " leaves L2 tail " + std::to_string(m.tail_variance_) + " > tolerance");
    m.build_polynomial();
    return m;
  }

  static FieldModel volterra(PairKernel pairs, InnovationSpec innovation) {
    innovation.validate();
    FieldModel m;
    m.class_ = ModelClass::Volterra;
    m.dim_ = pairs.dim();
    m.pairs_ = std::move(pairs);
    m.innovation_ = innovation;
    m.radius_ = 0;
    m.tail_variance_ = 0.0;  // finite kernels are represented exactly
    m.build_polynomial();
    return m;
  }

  static FieldModel finite_support(FiniteSupportSpec spec, InnovationSpec innovation) {
    innovation.validate();
    FieldModel m;
    m.class_ = ModelClass::FiniteSupport;
    if (spec.stencil.empty()) throw KernelInvalid("finite support model: empty stencil");
    m.dim_ = spec.stencil.front().dim();
    if (spec.stencil.size() > 16)
      throw KernelInvalid("finite support model: stencil capped at 16 sites");
    for (const auto& j : spec.stencil)
      if (!j.all_nonnegative() || j.dim() != m.dim_)
        throw KernelInvalid("finite support model: stencil offsets must satisfy j >= 0");
    for (std::size_t a = 0; a < spec.stencil.size(); ++a)
      for (std::size_t b = a + 1; b < spec.stencil.size(); ++b)
        if (spec.stencil[a] == spec.stencil[b])
          throw KernelInvalid("finite support model: repeated stencil offset");
    m.finite_ = std::move(spec);
    m.innovation_ = innovation;
    m.radius_ = 0;
    m.tail_variance_ = 0.0;
    if (m.finite_->terms.empty() && !m.finite_->fn)
      throw KernelInvalid("finite support model: neither terms nor function given");
    m.build_polynomial();
    return m;
  }

  ModelClass model_class() const { return class_; }
  int dim() const { return dim_; }
  const InnovationSpec& innovation() const { return innovation_; }
  int truncation_radius() const { return radius_; }
  double tail_tolerance() const { return tail_tolerance_; }
  /// Certified bound on E[(X_k - truncated X_k)^2], identical for all sites.
  double tail_variance() const { return tail_variance_; }

  const CoefficientKernel& kernel() const {
    if (!kernel_) throw UnsupportedModelClass("model has no linear kernel");
    return *kernel_;
  }
  const PairKernel& pair_kernel() const {
    if (!pairs_) throw UnsupportedModelClass("model has no pair kernel");
    return *pairs_;
  }
  const FiniteSupportSpec& finite_spec() const {
    if (!finite_) throw UnsupportedModelClass("model has no finite-support spec");
    return *finite_;
  }

  /// False only for black-box finite-support models, which have no exact
  /// multilinear representation.
  bool has_polynomial() const { return base_poly_.has_value(); }

  /// Truncated multilinear representation of X_0.
  const SitePolynomial& base_polynomial() const {
    if (!base_poly_)
      throw UnsupportedModelClass("black-box finite-support model has no polynomial form");
    return *base_poly_;
  }

  SitePolynomial field_polynomial(const MultiIndex& site) const {
    return base_polynomial().translated(site);
  }

  /// Coordinate-wise bound on the depth of sites X_0 reaches into the past:
  /// every site of X_0 lies in [-reach, 0].
  MultiIndex reach() const { return reach_; }

  /// Black-box evaluation of f at a site; exact for all classes.
  template <typename SiteSource>
  double eval_raw(const MultiIndex& site, const SiteSource& source) const {
    if (base_poly_) return field_polynomial(site).evaluate(source);
    std::vector<double> args(finite_->stencil.size());
    for (std::size_t i = 0; i < args.size(); ++i) args[i] = source(site - finite_->stencil[i]);
    return finite_->fn(args);
  }

 private:
  FieldModel() = default;

  void build_polynomial() {
    switch (class_) {
      case ModelClass::Linear: {
        SitePolynomial p(dim_);
        const MultiIndex hi = kernel_->support_bound_within(radius_);
        for_each_in_box(MultiIndex::zero(dim_), hi, [&](const MultiIndex& j) {
          const double a = kernel_->coefficient(j);
          if (a != 0.0) p.add_term({MultiIndex::zero(dim_) - j}, a);
        });
        reach_ = hi;
        base_poly_ = std::move(p);
        break;
      }
      case ModelClass::Volterra: {
        SitePolynomial p(dim_);
        for (const auto& e : pairs_->entries())
          p.add_term({MultiIndex::zero(dim_) - e.u, MultiIndex::zero(dim_) - e.v}, e.coeff);
        reach_ = pairs_->max_offset();
        base_poly_ = std::move(p);
        break;
      }
      case ModelClass::FiniteSupport: {
        reach_ = MultiIndex::zero(dim_);
        for (const auto& j : finite_->stencil) reach_ = coordinate_max(reach_, j);
        if (finite_->terms.empty()) return;  // black-box, no polynomial
        SitePolynomial p(dim_);
        for (const auto& t : finite_->terms) {
          if (t.stencil_ids.empty())
            throw KernelInvalid("finite support model: constant term breaks centering");
          MonomialSites sites;
          for (int id : t.stencil_ids) {
            if (id < 0 || id >= static_cast<int>(finite_->stencil.size()))
              throw KernelInvalid("finite support model: term references unknown stencil id");
            sites.push_back(MultiIndex::zero(dim_) - finite_->stencil[id]);
          }
          p.add_term(std::move(sites), t.coeff);
        }
        base_poly_ = std::move(p);
        break;
      }
    }
  }

  ModelClass class_ = ModelClass::Linear;
  int dim_ = 1;
  InnovationSpec innovation_;
  int radius_ = 0;
  double tail_tolerance_ = 0.0;
  double tail_variance_ = 0.0;
  MultiIndex reach_;
  std::optional<CoefficientKernel> kernel_;
  std::optional<PairKernel> pairs_;
  std::optional<FiniteSupportSpec> finite_;
  std::optional<SitePolynomial> base_poly_;
};

// ---------------------------------------------------------------------------
// Field operations. All take a SiteSource (double(const MultiIndex&)) as the
// realized innovation configuration; purity in (model, site, source) makes
// them safe under any concurrency.

struct EvalResult {
  double value = 0.0;
  double tail_bound = 0.0;  // certified bound on the omitted L2 mass, variance units
};

template <typename SiteSource>
EvalResult eval_field(const FieldModel& model, const MultiIndex& site, const SiteSource& source) {
  return {model.eval_raw(site, source), model.tail_variance()};
}

namespace model_detail {

/// Integrates a black-box finite-support f over its unmeasurable stencil
/// sites: exhaustive signs for Rademacher, tensor Gauss rules otherwise
/// (capped at 4 continuous sites).
template <typename SiteSource>
double black_box_conditional(const FieldModel& model, const MultiIndex& level,
                             const MultiIndex& site, const SiteSource& source) {
  const auto& fs = model.finite_spec();
  std::vector<double> args(fs.stencil.size(), 0.0);
  std::vector<std::size_t> free_ids;
  for (std::size_t i = 0; i < fs.stencil.size(); ++i) {
    const MultiIndex w = site - fs.stencil[i];
    if (w.leq(level))
      args[i] = source(w);
    else
      free_ids.push_back(i);
  }
  if (free_ids.empty()) return fs.fn(args);
  const bool discrete = model.innovation().distribution == Distribution::Rademacher;
  if (!discrete && free_ids.size() > 4)
    throw UnsupportedModelClass(
        "finite-support conditional expectation: more than 4 unmeasurable sites under a "
        "continuous innovation law");
  const auto atoms = innovation_quadrature(model.innovation(), 64);
  std::vector<std::size_t> idx(free_ids.size(), 0);
  double total = 0.0;
  for (;;) {
    double prob = 1.0;
    for (std::size_t i = 0; i < free_ids.size(); ++i) {
      args[free_ids[i]] = atoms[idx[i]].first;
      prob *= atoms[idx[i]].second;
    }
    total += prob * fs.fn(args);
    std::size_t axis = 0;
    while (axis < idx.size() && ++idx[axis] == atoms.size()) idx[axis++] = 0;
    if (axis == idx.size()) break;
  }
  return total;
}

}  // namespace model_detail

/// Realized E[X_site | F_level](source).
template <typename SiteSource>
double conditional_expectation(const FieldModel& model, const MultiIndex& level,
                               const MultiIndex& site, const SiteSource& source) {
  if (model.has_polynomial())
    return model.field_polynomial(site).conditioned(level).evaluate(source);
  return model_detail::black_box_conditional(model, level, site, source);
}

/// Realized E[S_window | F_level](source); conditional expectation is linear,
/// so black-box models sum per-site integrals.
template <typename SiteSource>
double conditional_expectation_window(const FieldModel& model, const MultiIndex& level,
                                      const Window& window, const SiteSource& source) {
  if (model.has_polynomial()) {
    double out = 0.0;
    window.for_each([&](const MultiIndex& k) {
      out += model.field_polynomial(k).conditioned(level).evaluate(source);
    });
    return out;
  }
  double out = 0.0;
  window.for_each([&](const MultiIndex& k) {
    out += model_detail::black_box_conditional(model, level, k, source);
  });
  return out;
}

struct ProjectionValue {
  enum class Representation { ClosedForm, MaskSum };
  Representation representation = Representation::MaskSum;
  double value = 0.0;
  double l2_norm = 0.0;
};

/// P_u(X_v) realized at the source. Linear models collapse to the closed
/// form a_{v-u} xi_u; the rest go through the alternating mask sum.
template <typename SiteSource>
ProjectionValue projection(const FieldModel& model, const MultiIndex& u, const MultiIndex& v,
                           const SiteSource& source) {
  ProjectionValue out;
  if (model.model_class() == ModelClass::Linear) {
    out.representation = ProjectionValue::Representation::ClosedForm;
    const double a = model.kernel().coefficient(v - u);
    out.value = a == 0.0 ? 0.0 : a * source(u);
    out.l2_norm = std::abs(a) * std::sqrt(model.innovation().variance);
    return out;
  }
  if (model.has_polynomial()) {
    const SitePolynomial p = model.field_polynomial(v).projected(u);
    out.value = p.evaluate(source);
    out.l2_norm = p.l2_norm(model.innovation());
    return out;
  }
  // Black box: alternating 2^d corner sum of conditional expectations.
  const int d = model.dim();
  double value = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    MultiIndex level = u;
    int popcount = 0;
    for (int i = 0; i < d; ++i)
      if (corner & (1 << i)) {
        --level[i];
        ++popcount;
      }
    const double e = model_detail::black_box_conditional(model, level, v, source);
    value += (popcount % 2 == 0) ? e : -e;
  }
  out.value = value;
  out.l2_norm = std::numeric_limits<double>::quiet_NaN();
  return out;
}

/// Truncated multilinear representation of S_window = sum of X_k.
inline SitePolynomial window_sum_polynomial(const FieldModel& model, const Window& window) {
  if (!model.has_polynomial())
    throw UnsupportedModelClass("window polynomial requires a multilinear model");
  const int d = model.dim();
  if (model.model_class() == ModelClass::Linear) {
    // Dense accumulation over the site box [1 - reach, n].
    const MultiIndex reach = model.reach();
    MultiIndex lo(d), hi = window.upper();
    for (int i = 0; i < d; ++i) lo[i] = 1 - reach[i];
    std::vector<long> extent(d), stride(d);
    long total = 1;
    for (int i = d - 1; i >= 0; --i) {
      extent[i] = hi[i] - lo[i] + 1;
      stride[i] = total;
      total *= extent[i];
    }
    std::vector<double> coeff(total, 0.0);
    auto flat = [&](const MultiIndex& w) {
      long id = 0;
      for (int i = 0; i < d; ++i) id += (w[i] - lo[i]) * stride[i];
      return id;
    };
    const SitePolynomial& base = model.base_polynomial();
    window.for_each([&](const MultiIndex& k) {
      for (const auto& [sites, c] : base.terms()) coeff[flat(k + sites.front())] += c;
    });
    SitePolynomial p(d);
    for_each_in_box(lo, hi, [&](const MultiIndex& w) {
      const double c = coeff[flat(w)];
      if (c != 0.0) p.add_term({w}, c);
    });
    return p;
  }
  SitePolynomial p(d);
  window.for_each([&](const MultiIndex& k) { p += model.field_polynomial(k); });
  return p;
}

/// The boundary correction R_n defined by S_n = sum_{u in window} P_u(S_n)
/// + R_n. Inclusion-exclusion over the axis subsets J with conditioning
/// levels n_J (coordinates of n outside J, 0 inside J) reproduces the
/// two-dimensional three-term formula E_{n,0} + E_{0,m} - E_{0,0}.
inline SitePolynomial remainder_polynomial_of_sum(const SitePolynomial& window_sum,
                                                  const Window& window) {
  const int d = window.dim();
  SitePolynomial r(d);
  for (int mask = 1; mask < (1 << d); ++mask) {
    MultiIndex level = window.upper();
    int popcount = 0;
    for (int i = 0; i < d; ++i)
      if (mask & (1 << i)) {
        level[i] = 0;
        ++popcount;
      }
    SitePolynomial e = window_sum.conditioned(level);
    if (popcount % 2 == 0) e *= -1.0;
    r += e;
  }
  return r;
}

inline SitePolynomial remainder_polynomial(const FieldModel& model, const Window& window) {
  return remainder_polynomial_of_sum(window_sum_polynomial(model, window), window);
}

template <typename SiteSource>
double remainder(const FieldModel& model, const Window& window, const SiteSource& source) {
  if (model.has_polynomial()) return remainder_polynomial(model, window).evaluate(source);
  // Black box: same inclusion-exclusion with integrated conditionals.
  const int d = model.dim();
  double value = 0.0;
  for (int mask = 1; mask < (1 << d); ++mask) {
    MultiIndex level = window.upper();
    int popcount = 0;
    for (int i = 0; i < d; ++i)
      if (mask & (1 << i)) {
        level[i] = 0;
        ++popcount;
      }
    const double e = conditional_expectation_window(model, level, window, source);
    value += (popcount % 2 == 1) ? e : -e;
  }
  return value;
}

struct PartialSumResult {
  double value = 0.0;
  double tail_bound = 0.0;  // bound on E[(omitted mass)^2] accumulated over the window
};

template <typename SiteSource>
PartialSumResult partial_sum(const FieldModel& model, const Window& window,
                             const SiteSource& source) {
  PartialSumResult out;
  if (model.has_polynomial()) {
    out.value = window_sum_polynomial(model, window).evaluate(source);
  } else {
    double s = 0.0;
    window.for_each([&](const MultiIndex& k) { s += model.eval_raw(k, source); });
    out.value = s;
  }
  // ||sum of per-site tails||_2 <= |n| * sqrt(per-site tail variance)
  const double vol = static_cast<double>(window.volume());
  out.tail_bound = vol * vol * model.tail_variance();
  return out;
}

/// D_0 = sum_{v >= 0} P_0(X_v): every monomial of X_0, recentered so its
/// coordinate-wise site maximum sits at the origin. D_u is its translate.
inline SitePolynomial increment_polynomial(const FieldModel& model) {
  const SitePolynomial& base = model.base_polynomial();
  SitePolynomial d0(model.dim());
  for (const auto& [sites, c] : base.terms()) {
    if (sites.empty()) continue;
    MultiIndex m = sites.front();
    for (std::size_t i = 1; i < sites.size(); ++i) m = coordinate_max(m, sites[i]);
    MonomialSites moved;
    moved.reserve(sites.size());
    for (const auto& s : sites) moved.push_back(s - m);
    d0.add_term(std::move(moved), c);
  }
  return d0;
}

struct Sigma2 {
  bool available = false;
  double value = 0.0;
  double error_bound = 0.0;  // from the certified kernel tail, linear models
};

/// sigma^2 = || sum_{u >= 0} P_0(X_u) ||_2^2. Closed form (sum a_j)^2 Var(xi)
/// for linear kernels; exact finite computation for multilinear finite
/// support. Volterra is reported unavailable and estimated by Monte Carlo in
/// the harness instead.
inline Sigma2 sigma2_analytic(const FieldModel& model) {
  Sigma2 out;
  switch (model.model_class()) {
    case ModelClass::Linear: {
      double tail = 0.0;
      const double s = model.kernel().total_sum(&tail);
      const double v = model.innovation().variance;
      out.available = true;
      out.value = s * s * v;
      out.error_bound = (2.0 * std::abs(s) * tail + tail * tail) * v;
      return out;
    }
    case ModelClass::FiniteSupport: {
      if (!model.has_polynomial()) return out;  // black box: unavailable
      out.available = true;
      out.value = increment_polynomial(model).second_moment(model.innovation());
      out.error_bound = 0.0;
      return out;
    }
    case ModelClass::Volterra:
      return out;  // no closed form is claimed; Monte Carlo fallback
  }
  return out;
}

}  // namespace orthofield
