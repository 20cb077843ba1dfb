#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "orthofield/innovations.hpp"
#include "orthofield/lattice.hpp"
#include "orthofield/quadrature.hpp"

namespace orthofield {

// Multilinear polynomials in the innovation field: finite sums
//     c_0 + sum_M c_M * prod_{w in M} xi_w
// over monomials M given by sets of distinct sites. Every built-in field
// model (linear, Volterra with zero diagonal, multilinear finite-support)
// has this form once truncated.
//
// Because the innovations are independent and centered, conditioning on
// F_a acts monomial by monomial: a monomial survives iff all of its sites
// are <= a, otherwise some factor integrates to zero. Consequently the
// projection P_u keeps exactly the monomials whose coordinate-wise site
// maximum equals u. Both operators are subset filters, so identities like
// E_u E_a = E_{u ^ a} hold bit for bit on this representation.

/// Sorted list of distinct sites; the empty list is the constant monomial.
using MonomialSites = std::vector<MultiIndex>;

class SitePolynomial {
 public:
  explicit SitePolynomial(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<MonomialSites, double>& terms() const { return terms_; }

  static SitePolynomial constant(int dim, double c) {
    SitePolynomial p(dim);
    p.add_term({}, c);
    return p;
  }

  /// Adds coeff * prod xi_{sites}; sites are sorted and must be distinct.
  void add_term(MonomialSites sites, double coeff) {
    if (coeff == 0.0) return;
    std::sort(sites.begin(), sites.end());
    for (std::size_t i = 0; i + 1 < sites.size(); ++i)
      if (sites[i] == sites[i + 1])
        throw std::invalid_argument("SitePolynomial: repeated site in a monomial");
    auto [it, inserted] = terms_.try_emplace(std::move(sites), coeff);
    if (!inserted) {
      it->second += coeff;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  SitePolynomial& operator+=(const SitePolynomial& o) {
    for (const auto& [sites, c] : o.terms_) add_term(sites, c);
    return *this;
  }
  SitePolynomial& operator-=(const SitePolynomial& o) {
    for (const auto& [sites, c] : o.terms_) add_term(sites, -c);
    return *this;
  }
  SitePolynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [sites, c] : terms_) c *= s;
    return *this;
  }
  friend SitePolynomial operator+(SitePolynomial a, const SitePolynomial& b) { return a += b; }
  friend SitePolynomial operator-(SitePolynomial a, const SitePolynomial& b) { return a -= b; }

  bool operator==(const SitePolynomial& o) const {
    return dim_ == o.dim_ && terms_ == o.terms_;
  }

  SitePolynomial translated(const MultiIndex& offset) const {
    SitePolynomial r(dim_);
    for (const auto& [sites, c] : terms_) {
      MonomialSites moved;
      moved.reserve(sites.size());
      for (const auto& s : sites) moved.push_back(s + offset);
      r.terms_.emplace(std::move(moved), c);  // translation preserves order
    }
    return r;
  }

  /// Realized conditional expectation E[. | F_level]: keeps the monomials
  /// that are fully measurable at the level, drops the rest.
  SitePolynomial conditioned(const MultiIndex& level) const {
    SitePolynomial r(dim_);
    for (const auto& [sites, c] : terms_) {
      bool measurable = true;
      for (const auto& s : sites)
        if (!s.leq(level)) {
          measurable = false;
          break;
        }
      if (measurable) r.terms_.emplace(sites, c);
    }
    return r;
  }

  /// Projection P_u: the alternating 2^d corner sum of conditional
  /// expectations collapses to "site maximum equals u exactly".
  SitePolynomial projected(const MultiIndex& u) const {
    SitePolynomial r(dim_);
    for (const auto& [sites, c] : terms_) {
      if (sites.empty()) continue;
      MultiIndex m = sites.front();
      for (std::size_t i = 1; i < sites.size(); ++i) m = coordinate_max(m, sites[i]);
      if (m == u) r.terms_.emplace(sites, c);
    }
    return r;
  }

  /// Monomials whose coordinate-wise site maximum lies in [lo, hi]; equals
  /// the sum of P_u over u in that box. Constants are excluded.
  SitePolynomial max_in_box(const MultiIndex& lo, const MultiIndex& hi) const {
    SitePolynomial r(dim_);
    for (const auto& [sites, c] : terms_) {
      if (sites.empty()) continue;
      MultiIndex m = sites.front();
      for (std::size_t i = 1; i < sites.size(); ++i) m = coordinate_max(m, sites[i]);
      if (lo.leq(m) && m.leq(hi)) r.terms_.emplace(sites, c);
    }
    return r;
  }

  template <typename SiteSource>
  double evaluate(const SiteSource& source) const {
    double sum = 0.0;
    for (const auto& [sites, c] : terms_) {
      double prod = c;
      for (const auto& s : sites) prod *= source(s);
      sum += prod;
    }
    return sum;
  }

  /// E[poly] under any centered innovation law.
  double mean() const {
    auto it = terms_.find(MonomialSites{});
    return it == terms_.end() ? 0.0 : it->second;
  }

  /// E[poly^2]: distinct monomials are orthogonal, each contributes
  /// coeff^2 * variance^{#sites}.
  double second_moment(const InnovationSpec& spec) const {
    double sum = 0.0;
    for (const auto& [sites, c] : terms_)
      sum += c * c * std::pow(spec.variance, static_cast<double>(sites.size()));
    return sum;
  }

  double l2_norm(const InnovationSpec& spec) const { return std::sqrt(second_moment(spec)); }

  std::vector<MultiIndex> distinct_sites() const {
    std::map<MultiIndex, int> seen;
    for (const auto& [sites, c] : terms_)
      for (const auto& s : sites) seen.emplace(s, 0);
    std::vector<MultiIndex> out;
    out.reserve(seen.size());
    for (const auto& [s, tag] : seen) out.push_back(s);
    return out;
  }

 private:
  int dim_;
  std::map<MonomialSites, double> terms_;
};

/// E[g(poly)] by exhaustive tensor integration over the polynomial's
/// distinct sites: exact enumeration for Rademacher, Gauss rules otherwise.
/// The site count is capped because the cost is atoms^sites.
template <typename Fn>
double expectation_of(const SitePolynomial& poly, const InnovationSpec& spec, Fn&& g,
                      int nodes = 64, int site_cap = 4) {
  const std::vector<MultiIndex> sites = poly.distinct_sites();
  if (spec.distribution == Distribution::Rademacher) site_cap = 16;
  if (static_cast<int>(sites.size()) > site_cap)
    throw std::invalid_argument("expectation_of: too many sites for tensor quadrature (" +
                                std::to_string(sites.size()) + ")");
  const auto atoms = innovation_quadrature(spec, nodes);

  // Flatten terms against the site order once.
  std::vector<std::pair<std::vector<int>, double>> flat;
  flat.reserve(poly.term_count());
  for (const auto& [msites, c] : poly.terms()) {
    std::vector<int> ids;
    ids.reserve(msites.size());
    for (const auto& s : msites) {
      const auto it = std::lower_bound(sites.begin(), sites.end(), s);
      ids.push_back(static_cast<int>(it - sites.begin()));
    }
    flat.emplace_back(std::move(ids), c);
  }

  std::vector<double> values(sites.size(), 0.0);
  double total = 0.0;
  const std::size_t n_sites = sites.size();
  // odometer over atom indices
  std::vector<std::size_t> idx(n_sites, 0);
  for (;;) {
    double prob = 1.0;
    for (std::size_t i = 0; i < n_sites; ++i) {
      values[i] = atoms[idx[i]].first;
      prob *= atoms[idx[i]].second;
    }
    double v = 0.0;
    for (const auto& [ids, c] : flat) {
      double prod = c;
      for (int id : ids) prod *= values[id];
      v += prod;
    }
    total += prob * g(v);
    std::size_t axis = 0;
    while (axis < n_sites && ++idx[axis] == atoms.size()) idx[axis++] = 0;
    if (axis == n_sites) break;
    if (n_sites == 0) break;
  }
  return total;
}

/// ||poly||_q = (E|poly|^q)^{1/q} by tensor quadrature; exact route for q=2.
inline double lq_norm(const SitePolynomial& poly, const InnovationSpec& spec, double q,
                      int nodes = 64, int site_cap = 4) {
  if (q == 2.0) return poly.l2_norm(spec);
  const double m =
      expectation_of(poly, spec, [q](double v) { return std::pow(std::abs(v), q); }, nodes,
                     site_cap);
  return std::pow(m, 1.0 / q);
}

// ---------------------------------------------------------------------------
// Compiled evaluation plans. Experiments evaluate a fixed set of statistics
// for many replications; compiling them against a shared site table means
// one innovation draw per site per replication, in a fixed order, so the
// result is independent of threading and evaluation order.

class EvalPlan {
 public:
  explicit EvalPlan(std::vector<const SitePolynomial*> polys) {
    if (polys.empty()) throw std::invalid_argument("EvalPlan: no polynomials");
    std::map<MultiIndex, int> site_ids;
    for (const SitePolynomial* p : polys)
      for (const auto& s : p->distinct_sites()) site_ids.emplace(s, 0);
    sites_.reserve(site_ids.size());
    for (auto& [s, id] : site_ids) {
      id = static_cast<int>(sites_.size());
      sites_.push_back(s);
    }
    n_stats_ = polys.size();
    constants_.assign(n_stats_, 0.0);
    for (std::size_t k = 0; k < polys.size(); ++k) {
      for (const auto& [msites, c] : polys[k]->terms()) {
        if (msites.empty()) {
          constants_[k] += c;
          continue;
        }
        Term t;
        t.statistic = static_cast<int>(k);
        t.coeff = c;
        for (const auto& s : msites) t.site_ids.push_back(site_ids.at(s));
        terms_.push_back(std::move(t));
      }
    }
  }

  std::size_t statistic_count() const { return n_stats_; }
  std::size_t site_count() const { return sites_.size(); }

  /// out must have statistic_count() entries; values is scratch reused
  /// across calls to avoid allocation.
  template <typename SiteSource>
  void evaluate(const SiteSource& source, std::vector<double>& values,
                std::vector<double>& out) const {
    values.resize(sites_.size());
    for (std::size_t i = 0; i < sites_.size(); ++i) values[i] = source(sites_[i]);
    out.assign(n_stats_, 0.0);
    for (std::size_t k = 0; k < n_stats_; ++k) out[k] = constants_[k];
    for (const Term& t : terms_) {
      double prod = t.coeff;
      for (int id : t.site_ids) prod *= values[id];
      out[t.statistic] += prod;
    }
  }

 private:
  struct Term {
    std::vector<int> site_ids;
    double coeff = 0.0;
    int statistic = 0;
  };
  std::vector<MultiIndex> sites_;
  std::vector<Term> terms_;
  std::vector<double> constants_;
  std::size_t n_stats_ = 0;
};

}  // namespace orthofield
