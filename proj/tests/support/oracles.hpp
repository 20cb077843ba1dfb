#pragma once

// Test-only oracles, kept independent of the library's mask-algebra paths:
// conditional expectations by brute-force resampling of the unmeasurable
// sites, partial sums by naive double summation, and deterministic random
// model generators for property-style checks.

#include <cmath>
#include <vector>

#include "orthofield/innovations.hpp"
#include "orthofield/kernels.hpp"
#include "orthofield/model.hpp"
#include "orthofield/rng.hpp"

namespace orthofield::testing {

struct OracleEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo E[X_site | F_level] at the base replication: sites <= level
/// keep their realized values, everything else is resampled K times.
template <typename EvalFn>
OracleEstimate resampling_conditional(const ReplicationView& base, const MultiIndex& level,
                                      std::uint64_t resample_root, int resamples, EvalFn&& eval) {
  double sum = 0.0, sumsq = 0.0;
  for (int k = 0; k < resamples; ++k) {
    ConditionedView view(base, level, resample_root, static_cast<std::uint64_t>(k));
    const double v = eval(view);
    sum += v;
    sumsq += v * v;
  }
  OracleEstimate out;
  out.mean = sum / resamples;
  const double var = (sumsq - sum * sum / resamples) / (resamples - 1);
  out.std_error = std::sqrt(std::max(var, 0.0) / resamples);
  return out;
}

/// Naive truncated double sum of the kernel, bypassing SitePolynomial.
template <typename SiteSource>
double naive_linear_partial_sum(const CoefficientKernel& kernel, int radius,
                                const Window& window, const SiteSource& source) {
  double total = 0.0;
  window.for_each([&](const MultiIndex& k) {
    for_each_in_box(MultiIndex::zero(kernel.dim()), MultiIndex(kernel.dim(), radius),
                    [&](const MultiIndex& j) {
                      const double a = kernel.coefficient(j);
                      if (a != 0.0) total += a * source(k - j);
                    });
  });
  return total;
}

/// Deterministic pseudo-random model generators for property tests.
class ModelFuzzer {
 public:
  explicit ModelFuzzer(std::uint64_t seed) : stream_(seed) {}

  int pick_dim() { return 1 + static_cast<int>(stream_.next_u64() % 3); }

  CoefficientKernel random_table_kernel(int dim, int max_extent = 3, int max_terms = 6) {
    std::map<MultiIndex, double> entries;
    const int n = 1 + static_cast<int>(stream_.next_u64() % max_terms);
    for (int t = 0; t < n; ++t) {
      MultiIndex j(dim);
      for (int i = 0; i < dim; ++i)
        j[i] = static_cast<int>(stream_.next_u64() % (max_extent + 1));
      entries[j] = stream_.next_uniform() * 4.0 - 2.0;
    }
    return CoefficientKernel::table(dim, std::move(entries));
  }

  PairKernel random_pair_kernel(int dim, int max_extent = 2, int max_terms = 4) {
    std::vector<PairKernel::Entry> entries;
    const int n = 1 + static_cast<int>(stream_.next_u64() % max_terms);
    for (int t = 0; t < n; ++t) {
      MultiIndex u(dim), v(dim);
      do {
        for (int i = 0; i < dim; ++i) {
          u[i] = static_cast<int>(stream_.next_u64() % (max_extent + 1));
          v[i] = static_cast<int>(stream_.next_u64() % (max_extent + 1));
        }
      } while (u == v);
      entries.push_back({u, v, stream_.next_uniform() * 2.0 - 1.0});
    }
    return PairKernel(dim, std::move(entries));
  }

  FiniteSupportSpec random_multilinear_spec(int dim, int max_sites = 5, int max_terms = 5) {
    FiniteSupportSpec spec;
    int distinct_offsets = 1;
    for (int i = 0; i < dim; ++i) distinct_offsets *= 3;
    max_sites = std::min(max_sites, distinct_offsets);
    const int s = 1 + static_cast<int>(stream_.next_u64() % max_sites);
    while (static_cast<int>(spec.stencil.size()) < s) {
      MultiIndex j(dim);
      for (int i = 0; i < dim; ++i) j[i] = static_cast<int>(stream_.next_u64() % 3);
      bool dup = false;
      for (const auto& e : spec.stencil) dup = dup || e == j;
      if (!dup) spec.stencil.push_back(j);
    }
    const int n = 1 + static_cast<int>(stream_.next_u64() % max_terms);
    for (int t = 0; t < n; ++t) {
      std::vector<int> ids;
      for (int i = 0; i < s; ++i)
        if (stream_.next_u64() % 2) ids.push_back(i);
      if (ids.empty()) ids.push_back(static_cast<int>(stream_.next_u64() % s));
      spec.terms.push_back({ids, stream_.next_uniform() * 2.0 - 1.0});
    }
    return spec;
  }

  MultiIndex random_level(int dim, int lo = -2, int hi = 2) {
    MultiIndex a(dim);
    for (int i = 0; i < dim; ++i)
      a[i] = lo + static_cast<int>(stream_.next_u64() % (hi - lo + 1));
    return a;
  }

  SiteStream& stream() { return stream_; }

 private:
  SiteStream stream_;
};

}  // namespace orthofield::testing
