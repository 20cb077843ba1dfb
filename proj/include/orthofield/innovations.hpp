#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "orthofield/lattice.hpp"
#include "orthofield/rng.hpp"

namespace orthofield {

enum class Distribution { StandardNormal, Rademacher, CenteredExponential, StudentT };

inline const char* distribution_name(Distribution d) {
  switch (d) {
    case Distribution::StandardNormal: return "standard_normal";
    case Distribution::Rademacher: return "rademacher";
    case Distribution::CenteredExponential: return "centered_exponential";
    case Distribution::StudentT: return "student_t";
  }
  return "?";
}

struct UnsupportedDistribution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Marginal law of the i.i.d. innovation field: centered, with the given
/// variance. StudentT requires nu > 4 so that fourth-moment conditions on
/// the field are meaningful.
struct InnovationSpec {
  Distribution distribution = Distribution::StandardNormal;
  double variance = 1.0;
  double student_nu = 6.0;

  void validate() const {
    if (!(variance > 0.0)) throw UnsupportedDistribution("innovation variance must be > 0");
    if (distribution == Distribution::StudentT && !(student_nu > 4.0))
      throw UnsupportedDistribution("StudentT requires nu > 4, got " +
                                    std::to_string(student_nu));
  }

  /// Largest q with E|xi|^q < infinity for every moment order <= q.
  double moment_order_available() const {
    if (distribution == Distribution::StudentT) return std::ceil(student_nu) - 1.0;
    return std::numeric_limits<double>::infinity();
  }

  /// E|xi|^q for the moments used by analytic oracles. Supported for the
  /// orders that appear in closed-form expectations.
  double absolute_moment(double q) const;
};

inline double draw_innovation(SiteStream& stream, const InnovationSpec& spec) {
  const double s = std::sqrt(spec.variance);
  switch (spec.distribution) {
    case Distribution::StandardNormal:
      return s * stream.next_normal();
    case Distribution::Rademacher:
      return (stream.next_u64() & 1) ? s : -s;
    case Distribution::CenteredExponential:
      return s * (stream.next_exponential() - 1.0);
    case Distribution::StudentT: {
      const double nu = spec.student_nu;
      const double z = stream.next_normal();
      const double chi2 = 2.0 * stream.next_gamma(nu / 2.0);
      const double t = z / std::sqrt(chi2 / nu);
      return t * std::sqrt(spec.variance * (nu - 2.0) / nu);
    }
  }
  throw UnsupportedDistribution("unknown distribution");
}

inline double InnovationSpec::absolute_moment(double q) const {
  const double s = std::sqrt(variance);
  if (q == 2.0) return variance;
  switch (distribution) {
    case Distribution::Rademacher:
      return std::pow(s, q);
    case Distribution::StandardNormal:
      // E|Z|^q = 2^{q/2} Gamma((q+1)/2) / sqrt(pi)
      return std::pow(s, q) * std::pow(2.0, q / 2.0) * std::tgamma((q + 1.0) / 2.0) /
             std::sqrt(3.141592653589793238462643);
    default:
      throw UnsupportedDistribution("absolute_moment: no closed form for this distribution");
  }
}

/// Identifies one quenched experiment: omega_seed freezes the past quadrant
/// {site <= 0}, root_seed drives everything else.
struct QuenchedScenario {
  std::uint64_t root_seed = 1;
  std::uint64_t omega_seed = 1;
  int dim = 2;
};

/// Sites in the past quadrant depend only on omega_seed; all other sites
/// depend on (root_seed, replication, site). Pure in all arguments.
inline double sample_innovation(const QuenchedScenario& scenario, const InnovationSpec& spec,
                                std::uint64_t replication, const MultiIndex& site) {
  const std::uint64_t seed = site.all_nonpositive()
                                 ? derive_site_seed(scenario.omega_seed, 0, site)
                                 : derive_site_seed(scenario.root_seed, replication, site);
  SiteStream stream(seed);
  return draw_innovation(stream, spec);
}

/// Innovation values seen by one replication of one scenario. Satisfies the
/// SiteSource concept used by the evaluation routines: double(MultiIndex).
class ReplicationView {
 public:
  ReplicationView(const QuenchedScenario& scenario, const InnovationSpec& spec,
                  std::uint64_t replication)
      : scenario_(scenario), spec_(spec), replication_(replication) {}

  double operator()(const MultiIndex& site) const {
    return sample_innovation(scenario_, spec_, replication_, site);
  }

  const QuenchedScenario& scenario() const { return scenario_; }
  const InnovationSpec& spec() const { return spec_; }
  std::uint64_t replication() const { return replication_; }

 private:
  QuenchedScenario scenario_;
  InnovationSpec spec_;
  std::uint64_t replication_;
};

/// Conditions on F_level: sites <= level keep the base replication's values,
/// every other site is redrawn per resample from an independent root. Used by
/// the resampling oracles and the martingale-difference checks.
class ConditionedView {
 public:
  ConditionedView(ReplicationView base, MultiIndex level, std::uint64_t resample_root,
                  std::uint64_t resample)
      : base_(base), level_(level), resample_root_(resample_root), resample_(resample) {}

  double operator()(const MultiIndex& site) const {
    if (site.leq(level_)) return base_(site);
    SiteStream stream(derive_site_seed(resample_root_, resample_, site));
    return draw_innovation(stream, base_.spec());
  }

 private:
  ReplicationView base_;
  MultiIndex level_;
  std::uint64_t resample_root_;
  std::uint64_t resample_;
};

}  // namespace orthofield
