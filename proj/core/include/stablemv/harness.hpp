#ifndef STABLEMV_HARNESS_HPP
#define STABLEMV_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "stablemv/integrator.hpp"

namespace stablemv {

/// One rate experiment: a grid of delta / N / mollification levels, an
/// error moment p in [kappa, alpha), an auxiliary moment q in
/// (p, alpha), and Monte Carlo replication counts.
struct StudyConfig {
  SystemConfig base;
  std::vector<double> grid;
  double error_p = 1.0;
  double moment_q = 0.0;  // 0 selects the default (p + alpha) / 2
  int replications = 8;
  int groups = 8;  // median-of-means groups (capped at replications)
  double reference = 0.0;  // chaos: N_ref; emprate: proxy size; 0 = default

  double resolved_q() const;
  void validate() const;  // grid monotonicity, p/q ranges, q exclusions
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;
};

struct StudyReport {
  std::string study;
  std::vector<double> grid;
  std::vector<double> errors;   // E sup-lattice |.|^p estimates (or W_p^p)
  std::vector<double> stderrs;  // MC standard errors across groups
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double theory_slope = 0.0;
  double band_lo = 0.0;  // acceptance band on the fitted slope
  double band_hi = 0.0;
  bool pass = false;
  bool degenerate = false;  // all-zero error grid; slope not fitted
  std::string note;
  std::uint64_t seed = 0;
  std::string config_echo;  // JSON echo of the resolved study config

  std::string to_json() const;
  std::string to_csv() const;
};

/// OLS on (log x, log y); throws on nonpositive values or fewer than
/// three points.
SlopeFit fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// Strong error vs the finest-delta reference under synchronous
/// coupling; grid holds step sizes, each an integer multiple of the
/// smallest.
StudyReport stepsize_study(const StudyConfig& cfg);

/// Propagation of chaos: each N-system coupled to the first N particles
/// of an N_ref reference run (shared streams, shared initials); grid
/// holds particle counts.
StudyReport chaos_study(const StudyConfig& cfg);

/// One-step displacement moment E |X_t - X_{t_delta}|^p vs delta.
StudyReport moment_study(const StudyConfig& cfg);

/// Empirical-measure rate E W_p(mu_N, proxy)^p for i.i.d. samples of
/// the initial law, 1-D exact W_p; grid holds sample counts.
StudyReport empirical_rate_study(const StudyConfig& cfg);

/// Coupled error between the b^n-run and the b-run under identical
/// noise; grid holds mollification levels n.
StudyReport mollification_study(const StudyConfig& cfg);

/// Measure-dump of E sup-lattice error between two equal-lattice paths
/// (p-th moment, mean over particles); exposed for tests.
double sup_lattice_p_error(const LatticePath& a, const LatticePath& b, double p);

}  // namespace stablemv

#endif
