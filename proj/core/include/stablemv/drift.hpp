#ifndef STABLEMV_DRIFT_HPP
#define STABLEMV_DRIFT_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "stablemv/measure.hpp"

namespace stablemv {

enum class DriftKind { Zero, HolderMean, Mollified };

/// Bounded drift b(x, mu) built from a Holder kink plus a bounded mean
/// interaction. Componentwise,
///   b_i(x, mu) = a * phi_beta(x_i) + c * int tanh(y_i) mu(dy),
/// phi_beta(s) = sign(s) * min(|s|^beta, 1). This keeps every
/// regularity constant analytically known: sup norm a + c, Holder
/// constant 2a (per component), W_1-Lipschitz constant c in the
/// measure.
struct DriftSpec {
  int dim = 1;
  double beta = 0.5;
  double kappa = 1.0;
  double holder_amp = 0.0;       // a
  double interaction_amp = 0.0;  // c
  DriftKind kind = DriftKind::Zero;

  // Mollified only
  std::shared_ptr<const DriftSpec> base;
  int mollify_n = 0;

  double sup_bound() const { return holder_amp + interaction_amp; }
  /// Checks the standing constraint 2*beta + alpha > 2 for a noise
  /// index alpha; throws std::invalid_argument when violated.
  void check_compatible(double alpha) const;
  void validate() const;
};

double phi_beta(double s, double beta);

/// b(x, mu). Throws on dimension mismatch.
void eval_drift(const DriftSpec& spec, const double* x, const EmpiricalMeasure& mu,
                double* out);
std::vector<double> eval_drift(const DriftSpec& spec, const std::vector<double>& x,
                               const EmpiricalMeasure& mu);

/// Drift with the measure functionals frozen, for repeated evaluation
/// against one empirical measure (one EM step). eval() is pure and
/// thread-safe.
class FrozenDrift {
 public:
  FrozenDrift(const DriftSpec& spec, const EmpiricalMeasure& mu);
  void eval(const double* x, double* out) const;
  int dim() const { return spec_->dim; }

 private:
  const DriftSpec* spec_;
  std::vector<double> interaction_;  // c * mean tanh(y_i), per coordinate
  // midpoint quadrature for the mollifier, offsets (nodes x dim) and
  // normalized weights
  std::vector<double> quad_offsets_;
  std::vector<double> quad_weights_;
};

/// Convolution of the x-dependence against the bump
/// rho(x) ~ exp(-1/(1-|x|^2)) on |x| < 1, scaled to support radius
/// 1/n. Midpoint rule, 129 nodes per axis; dim <= 2 only.
DriftSpec mollify_drift(const DriftSpec& spec, int n);

struct AdmissibilityReport {
  double max_holder_ratio = 0.0;   // sup |b(x,mu)-b(y,mu)|_inf / |x-y|^beta
  double max_measure_ratio = 0.0;  // sup |b(x,mu)-b(x,mu')|_inf / W_kappa(mu,mu')
  double sup_norm = 0.0;           // sup |b(x,mu)|_inf over samples
  double holder_limit = 0.0;
  double measure_limit = 0.0;
  double sup_limit = 0.0;
  bool pass = false;
};

/// Empirical check of the regularity constants over random pairs of
/// points and small empirical measures.
AdmissibilityReport verify_admissible(const DriftSpec& spec, int sample_count,
                                      std::uint64_t seed);

}  // namespace stablemv

#endif
