#ifndef STABLEMV_INTEGRATOR_HPP
#define STABLEMV_INTEGRATOR_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "stablemv/drift.hpp"
#include "stablemv/measure.hpp"
#include "stablemv/noise.hpp"

namespace stablemv {

enum class InitKind { PointMass, Gaussian, Uniform };

struct InitialLaw {
  InitKind kind = InitKind::PointMass;
  std::vector<double> a;  // point / mean / lower bound, per coordinate
  std::vector<double> b;  // unused / sd / upper bound

  void sample(const NoiseStream& s, int dim, double* out) const;
  void validate(int dim) const;
};

struct SystemConfig {
  int particle_count = 1;
  double step = 1.0 / 64;  // delta, must lie in (0, 1/e)
  double horizon = 1.0;    // T, adjusted to the lattice
  int fine_substeps = 1;   // noise drawn on the lattice of step/fine_substeps
  DriftSpec drift;
  StableParams noise;
  InitialLaw init;
  std::uint64_t seed = 0;
  int threads = 1;

  int step_count() const;
  double adjusted_horizon() const { return step_count() * step; }
  void validate() const;
};

/// Particle trajectories on the lattice {0, delta, ..., T} together
/// with the per-step noise that produced them, so any path re-integrates
/// exactly.
struct LatticePath {
  double delta = 0.0;
  int dim = 0;
  int particles = 0;
  int steps = 0;
  int fine_substeps = 1;
  std::vector<double> states;      // (steps+1) x particles x dim
  std::vector<double> increments;  // steps x particles x dim (per-step sums)
  std::vector<double> fine_increments;  // steps*fine_substeps x particles x dim
  std::vector<double> drifts;      // steps x particles x dim, b * delta per step

  const double* drift_slab(int k, int i) const {
    return drifts.data() + (static_cast<std::size_t>(k) * particles + i) * dim;
  }

  const double* state(int k, int i) const {
    return states.data() + (static_cast<std::size_t>(k) * particles + i) * dim;
  }
  const double* increment(int k, int i) const {
    return increments.data() + (static_cast<std::size_t>(k) * particles + i) * dim;
  }
  EmpiricalMeasure measure_at(int k) const;
};

/// Re-integrates a path from its stored initial states and fine
/// increments; bit-identical to the original by construction.
LatticePath reintegrate(const SystemConfig& cfg, const LatticePath& path);

/// One EM update: new_i = x_i + b(x_i, empirical) * delta + dL_i, with
/// the drift evaluated at the left endpoint for both arguments.
void em_step(const std::vector<double>& states, const EmpiricalMeasure& empirical,
             const DriftSpec& drift, double delta, const std::vector<double>& increments,
             int particle_count, std::vector<double>& out, int threads = 1);

/// Noise increments on the fine lattice of a run: layout
/// fine_steps x particles x dim. Increment (i,k) depends only on
/// (seed, i, k).
std::vector<double> draw_fine_increments(const StableParams& p, std::uint64_t seed,
                                         int particles, int fine_steps, double dt_fine,
                                         int threads = 1);

/// Initial states for particles [0, particles), drawn i.i.d. from the law.
std::vector<double> draw_initial_states(const InitialLaw& law, const StableParams& p,
                                        std::uint64_t seed, int particles);

/// Coarse-lattice EM run from precomputed fine increments (summed per
/// coarse step) and initial states. `flow`, when non-null, supplies an
/// external measure per lattice time instead of the interacting
/// empirical measure.
LatticePath integrate(const SystemConfig& cfg, const std::vector<double>& initial,
                      const std::vector<double>& fine_increments,
                      const std::vector<EmpiricalMeasure>* flow = nullptr);

/// The N-interacting particle system under the EM scheme.
LatticePath simulate_interacting(const SystemConfig& cfg);

/// Non-interacting particles evolved against an external measure flow
/// (one measure per lattice left endpoint).
LatticePath simulate_frozen_flow(const SystemConfig& cfg,
                                 const std::vector<EmpiricalMeasure>& flow);

/// Coarse and fine runs driven by the same Levy path: noise is drawn on
/// the lattice of step delta/m, the coarse run sums it per step.
/// factor must be >= 2.
std::pair<LatticePath, LatticePath> coupled_refinement(const SystemConfig& cfg, int factor);

}  // namespace stablemv

#endif
