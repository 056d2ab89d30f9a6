#ifndef STABLEMV_NOISE_HPP
#define STABLEMV_NOISE_HPP

#include <cstdint>
#include <vector>

namespace stablemv {

enum class SpectralMode { Isotropic, PerAxis };

/// Parameters of a d-dimensional symmetric alpha-stable process.
///
/// The characteristic exponent is fixed by the spectral mode:
///   Isotropic: Psi(u) = scale * |u|^alpha
///   PerAxis:   Psi(u) = scale * sum_i |u_i|^alpha
/// Both satisfy the nondegeneracy bound Psi(u) >= C |u|^alpha for
/// some C > 0, as required for alpha in (1,2).
struct StableParams {
  int dim = 1;
  double alpha = 1.5;
  SpectralMode mode = SpectralMode::Isotropic;
  double scale = 1.0;

  void validate() const;  // throws std::invalid_argument
};

/// Counter-based RNG stream identity. Every variate is a pure function
/// of (seed, particle, step, draw index), independent of evaluation
/// order and thread count.
struct NoiseStream {
  std::uint64_t seed = 0;
  std::uint64_t particle = 0;
};

namespace rng {

// Draw purposes keep increment noise and initial-condition noise in
// disjoint counter spaces.
inline constexpr std::uint64_t kPurposeIncrement = 0;
inline constexpr std::uint64_t kPurposeInitial = 1;
inline constexpr std::uint64_t kPurposeScratch = 2;

/// Uniform in the open interval (0,1); 53-bit resolution. `salt`
/// selects re-draw attempts for degenerate values.
double uniform01(const NoiseStream& s, std::uint64_t purpose, std::uint64_t step,
                 std::uint32_t draw, std::uint32_t salt = 0);

/// Standard normal via Box-Muller on two counter draws.
double gaussian(const NoiseStream& s, std::uint64_t purpose, std::uint64_t step,
                std::uint32_t draw_pair);

/// Independent sub-seed for replication `index` of a study.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace rng

/// Psi(u) for the given parameters. Zero iff u = 0.
double characteristic_exponent(const StableParams& p, const double* u);
double characteristic_exponent(const StableParams& p, const std::vector<double>& u);

/// One increment of the process over a window of length dt, written to
/// out[0..dim). `step` is the fine-lattice index of the window.
void sample_increment(const StableParams& p, double dt, const NoiseStream& s,
                      std::uint64_t step, double* out);
std::vector<double> sample_increment(const StableParams& p, double dt,
                                     const NoiseStream& s, std::uint64_t step);

/// Standard 1-D symmetric alpha-stable variate (CF exp(-|u|^alpha)),
/// Chambers-Mallows-Stuck, skewness 0.
double sample_standard_sas(double alpha, const NoiseStream& s, std::uint64_t purpose,
                           std::uint64_t step, std::uint32_t draw_base);

/// Positive one-sided stable variate with Laplace transform
/// exp(-lambda^a), a in (0,1), by the Kanter representation.
double sample_one_sided_stable(double a, const NoiseStream& s, std::uint64_t purpose,
                               std::uint64_t step, std::uint32_t draw_base);

/// Real part of the empirical characteristic function,
/// (1/M) sum_m cos<u, x_m>, over a flat row-major sample array.
/// Throws on an empty sample set.
double empirical_cf(const std::vector<double>& samples_flat, int dim, const double* u);

}  // namespace stablemv

#endif
