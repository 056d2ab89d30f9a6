#include "stablemv/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stablemv {

void StableParams::validate() const {
  if (dim < 1) throw std::invalid_argument("StableParams: dim must be >= 1");
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::invalid_argument("StableParams: alpha must lie in (1,2)");
  if (!(scale > 0.0)) throw std::invalid_argument("StableParams: scale must be positive");
}

namespace rng {
namespace {

// splitmix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t particle,
                                  std::uint64_t purpose, std::uint64_t step,
                                  std::uint64_t draw) {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ particle);
  h = mix64(h ^ (purpose * 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ step);
  h = mix64(h ^ draw);
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed ^ 0x5bf0a8b1457a4c02ULL) ^ index);
}

double uniform01(const NoiseStream& s, std::uint64_t purpose, std::uint64_t step,
                 std::uint32_t draw, std::uint32_t salt) {
  std::uint64_t key = static_cast<std::uint64_t>(draw) |
                      (static_cast<std::uint64_t>(salt) << 32);
  std::uint64_t h = counter_hash(s.seed, s.particle, purpose, step, key);
  double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  // 0 is possible (probability 2^-53); the open interval is required by
  // the CMS/Kanter formulas.
  std::uint32_t extra = salt;
  while (u == 0.0) {
    ++extra;
    key = static_cast<std::uint64_t>(draw) | (static_cast<std::uint64_t>(extra) << 32);
    h = counter_hash(s.seed, s.particle, purpose, step, key);
    u = static_cast<double>(h >> 11) * 0x1.0p-53;
  }
  return u;
}

double gaussian(const NoiseStream& s, std::uint64_t purpose, std::uint64_t step,
                std::uint32_t draw_pair) {
  double u1 = uniform01(s, purpose, step, 2 * draw_pair);
  double u2 = uniform01(s, purpose, step, 2 * draw_pair + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

double characteristic_exponent(const StableParams& p, const double* u) {
  if (p.mode == SpectralMode::Isotropic) {
    double s2 = 0.0;
    for (int i = 0; i < p.dim; ++i) s2 += u[i] * u[i];
    return p.scale * std::pow(s2, 0.5 * p.alpha);
  }
  double acc = 0.0;
  for (int i = 0; i < p.dim; ++i) acc += std::pow(std::fabs(u[i]), p.alpha);
  return p.scale * acc;
}

double characteristic_exponent(const StableParams& p, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != p.dim)
    throw std::invalid_argument("characteristic_exponent: dimension mismatch");
  return characteristic_exponent(p, u.data());
}

double sample_standard_sas(double alpha, const NoiseStream& s, std::uint64_t purpose,
                           std::uint64_t step, std::uint32_t draw_base) {
  constexpr double pi = std::numbers::pi;
  // U uniform on (-pi/2, pi/2), W exponential(1). Re-draw the endpoints
  // of the parametrization (possible in floating point).
  double u1, theta;
  std::uint32_t salt = 0;
  do {
    u1 = rng::uniform01(s, purpose, step, draw_base, salt++);
    theta = pi * (u1 - 0.5);
  } while (std::cos(theta) == 0.0 || u1 == 0.5 * std::floor(2.0 * u1));
  double w = -std::log(rng::uniform01(s, purpose, step, draw_base + 1));

  // Chambers-Mallows-Stuck, symmetric case: CF exp(-|u|^alpha).
  double a = std::sin(alpha * theta) / std::pow(std::cos(theta), 1.0 / alpha);
  double b = std::pow(std::cos((1.0 - alpha) * theta) / w, (1.0 - alpha) / alpha);
  return a * b;
}

double sample_one_sided_stable(double a, const NoiseStream& s, std::uint64_t purpose,
                               std::uint64_t step, std::uint32_t draw_base) {
  constexpr double pi = std::numbers::pi;
  // Kanter: U uniform on (0,pi), W exponential(1),
  //   S = [sin((1-a)U)/W]^((1-a)/a) * sin(aU) / sin(U)^(1/a)
  // has Laplace transform exp(-lambda^a).
  double u1, theta;
  std::uint32_t salt = 0;
  do {
    u1 = rng::uniform01(s, purpose, step, draw_base, salt++);
    theta = pi * u1;
  } while (std::sin(theta) == 0.0);
  double w = -std::log(rng::uniform01(s, purpose, step, draw_base + 1));

  double ratio = std::sin((1.0 - a) * theta) / w;
  return std::pow(ratio, (1.0 - a) / a) * std::sin(a * theta) /
         std::pow(std::sin(theta), 1.0 / a);
}

void sample_increment(const StableParams& p, double dt, const NoiseStream& s,
                      std::uint64_t step, double* out) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be positive");
  const double unit = std::pow(p.scale * dt, 1.0 / p.alpha);
  if (p.mode == SpectralMode::PerAxis) {
    // Independent 1-D SaS coordinates; 2 uniforms per coordinate.
    for (int i = 0; i < p.dim; ++i)
      out[i] = unit * sample_standard_sas(p.alpha, s, rng::kPurposeIncrement, step,
                                          static_cast<std::uint32_t>(2 * i));
    return;
  }
  // Isotropic: subordinated Gaussian. S positive (alpha/2)-stable with
  // Laplace transform exp(-lambda^(alpha/2)), Z standard d-dim normal;
  // sqrt(2 S) Z has CF exp(-|u|^alpha) exactly.
  double sub = sample_one_sided_stable(0.5 * p.alpha, s, rng::kPurposeIncrement, step, 0);
  double radial = std::sqrt(2.0 * sub) * unit;
  // Gaussian draws start after the 2 subordinator uniforms.
  for (int i = 0; i < p.dim; ++i)
    out[i] = radial * rng::gaussian(s, rng::kPurposeIncrement, step,
                                    static_cast<std::uint32_t>(1 + i));
}

std::vector<double> sample_increment(const StableParams& p, double dt,
                                     const NoiseStream& s, std::uint64_t step) {
  std::vector<double> out(p.dim);
  sample_increment(p, dt, s, step, out.data());
  return out;
}

double empirical_cf(const std::vector<double>& samples_flat, int dim, const double* u) {
  if (samples_flat.empty()) throw std::invalid_argument("empty sample set");
  if (dim < 1 || samples_flat.size() % dim != 0)
    throw std::invalid_argument("empirical_cf: bad sample layout");
  const std::size_t m = samples_flat.size() / dim;
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double dot = 0.0;
    for (int i = 0; i < dim; ++i) dot += u[i] * samples_flat[k * dim + i];
    acc += std::cos(dot);
  }
  return acc / static_cast<double>(m);
}

}  // namespace stablemv
