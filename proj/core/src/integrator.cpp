#include "stablemv/integrator.hpp"

#include <cmath>
#include <stdexcept>

#include "stablemv/parallel.hpp"

namespace stablemv {

namespace {

double law_param(const std::vector<double>& v, int i) {
  return v.size() == 1 ? v[0] : v[static_cast<std::size_t>(i)];
}

}  // namespace

void InitialLaw::validate(int dim) const {
  auto check = [dim](const std::vector<double>& v, const char* name) {
    if (v.size() != 1 && static_cast<int>(v.size()) != dim)
      throw std::invalid_argument(std::string("InitialLaw: ") + name +
                                  " must have 1 or dim entries");
  };
  check(a, "a");
  if (kind == InitKind::Gaussian) {
    check(b, "b");
    for (double sd : b)
      if (!(sd >= 0.0)) throw std::invalid_argument("InitialLaw: sd must be >= 0");
  } else if (kind == InitKind::Uniform) {
    check(b, "b");
    for (int i = 0; i < dim; ++i)
      if (!(law_param(a, i) <= law_param(b, i)))
        throw std::invalid_argument("InitialLaw: uniform bounds out of order");
  }
  if (a.empty()) throw std::invalid_argument("InitialLaw: a must be set");
}

void InitialLaw::sample(const NoiseStream& s, int dim, double* out) const {
  switch (kind) {
    case InitKind::PointMass:
      for (int i = 0; i < dim; ++i) out[i] = law_param(a, i);
      return;
    case InitKind::Gaussian:
      for (int i = 0; i < dim; ++i)
        out[i] = law_param(a, i) +
                 law_param(b, i) * rng::gaussian(s, rng::kPurposeInitial, 0,
                                                 static_cast<std::uint32_t>(i));
      return;
    case InitKind::Uniform:
      for (int i = 0; i < dim; ++i) {
        double lo = law_param(a, i), hi = law_param(b, i);
        out[i] = lo + (hi - lo) * rng::uniform01(s, rng::kPurposeInitial, 0,
                                                 static_cast<std::uint32_t>(i));
      }
      return;
  }
}

int SystemConfig::step_count() const {
  int k = static_cast<int>(std::lround(horizon / step));
  return k < 1 ? 1 : k;
}

void SystemConfig::validate() const {
  if (particle_count < 1)
    throw std::invalid_argument("SystemConfig: particle_count must be >= 1");
  if (!(step > 0.0 && step < std::exp(-1.0)))
    throw std::invalid_argument("SystemConfig: step must lie in (0, 1/e)");
  if (!(horizon > 0.0)) throw std::invalid_argument("SystemConfig: horizon must be positive");
  if (fine_substeps < 1)
    throw std::invalid_argument("SystemConfig: fine_substeps must be >= 1");
  noise.validate();
  drift.check_compatible(noise.alpha);
  int drift_dim = drift.kind == DriftKind::Mollified ? drift.base->dim : drift.dim;
  if (drift_dim != noise.dim)
    throw std::invalid_argument("SystemConfig: drift.dim must equal noise.dim");
  init.validate(noise.dim);
}

EmpiricalMeasure LatticePath::measure_at(int k) const {
  if (k < 0 || k > steps) throw std::out_of_range("LatticePath: lattice index out of range");
  std::vector<double> pts(states.begin() + static_cast<std::size_t>(k) * particles * dim,
                          states.begin() + static_cast<std::size_t>(k + 1) * particles * dim);
  return EmpiricalMeasure(dim, std::move(pts));
}

void em_step(const std::vector<double>& states, const EmpiricalMeasure& empirical,
             const DriftSpec& drift, double delta, const std::vector<double>& increments,
             int particle_count, std::vector<double>& out, int threads) {
  const int d = empirical.dim();
  const std::size_t total = static_cast<std::size_t>(particle_count) * d;
  if (states.size() != total || increments.size() != total)
    throw std::invalid_argument("em_step: state/increment layout mismatch");
  if (empirical.count() != particle_count)
    throw std::invalid_argument("em_step: empirical measure size mismatch");
  out.resize(total);
  FrozenDrift frozen(drift, empirical);
  const double bound = drift.sup_bound() * (1.0 + 1e-12);
  parallel_for(particle_count, threads, [&](int lo, int hi) {
    std::vector<double> b(d);
    for (int i = lo; i < hi; ++i) {
      const double* x = states.data() + static_cast<std::size_t>(i) * d;
      frozen.eval(x, b.data());
      for (int c = 0; c < d; ++c)
        if (!(std::fabs(b[c]) <= bound))
          throw std::logic_error("em_step: drift influence bound violated");
      double* y = out.data() + static_cast<std::size_t>(i) * d;
      for (int c = 0; c < d; ++c) y[c] = x[c] + b[c] * delta + increments[i * d + c];
    }
  });
}

std::vector<double> draw_fine_increments(const StableParams& p, std::uint64_t seed,
                                         int particles, int fine_steps, double dt_fine,
                                         int threads) {
  std::vector<double> out(static_cast<std::size_t>(fine_steps) * particles * p.dim);
  parallel_for(particles, threads, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      NoiseStream s{seed, static_cast<std::uint64_t>(i)};
      for (int k = 0; k < fine_steps; ++k)
        sample_increment(p, dt_fine, s, static_cast<std::uint64_t>(k),
                         out.data() + (static_cast<std::size_t>(k) * particles + i) * p.dim);
    }
  });
  return out;
}

std::vector<double> draw_initial_states(const InitialLaw& law, const StableParams& p,
                                        std::uint64_t seed, int particles) {
  std::vector<double> out(static_cast<std::size_t>(particles) * p.dim);
  for (int i = 0; i < particles; ++i) {
    NoiseStream s{seed, static_cast<std::uint64_t>(i)};
    law.sample(s, p.dim, out.data() + static_cast<std::size_t>(i) * p.dim);
  }
  return out;
}

LatticePath integrate(const SystemConfig& cfg, const std::vector<double>& initial,
                      const std::vector<double>& fine_increments,
                      const std::vector<EmpiricalMeasure>* flow) {
  const int n = cfg.particle_count;
  const int d = cfg.noise.dim;
  const int steps = cfg.step_count();
  const int m = cfg.fine_substeps;
  const std::size_t slab = static_cast<std::size_t>(n) * d;
  if (initial.size() != slab)
    throw std::invalid_argument("integrate: initial state layout mismatch");
  if (fine_increments.size() != slab * steps * m)
    throw std::invalid_argument("integrate: fine increment layout mismatch");
  if (flow && static_cast<int>(flow->size()) != steps &&
      static_cast<int>(flow->size()) != steps + 1)
    throw std::invalid_argument("flow length mismatch");

  LatticePath path;
  path.delta = cfg.step;
  path.dim = d;
  path.particles = n;
  path.steps = steps;
  path.fine_substeps = m;
  path.states.resize(slab * (steps + 1));
  path.increments.resize(slab * steps);
  path.drifts.resize(slab * steps);
  if (m > 1) path.fine_increments = fine_increments;
  std::copy(initial.begin(), initial.end(), path.states.begin());

  const double bound = cfg.drift.sup_bound() * (1.0 + 1e-12);
  std::vector<double> cur(initial), next(slab);
  for (int k = 0; k < steps; ++k) {
    // per-step sum of the fine increments, kept for inspection
    double* inc = path.increments.data() + slab * k;
    for (int j = 0; j < m; ++j) {
      const double* fine = fine_increments.data() + slab * (static_cast<std::size_t>(k) * m + j);
      if (j == 0)
        std::copy(fine, fine + slab, inc);
      else
        for (std::size_t t = 0; t < slab; ++t) inc[t] += fine[t];
    }

    const EmpiricalMeasure mu = flow ? (*flow)[k] : EmpiricalMeasure(d, cur);
    FrozenDrift frozen(cfg.drift, mu);
    parallel_for(n, cfg.threads, [&](int lo, int hi) {
      std::vector<double> b(d);
      for (int i = lo; i < hi; ++i) {
        const double* x = cur.data() + static_cast<std::size_t>(i) * d;
        frozen.eval(x, b.data());
        for (int c = 0; c < d; ++c)
          if (!(std::fabs(b[c]) <= bound))
            throw std::logic_error("integrate: drift influence bound violated");
        double* y = next.data() + static_cast<std::size_t>(i) * d;
        double* slabp = path.drifts.data() + slab * k + static_cast<std::size_t>(i) * d;
        // fine increments are added in lattice order, so a refined run
        // driven by the same noise reproduces these sums bit-for-bit
        for (int c = 0; c < d; ++c) {
          slabp[c] = b[c] * cfg.step;
          y[c] = x[c] + slabp[c];
        }
        for (int j = 0; j < m; ++j) {
          const double* fine =
              fine_increments.data() + slab * (static_cast<std::size_t>(k) * m + j) +
              static_cast<std::size_t>(i) * d;
          for (int c = 0; c < d; ++c) y[c] += fine[c];
        }
      }
    });

    std::copy(next.begin(), next.end(), path.states.begin() + slab * (k + 1));
    cur.swap(next);
  }
  return path;
}

LatticePath reintegrate(const SystemConfig& cfg, const LatticePath& path) {
  const std::size_t slab = static_cast<std::size_t>(path.particles) * path.dim;
  std::vector<double> initial(path.states.begin(), path.states.begin() + slab);
  const std::vector<double>& fine =
      path.fine_substeps > 1 ? path.fine_increments : path.increments;
  SystemConfig sys = cfg;
  sys.step = path.delta;
  sys.horizon = path.steps * path.delta;
  sys.fine_substeps = path.fine_substeps;
  sys.particle_count = path.particles;
  return integrate(sys, initial, fine);
}

LatticePath simulate_interacting(const SystemConfig& cfg) {
  cfg.validate();
  auto x0 = draw_initial_states(cfg.init, cfg.noise, cfg.seed, cfg.particle_count);
  auto noise = draw_fine_increments(cfg.noise, cfg.seed, cfg.particle_count,
                                    cfg.step_count() * cfg.fine_substeps,
                                    cfg.step / cfg.fine_substeps, cfg.threads);
  return integrate(cfg, x0, noise);
}

LatticePath simulate_frozen_flow(const SystemConfig& cfg,
                                 const std::vector<EmpiricalMeasure>& flow) {
  cfg.validate();
  auto x0 = draw_initial_states(cfg.init, cfg.noise, cfg.seed, cfg.particle_count);
  auto noise = draw_fine_increments(cfg.noise, cfg.seed, cfg.particle_count,
                                    cfg.step_count() * cfg.fine_substeps,
                                    cfg.step / cfg.fine_substeps, cfg.threads);
  return integrate(cfg, x0, noise, &flow);
}

std::pair<LatticePath, LatticePath> coupled_refinement(const SystemConfig& cfg, int factor) {
  if (factor < 2) throw std::invalid_argument("coupled_refinement: factor must be >= 2");
  cfg.validate();
  const int steps = cfg.step_count();

  SystemConfig fine = cfg;
  fine.step = cfg.step / factor;
  fine.horizon = steps * cfg.step;
  fine.fine_substeps = 1;

  auto x0 = draw_initial_states(cfg.init, cfg.noise, cfg.seed, cfg.particle_count);
  auto noise = draw_fine_increments(cfg.noise, cfg.seed, cfg.particle_count,
                                    steps * factor, fine.step, cfg.threads);

  SystemConfig coarse = cfg;
  coarse.fine_substeps = factor;
  LatticePath coarse_path = integrate(coarse, x0, noise);
  LatticePath fine_path = integrate(fine, x0, noise);
  return {std::move(coarse_path), std::move(fine_path)};
}

}  // namespace stablemv
