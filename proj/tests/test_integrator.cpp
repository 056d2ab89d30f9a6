#include <cmath>
#include <vector>

#include <doctest.h>

#include "stablemv/integrator.hpp"

using namespace stablemv;

namespace {

DriftSpec holder_mean(int dim, double a, double c, double beta) {
  DriftSpec s;
  s.dim = dim;
  s.kind = DriftKind::HolderMean;
  s.holder_amp = a;
  s.interaction_amp = c;
  s.beta = beta;
  return s;
}

SystemConfig base_config() {
  SystemConfig cfg;
  cfg.particle_count = 8;
  cfg.step = 1.0 / 16;
  cfg.horizon = 0.5;
  cfg.noise = StableParams{1, 1.5, SpectralMode::Isotropic, 1.0};
  cfg.drift = holder_mean(1, 1.0, 0.5, 0.75);
  cfg.init.kind = InitKind::Gaussian;
  cfg.init.a = {0.0};
  cfg.init.b = {1.0};
  cfg.seed = 2024;
  return cfg;
}

// Independent scalar EM reference: a single particle whose empirical
// measure is its own Dirac mass.
std::vector<double> single_particle_oracle(const SystemConfig& cfg) {
  auto x0 = draw_initial_states(cfg.init, cfg.noise, cfg.seed, 1);
  double x = x0[0];
  std::vector<double> out{x};
  const DriftSpec& d = cfg.drift;
  NoiseStream s{cfg.seed, 0};
  for (int k = 0; k < cfg.step_count(); ++k) {
    double interaction = std::tanh(x) * (d.interaction_amp / 1);
    double b = d.holder_amp * phi_beta(x, d.beta);
    b += interaction;
    double inc = sample_increment(cfg.noise, cfg.step, s, static_cast<std::uint64_t>(k))[0];
    x = x + b * cfg.step + inc;
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("config validation") {
  SystemConfig cfg = base_config();
  CHECK_NOTHROW(cfg.validate());

  SystemConfig bad = cfg;
  bad.step = 0.5;  // >= 1/e
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.particle_count = 0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.drift.beta = 0.2;  // 2*0.2 + 1.5 < 2
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.noise.dim = 2;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("horizon is adjusted to the lattice") {
  SystemConfig cfg = base_config();
  cfg.horizon = 0.49;
  CHECK(cfg.step_count() == 8);
  CHECK(cfg.adjusted_horizon() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("em_step closed forms") {
  // zero drift: new = states + increments, bit-exact
  DriftSpec zero;
  std::vector<double> states{0.5, -1.25, 3.0};
  std::vector<double> inc{0.125, -2.5, 1e-3};
  EmpiricalMeasure mu(1, states);
  std::vector<double> out;
  em_step(states, mu, zero, 0.1, inc, 3, out);
  for (int i = 0; i < 3; ++i) CHECK(out[i] == states[i] + inc[i]);

  // N=1 Holder drift
  auto spec = holder_mean(1, 1.0, 0.0, 0.5);
  std::vector<double> s1{1.0}, i1{0.0}, o1;
  em_step(s1, EmpiricalMeasure(1, s1), spec, 0.1, i1, 1, o1);
  CHECK(o1[0] == doctest::Approx(1.1).epsilon(1e-12));

  // N=2 interaction-only drift
  auto inter = holder_mean(1, 0.0, 1.0, 0.5);
  std::vector<double> s2{0.0, 2.0}, i2{0.0, 0.0}, o2;
  em_step(s2, EmpiricalMeasure(1, s2), inter, 0.1, i2, 2, o2);
  double shift = 0.1 * (std::tanh(0.0) + std::tanh(2.0)) / 2.0;
  CHECK(shift == doctest::Approx(0.048201).epsilon(1e-4));
  CHECK(o2[0] == doctest::Approx(shift).epsilon(1e-12));
  CHECK(o2[1] == doctest::Approx(2.0 + shift).epsilon(1e-12));

  std::vector<double> wrong{0.0};
  CHECK_THROWS(em_step(s2, EmpiricalMeasure(1, s2), inter, 0.1, wrong, 2, o2));
}

TEST_CASE("zero drift paths are pure Levy sums, bit-exact") {
  SystemConfig cfg = base_config();
  cfg.drift = DriftSpec{};  // zero
  cfg.init.kind = InitKind::PointMass;
  cfg.init.a = {0.0};
  LatticePath path = simulate_interacting(cfg);
  for (int i = 0; i < cfg.particle_count; ++i) {
    double x = 0.0;
    for (int k = 0; k < path.steps; ++k) x += path.increment(k, i)[0];
    CHECK(path.state(path.steps, i)[0] == x);
  }
}

TEST_CASE("N=1 run equals the independent scalar oracle bit-exactly") {
  SystemConfig cfg = base_config();
  cfg.particle_count = 1;
  LatticePath path = simulate_interacting(cfg);
  auto oracle = single_particle_oracle(cfg);
  REQUIRE(static_cast<int>(oracle.size()) == path.steps + 1);
  for (int k = 0; k <= path.steps; ++k) CHECK(path.state(k, 0)[0] == oracle[k]);
}

TEST_CASE("replay from stored increments is bit-identical") {
  SystemConfig cfg = base_config();
  cfg.particle_count = 16;
  cfg.fine_substeps = 4;
  LatticePath path = simulate_interacting(cfg);
  LatticePath again = reintegrate(cfg, path);
  CHECK(again.states == path.states);
  CHECK(again.increments == path.increments);
}

TEST_CASE("determinism across thread counts") {
  SystemConfig cfg = base_config();
  cfg.particle_count = 32;
  LatticePath one = simulate_interacting(cfg);
  cfg.threads = 4;
  LatticePath many = simulate_interacting(cfg);
  CHECK(one.states == many.states);
}

TEST_CASE("exchangeability: joint relabeling permutes the paths") {
  SystemConfig cfg = base_config();
  cfg.particle_count = 4;
  cfg.drift = holder_mean(1, 1.0, 0.0, 0.75);  // no interaction: bit-exact
  auto x0 = draw_initial_states(cfg.init, cfg.noise, cfg.seed, 4);
  auto noise = draw_fine_increments(cfg.noise, cfg.seed, 4, cfg.step_count(), cfg.step);
  LatticePath path = integrate(cfg, x0, noise);

  std::vector<int> perm{2, 0, 3, 1};
  std::vector<double> px0(4), pnoise(noise.size());
  for (int i = 0; i < 4; ++i) px0[i] = x0[perm[i]];
  for (int k = 0; k < cfg.step_count(); ++k)
    for (int i = 0; i < 4; ++i)
      pnoise[static_cast<std::size_t>(k) * 4 + i] =
          noise[static_cast<std::size_t>(k) * 4 + perm[i]];
  LatticePath permuted = integrate(cfg, px0, pnoise);
  for (int k = 0; k <= path.steps; ++k)
    for (int i = 0; i < 4; ++i)
      CHECK(permuted.state(k, i)[0] == path.state(k, perm[i])[0]);

  // with interaction the empirical mean ties particles together; the
  // permuted system matches to rounding
  cfg.drift = holder_mean(1, 1.0, 0.5, 0.75);
  LatticePath a = integrate(cfg, x0, noise);
  LatticePath b = integrate(cfg, px0, pnoise);
  for (int i = 0; i < 4; ++i)
    CHECK(b.state(a.steps, i)[0] ==
          doctest::Approx(a.state(a.steps, perm[i])[0]).epsilon(1e-10));
}

TEST_CASE("frozen flow reproduces an interacting run fed its own measures") {
  SystemConfig cfg = base_config();
  LatticePath inter = simulate_interacting(cfg);
  std::vector<EmpiricalMeasure> flow;
  for (int k = 0; k < inter.steps; ++k) flow.push_back(inter.measure_at(k));
  LatticePath frozen = simulate_frozen_flow(cfg, flow);
  CHECK(frozen.states == inter.states);

  std::vector<EmpiricalMeasure> short_flow(flow.begin(), flow.begin() + 2);
  CHECK_THROWS_WITH(simulate_frozen_flow(cfg, short_flow), "flow length mismatch");
}

TEST_CASE("frozen flow ignores the flow when the drift has no measure term") {
  SystemConfig cfg = base_config();
  cfg.drift = holder_mean(1, 1.0, 0.0, 0.75);
  LatticePath inter = simulate_interacting(cfg);
  std::vector<EmpiricalMeasure> junk(static_cast<std::size_t>(inter.steps),
                                     EmpiricalMeasure(1, std::vector<double>(8, 42.0)));
  LatticePath frozen = simulate_frozen_flow(cfg, junk);
  CHECK(frozen.states == inter.states);
}

TEST_CASE("coupled refinement shares the Levy path") {
  SystemConfig cfg = base_config();
  cfg.drift = DriftSpec{};  // zero drift
  auto [coarse, fine] = coupled_refinement(cfg, 4);
  REQUIRE(fine.steps == 4 * coarse.steps);
  for (int k = 0; k <= coarse.steps; ++k)
    for (int i = 0; i < cfg.particle_count; ++i)
      CHECK(coarse.state(k, i)[0] == fine.state(4 * k, i)[0]);

  CHECK_THROWS_WITH(coupled_refinement(cfg, 1), "coupled_refinement: factor must be >= 2");
}

TEST_CASE("initial law samplers") {
  StableParams p{2, 1.5, SpectralMode::Isotropic, 1.0};
  InitialLaw point{InitKind::PointMass, {1.0, -2.0}, {}};
  auto x = draw_initial_states(point, p, 9, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(x[2 * i] == 1.0);
    CHECK(x[2 * i + 1] == -2.0);
  }

  InitialLaw uni{InitKind::Uniform, {0.0}, {1.0}};
  auto u = draw_initial_states(uni, p, 9, 100);
  for (double v : u) CHECK((v >= 0.0 && v <= 1.0));

  InitialLaw bad{InitKind::Uniform, {1.0}, {0.0}};
  CHECK_THROWS(bad.validate(2));
}
