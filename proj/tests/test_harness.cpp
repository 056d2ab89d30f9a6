#include <cmath>
#include <vector>

#include <doctest.h>

#include "stablemv/harness.hpp"
#include "stablemv/noise.hpp"

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

StudyConfig small_study() {
  StudyConfig cfg;
  cfg.base.particle_count = 16;
  cfg.base.step = 1.0 / 16;
  cfg.base.horizon = 0.5;
  cfg.base.noise = StableParams{1, 1.5, SpectralMode::Isotropic, 1.0};
  cfg.base.drift = holder_mean(1, 1.0, 0.5, 0.75);
  cfg.base.init.kind = InitKind::Gaussian;
  cfg.base.init.a = {0.0};
  cfg.base.init.b = {1.0};
  cfg.base.seed = 99;
  cfg.replications = 4;
  cfg.groups = 2;
  return cfg;
}

}  // namespace

TEST_CASE("log-log slope fitting") {
  std::vector<double> xs{1.0, 2.0, 4.0, 8.0};
  SlopeFit fit = fit_loglog_slope(xs, xs);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.stderr_ == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 * std::sqrt(x));
  fit = fit_loglog_slope(xs, ys);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_WITH(fit_loglog_slope({1.0, 2.0, 3.0}, {1.0, -1.0, 2.0}),
                    "log of nonpositive");
  CHECK_THROWS(fit_loglog_slope({1.0, 2.0}, {1.0, 2.0}));
}

TEST_CASE("slope recovery under multiplicative noise") {
  std::vector<double> xs, ys;
  NoiseStream s{5, 0};
  for (int i = 0; i < 8; ++i) {
    double x = std::pow(2.0, -i);
    double jitter =
        1.0 + 0.05 * (2.0 * rng::uniform01(s, rng::kPurposeScratch, 0, i) - 1.0);
    xs.push_back(x);
    ys.push_back(std::pow(x, 0.667) * jitter);
  }
  SlopeFit fit = fit_loglog_slope(xs, ys);
  CHECK(std::fabs(fit.slope - 0.667) <= 0.05);
}

TEST_CASE("study config validation") {
  StudyConfig cfg = small_study();
  cfg.grid = {1.0 / 64, 1.0 / 32, 1.0 / 16};
  CHECK_NOTHROW(cfg.validate());

  StudyConfig bad = cfg;
  bad.error_p = 1.6;  // >= alpha
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.moment_q = 2.0 * cfg.error_p;  // excluded boundary
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.grid = {1.0 / 16, 1.0 / 16};
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.grid = {1.0 / 16};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("default q respects the open interval") {
  StudyConfig cfg = small_study();
  cfg.grid = {1.0 / 64, 1.0 / 32, 1.0 / 16};
  double q = cfg.resolved_q();
  CHECK(q > cfg.error_p);
  CHECK(q < cfg.base.noise.alpha);
}

TEST_CASE("stepsize study: zero drift is degenerate and passes") {
  StudyConfig cfg = small_study();
  cfg.base.drift = DriftSpec{};
  cfg.grid = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
  StudyReport rep = stepsize_study(cfg);
  CHECK(rep.degenerate);
  CHECK(rep.pass);
  for (double e : rep.errors) CHECK(e == 0.0);
}

TEST_CASE("stepsize study rejects non-nested grids") {
  StudyConfig cfg = small_study();
  cfg.grid = {1.0 / 64, 1.0 / 48, 1.0 / 16};
  CHECK_THROWS_WITH(stepsize_study(cfg), "non-nested grid");
}

TEST_CASE("stepsize study is reproducible") {
  StudyConfig cfg = small_study();
  cfg.grid = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
  StudyReport a = stepsize_study(cfg);
  cfg.base.threads = 4;
  StudyReport b = stepsize_study(cfg);
  CHECK(a.errors == b.errors);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("chaos study guards") {
  StudyConfig cfg = small_study();
  cfg.grid = {4, 8, 16};
  cfg.reference = 16;  // in grid and < 4x largest
  CHECK_THROWS(chaos_study(cfg));
  cfg.reference = 32;  // < 4x largest
  CHECK_THROWS(chaos_study(cfg));
}

TEST_CASE("moment study recovers the 1/alpha displacement scaling") {
  StudyConfig cfg = small_study();
  cfg.base.particle_count = 64;
  cfg.grid = {1.0 / 256, 1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16};
  cfg.replications = 4;
  StudyReport rep = moment_study(cfg);
  CHECK(!rep.degenerate);
  CHECK(std::fabs(rep.slope - 1.0 / 1.5) <= 0.15);
  CHECK(rep.pass);
}

TEST_CASE("empirical rate study guards and degenerate case") {
  StudyConfig cfg = small_study();
  cfg.grid = {8, 16, 32, 64};
  cfg.base.init.kind = InitKind::PointMass;
  cfg.base.init.a = {1.0};
  StudyReport rep = empirical_rate_study(cfg);
  CHECK(rep.degenerate);
  CHECK(rep.pass);

  cfg.grid = {7, 16, 32};  // 7 does not divide the proxy size
  CHECK_THROWS(empirical_rate_study(cfg));

  cfg.grid = {8, 16, 32};
  cfg.base.noise.dim = 2;
  cfg.base.drift.dim = 2;
  CHECK_THROWS(empirical_rate_study(cfg));
}

TEST_CASE("mollification study: measure-only drift is a no-op") {
  StudyConfig cfg = small_study();
  cfg.base.drift = holder_mean(1, 0.0, 1.0, 0.75);
  cfg.grid = {2, 4, 8};
  cfg.replications = 2;
  StudyReport rep = mollification_study(cfg);
  CHECK(rep.degenerate);
  CHECK(rep.pass);
}

TEST_CASE("sup-lattice error of identical paths is zero") {
  StudyConfig cfg = small_study();
  LatticePath path = simulate_interacting(cfg.base);
  CHECK(sup_lattice_p_error(path, path, 1.0) == 0.0);
}

TEST_CASE("report serialization carries the grid") {
  StudyConfig cfg = small_study();
  cfg.base.particle_count = 64;
  cfg.grid = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
  StudyReport rep = moment_study(cfg);
  std::string csv = rep.to_csv();
  CHECK(csv.rfind("grid,error,stderr\n", 0) == 0);
  CHECK(rep.to_json().find("\"study\"") != std::string::npos);
}
