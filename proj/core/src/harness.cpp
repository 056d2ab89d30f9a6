#include "stablemv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stablemv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double pnorm_pow(const double* a, const double* b, int dim, double p) {
  double s2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    double d = a[i] - b[i];
    s2 += d * d;
  }
  return std::pow(s2, 0.5 * p);
}

/// Median of per-group means over the replication values; deterministic
/// split in replication order. Also returns the spread of the group
/// means as a standard error.
void median_of_means(const std::vector<double>& reps, int groups, double& est,
                     double& se) {
  const int r = static_cast<int>(reps.size());
  int g = std::min(groups, r);
  std::vector<double> means(g, 0.0);
  std::vector<int> counts(g, 0);
  for (int i = 0; i < r; ++i) {
    means[i % g] += reps[i];
    ++counts[i % g];
  }
  for (int k = 0; k < g; ++k) means[k] /= counts[k];
  std::vector<double> sorted = means;
  std::sort(sorted.begin(), sorted.end());
  est = g % 2 == 1 ? sorted[g / 2] : 0.5 * (sorted[g / 2 - 1] + sorted[g / 2]);
  if (g < 2) {
    se = 0.0;
    return;
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= g;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  se = std::sqrt(var / (g - 1) / g);
}

bool all_zero(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

std::string echo_config(const StudyConfig& cfg, const char* study) {
  nlohmann::json j;
  j["study"] = study;
  j["grid"] = cfg.grid;
  j["error_p"] = cfg.error_p;
  j["moment_q"] = cfg.resolved_q();
  j["replications"] = cfg.replications;
  j["groups"] = cfg.groups;
  j["reference"] = cfg.reference;
  const SystemConfig& b = cfg.base;
  j["system"] = {{"particles", b.particle_count},
                 {"step", b.step},
                 {"horizon", b.adjusted_horizon()},
                 {"fine_substeps", b.fine_substeps},
                 {"seed", b.seed}};
  j["noise"] = {{"dim", b.noise.dim},
                {"alpha", b.noise.alpha},
                {"mode", b.noise.mode == SpectralMode::Isotropic ? "isotropic" : "per_axis"},
                {"scale", b.noise.scale}};
  const DriftSpec& d = b.drift;
  j["drift"] = {{"kind", d.kind == DriftKind::Zero
                             ? "zero"
                             : (d.kind == DriftKind::HolderMean ? "holder_mean" : "mollified")},
                {"a", d.holder_amp},
                {"c", d.interaction_amp},
                {"beta", d.beta},
                {"kappa", d.kappa}};
  return j.dump();
}

void finish_report(StudyReport& rep, const StudyConfig& cfg,
                   const std::vector<double>& fit_x) {
  rep.seed = cfg.base.seed;
  if (all_zero(rep.errors)) {
    rep.degenerate = true;
    rep.pass = true;
    rep.note += rep.note.empty() ? "degenerate: all-zero error grid" : "";
    return;
  }
  SlopeFit fit = fit_loglog_slope(fit_x, rep.errors);
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  rep.slope_stderr = fit.stderr_;
  double lo = rep.slope - 2.0 * rep.slope_stderr;
  double hi = rep.slope + 2.0 * rep.slope_stderr;
  rep.pass = hi >= rep.band_lo && lo <= rep.band_hi;
}

}  // namespace

double StudyConfig::resolved_q() const {
  return moment_q > 0.0 ? moment_q : 0.5 * (error_p + base.noise.alpha);
}

void StudyConfig::validate() const {
  base.validate();
  const double alpha = base.noise.alpha;
  const double p = error_p;
  const DriftSpec& d = base.drift;
  double kap = d.kind == DriftKind::Mollified ? d.base->kappa : d.kappa;
  if (!(p >= kap && p < alpha))
    throw std::invalid_argument("StudyConfig: error_p must lie in [kappa, alpha)");
  const double q = resolved_q();
  if (!(q > p && q < alpha))
    throw std::invalid_argument("StudyConfig: moment_q must lie in (error_p, alpha)");
  const int dim = base.noise.dim;
  if (q == 2.0 * p || (dim > p && q == dim / (dim - p)))
    throw std::invalid_argument("StudyConfig: moment_q hits an excluded boundary value");
  if (grid.size() < 2) throw std::invalid_argument("StudyConfig: grid needs >= 2 points");
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    inc = inc && grid[i] > grid[i - 1];
    dec = dec && grid[i] < grid[i - 1];
  }
  if (!inc && !dec) throw std::invalid_argument("StudyConfig: grid must be strictly monotone");
  if (replications < 1) throw std::invalid_argument("StudyConfig: replications must be >= 1");
  if (groups < 1) throw std::invalid_argument("StudyConfig: groups must be >= 1");
}

SlopeFit fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw std::invalid_argument("fit_loglog_slope: need >= 3 matching points");
  const int n = static_cast<int>(xs.size());
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw std::invalid_argument("log of nonpositive");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: degenerate abscissa");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += r * r;
  }
  fit.stderr_ = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return fit;
}

double sup_lattice_p_error(const LatticePath& a, const LatticePath& b, double p) {
  if (a.particles != b.particles || a.dim != b.dim)
    throw std::invalid_argument("sup_lattice_p_error: incompatible paths");
  const int ratio = static_cast<int>(std::lround(a.delta / b.delta));
  if (ratio < 1 || a.steps * ratio != b.steps ||
      std::fabs(a.delta - ratio * b.delta) > 1e-12 * a.delta)
    throw std::invalid_argument("sup_lattice_p_error: lattices are not nested");
  const int n = a.particles;
  const int d = a.dim;
  const bool have_slab = !a.drifts.empty();
  double acc = 0.0;
  std::vector<double> recon(d), slab(d);
  for (int i = 0; i < n; ++i) {
    double sup2 = 0.0;
    for (int k = 0; k < a.steps; ++k) {
      const double* x0 = a.state(k, i);
      const double* x1 = a.state(k + 1, i);
      const double* ainc = a.increment(k, i);
      // reconstruct the coarse path at fine lattice times: the drift
      // slab accrues linearly, the noise is the shared fine increments
      // added in lattice order (running sum matches the fine run when
      // the drift vanishes)
      for (int c = 0; c < d; ++c) {
        recon[c] = x0[c];
        slab[c] = have_slab ? a.drift_slab(k, i)[c] : x1[c] - x0[c] - ainc[c];
      }
      for (int j = 0; j < ratio; ++j) {
        double frac = static_cast<double>(j) / ratio;
        const double* bx = b.state(k * ratio + j, i);
        double d2 = 0.0;
        for (int c = 0; c < d; ++c) {
          double diff = (recon[c] + frac * slab[c]) - bx[c];
          d2 += diff * diff;
        }
        sup2 = std::max(sup2, d2);
        const double* binc = b.increment(k * ratio + j, i);
        for (int c = 0; c < d; ++c) recon[c] += binc[c];
      }
    }
    // terminal time
    double d2 = 0.0;
    const double* xa = a.state(a.steps, i);
    const double* xb = b.state(b.steps, i);
    for (int c = 0; c < d; ++c) {
      double diff = xa[c] - xb[c];
      d2 += diff * diff;
    }
    sup2 = std::max(sup2, d2);
    acc += std::pow(sup2, 0.5 * p);
  }
  return acc / n;
}

StudyReport stepsize_study(const StudyConfig& cfg) {
  cfg.validate();
  std::vector<double> deltas = cfg.grid;
  std::sort(deltas.begin(), deltas.end());
  const double dfine = deltas.front();
  std::vector<int> factors;
  for (double d : deltas) {
    double f = d / dfine;
    int fi = static_cast<int>(std::lround(f));
    if (std::fabs(f - fi) > 1e-9) throw std::invalid_argument("non-nested grid");
    factors.push_back(fi);
  }
  const int steps_fine = static_cast<int>(std::lround(cfg.base.horizon / dfine));
  for (int f : factors)
    if (steps_fine % f != 0) throw std::invalid_argument("non-nested grid");

  StudyReport rep;
  rep.study = "stepsize";
  rep.config_echo = echo_config(cfg, "stepsize");
  const std::size_t fitted = deltas.size() - 1;  // reference point excluded
  std::vector<std::vector<double>> per_rep(fitted);

  for (int r = 0; r < cfg.replications; ++r) {
    SystemConfig ref = cfg.base;
    ref.seed = rng::derive_seed(cfg.base.seed, static_cast<std::uint64_t>(r));
    ref.step = dfine;
    ref.horizon = steps_fine * dfine;
    ref.fine_substeps = 1;
    auto x0 = draw_initial_states(ref.init, ref.noise, ref.seed, ref.particle_count);
    auto noise = draw_fine_increments(ref.noise, ref.seed, ref.particle_count, steps_fine,
                                      dfine, ref.threads);
    LatticePath fine_path = integrate(ref, x0, noise);

    for (std::size_t gi = 1; gi < deltas.size(); ++gi) {
      SystemConfig coarse = ref;
      coarse.step = deltas[gi];
      coarse.fine_substeps = factors[gi];
      LatticePath coarse_path = integrate(coarse, x0, noise);
      per_rep[gi - 1].push_back(sup_lattice_p_error(coarse_path, fine_path, cfg.error_p));
    }
  }

  rep.grid.assign(deltas.begin() + 1, deltas.end());
  rep.errors.resize(fitted);
  rep.stderrs.resize(fitted);
  for (std::size_t gi = 0; gi < fitted; ++gi)
    median_of_means(per_rep[gi], cfg.groups, rep.errors[gi], rep.stderrs[gi]);

  const DriftSpec& d = cfg.base.drift;
  double beta = d.kind == DriftKind::Mollified ? d.base->beta : d.beta;
  rep.theory_slope = cfg.error_p * beta / cfg.base.noise.alpha;
  rep.band_lo = rep.theory_slope - 0.15;
  rep.band_hi = kInf;
  finish_report(rep, cfg, rep.grid);
  if (!rep.degenerate && rep.errors.back() <= rep.errors.front()) {
    rep.pass = false;
    rep.note = "monotone sanity failed: error at largest delta does not exceed smallest";
  }
  return rep;
}

StudyReport chaos_study(const StudyConfig& cfg) {
  cfg.validate();
  std::vector<double> ns = cfg.grid;
  std::sort(ns.begin(), ns.end());
  int n_max = static_cast<int>(std::lround(ns.back()));
  int n_ref = cfg.reference > 0.0 ? static_cast<int>(std::lround(cfg.reference)) : 4 * n_max;
  if (n_ref < 4 * n_max)
    throw std::invalid_argument("chaos_study: reference must be >= 4x largest grid N");
  for (double n : ns)
    if (static_cast<int>(std::lround(n)) == n_ref)
      throw std::invalid_argument("chaos_study: reference N must not appear in the grid");

  StudyReport rep;
  rep.study = "chaos";
  rep.config_echo = echo_config(cfg, "chaos");
  std::vector<std::vector<double>> per_rep(ns.size());

  for (int r = 0; r < cfg.replications; ++r) {
    SystemConfig ref = cfg.base;
    ref.seed = rng::derive_seed(cfg.base.seed, static_cast<std::uint64_t>(r));
    ref.particle_count = n_ref;
    LatticePath ref_path = simulate_interacting(ref);

    for (std::size_t gi = 0; gi < ns.size(); ++gi) {
      SystemConfig sys = ref;
      sys.particle_count = static_cast<int>(std::lround(ns[gi]));
      LatticePath path = simulate_interacting(sys);
      // the first N streams and initials of the reference run are
      // shared by construction; compare those particles only
      double acc = 0.0;
      for (int i = 0; i < sys.particle_count; ++i) {
        double sup2 = 0.0;
        for (int k = 0; k <= path.steps; ++k) {
          double d2 = 0.0;
          const double* xa = path.state(k, i);
          const double* xb = ref_path.state(k, i);
          for (int c = 0; c < path.dim; ++c) {
            double diff = xa[c] - xb[c];
            d2 += diff * diff;
          }
          sup2 = std::max(sup2, d2);
        }
        acc += std::pow(sup2, 0.5 * cfg.error_p);
      }
      per_rep[gi].push_back(acc / sys.particle_count);
    }
  }

  rep.grid = ns;
  rep.errors.resize(ns.size());
  rep.stderrs.resize(ns.size());
  for (std::size_t gi = 0; gi < ns.size(); ++gi)
    median_of_means(per_rep[gi], cfg.groups, rep.errors[gi], rep.stderrs[gi]);

  const double p = cfg.error_p;
  const int d = cfg.base.noise.dim;
  if (2.0 * p > d)
    rep.theory_slope = -0.5;
  else if (2.0 * p == d)
    rep.theory_slope = -0.5;  // N^{-1/2} log(1+N); log factor reported only
  else
    rep.theory_slope = -2.0 / d;
  rep.band_lo = -kInf;
  rep.band_hi = -0.3;
  rep.note = "q-moment term N^(p/q-1) with q=" + fmt_double(cfg.resolved_q());
  finish_report(rep, cfg, rep.grid);
  return rep;
}

StudyReport moment_study(const StudyConfig& cfg) {
  cfg.validate();
  std::vector<double> deltas = cfg.grid;
  std::sort(deltas.begin(), deltas.end());

  StudyReport rep;
  rep.study = "moment";
  rep.config_echo = echo_config(cfg, "moment");
  std::vector<std::vector<double>> per_rep(deltas.size());

  for (int r = 0; r < cfg.replications; ++r) {
    for (std::size_t gi = 0; gi < deltas.size(); ++gi) {
      SystemConfig sys = cfg.base;
      sys.seed = rng::derive_seed(cfg.base.seed, static_cast<std::uint64_t>(r));
      sys.step = deltas[gi];
      sys.fine_substeps = 1;
      LatticePath path = simulate_interacting(sys);
      double acc = 0.0;
      for (int k = 0; k < path.steps; ++k)
        for (int i = 0; i < path.particles; ++i)
          acc += pnorm_pow(path.state(k + 1, i), path.state(k, i), path.dim, cfg.error_p);
      per_rep[gi].push_back(acc / (static_cast<double>(path.steps) * path.particles));
    }
  }

  rep.grid = deltas;
  rep.errors.resize(deltas.size());
  rep.stderrs.resize(deltas.size());
  for (std::size_t gi = 0; gi < deltas.size(); ++gi)
    median_of_means(per_rep[gi], cfg.groups, rep.errors[gi], rep.stderrs[gi]);

  rep.theory_slope = cfg.error_p / cfg.base.noise.alpha;
  rep.band_lo = rep.theory_slope - 0.15;
  rep.band_hi = rep.theory_slope + 0.15;
  finish_report(rep, cfg, rep.grid);
  return rep;
}

StudyReport empirical_rate_study(const StudyConfig& cfg) {
  cfg.validate();
  if (cfg.base.noise.dim != 1)
    throw std::invalid_argument("empirical_rate_study: exact W_p path requires dim 1");
  std::vector<double> ns = cfg.grid;
  std::sort(ns.begin(), ns.end());
  int n_max = static_cast<int>(std::lround(ns.back()));
  int n_proxy = cfg.reference > 0.0 ? static_cast<int>(std::lround(cfg.reference)) : 8 * n_max;
  for (double nv : ns) {
    int n = static_cast<int>(std::lround(nv));
    if (n < 1 || n_proxy % n != 0)
      throw std::invalid_argument("empirical_rate_study: proxy size must be a multiple of every grid N");
  }

  StudyReport rep;
  rep.study = "emprate";
  rep.config_echo = echo_config(cfg, "emprate");
  std::vector<std::vector<double>> per_rep(ns.size());
  const double p = cfg.error_p;

  for (int r = 0; r < cfg.replications; ++r) {
    std::uint64_t rs = rng::derive_seed(cfg.base.seed, static_cast<std::uint64_t>(r));
    auto proxy_pts = draw_initial_states(cfg.base.init, cfg.base.noise,
                                         rng::derive_seed(rs, 1), n_proxy);
    EmpiricalMeasure proxy(1, std::move(proxy_pts));
    auto batch = draw_initial_states(cfg.base.init, cfg.base.noise,
                                     rng::derive_seed(rs, 2), n_max);
    for (std::size_t gi = 0; gi < ns.size(); ++gi) {
      int n = static_cast<int>(std::lround(ns[gi]));
      // first n samples of the batch, duplicated to proxy size (exact
      // for equal-weight measures)
      int dup = n_proxy / n;
      std::vector<double> pts;
      pts.reserve(n_proxy);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < dup; ++k) pts.push_back(batch[i]);
      EmpiricalMeasure mu(1, std::move(pts));
      double w = wasserstein_1d(p, mu, proxy);
      per_rep[gi].push_back(std::pow(w, p));
    }
  }

  rep.grid = ns;
  rep.errors.resize(ns.size());
  rep.stderrs.resize(ns.size());
  for (std::size_t gi = 0; gi < ns.size(); ++gi)
    median_of_means(per_rep[gi], cfg.groups, rep.errors[gi], rep.stderrs[gi]);

  const int d = cfg.base.noise.dim;
  rep.theory_slope = 2.0 * p > d ? -0.5 : (2.0 * p == d ? -0.5 : -2.0 / d);
  rep.band_lo = -0.6;
  rep.band_hi = -0.4;
  finish_report(rep, cfg, rep.grid);
  return rep;
}

StudyReport mollification_study(const StudyConfig& cfg) {
  cfg.validate();
  if (cfg.base.drift.kind == DriftKind::Mollified)
    throw std::invalid_argument("mollification_study: base drift is already mollified");
  std::vector<double> levels = cfg.grid;
  std::sort(levels.begin(), levels.end());

  StudyReport rep;
  rep.study = "mollify";
  rep.config_echo = echo_config(cfg, "mollify");
  std::vector<std::vector<double>> per_rep(levels.size());

  for (int r = 0; r < cfg.replications; ++r) {
    SystemConfig base = cfg.base;
    base.seed = rng::derive_seed(cfg.base.seed, static_cast<std::uint64_t>(r));
    auto x0 = draw_initial_states(base.init, base.noise, base.seed, base.particle_count);
    auto noise = draw_fine_increments(base.noise, base.seed, base.particle_count,
                                      base.step_count() * base.fine_substeps,
                                      base.step / base.fine_substeps, base.threads);
    LatticePath plain = integrate(base, x0, noise);

    for (std::size_t gi = 0; gi < levels.size(); ++gi) {
      SystemConfig sys = base;
      sys.drift = mollify_drift(base.drift, static_cast<int>(std::lround(levels[gi])));
      LatticePath path = integrate(sys, x0, noise);
      per_rep[gi].push_back(sup_lattice_p_error(path, plain, cfg.error_p));
    }
  }

  rep.grid = levels;
  rep.errors.resize(levels.size());
  rep.stderrs.resize(levels.size());
  for (std::size_t gi = 0; gi < levels.size(); ++gi)
    median_of_means(per_rep[gi], cfg.groups, rep.errors[gi], rep.stderrs[gi]);

  rep.seed = cfg.base.seed;
  rep.theory_slope = -cfg.error_p * cfg.base.drift.beta;  // error ~ n^(-p beta)
  if (all_zero(rep.errors)) {
    rep.degenerate = true;
    rep.pass = true;
    rep.note = "degenerate: all-zero error grid";
    return rep;
  }
  bool ok = true;
  for (std::size_t gi = 1; gi < levels.size(); ++gi)
    if (rep.errors[gi] > 1.10 * rep.errors[gi - 1]) ok = false;
  if (rep.errors.back() > 0.5 * rep.errors.front()) ok = false;
  bool positive = true;
  for (double e : rep.errors) positive = positive && e > 0.0;
  if (positive) {
    SlopeFit fit = fit_loglog_slope(levels, rep.errors);
    rep.slope = fit.slope;
    rep.intercept = fit.intercept;
    rep.slope_stderr = fit.stderr_;
  }
  rep.band_lo = -kInf;
  rep.band_hi = kInf;
  rep.pass = ok;
  if (!ok) rep.note = "mollified error not decaying as required";
  return rep;
}

std::string StudyReport::to_json() const {
  nlohmann::json j = nlohmann::json::parse(config_echo.empty() ? "{}" : config_echo);
  nlohmann::json out;
  out["study"] = study;
  out["grid"] = grid;
  out["errors"] = errors;
  out["stderrs"] = stderrs;
  out["slope"] = slope;
  out["intercept"] = intercept;
  out["slope_stderr"] = slope_stderr;
  out["theory_slope"] = theory_slope;
  out["band_lo"] = std::isfinite(band_lo) ? nlohmann::json(band_lo) : nlohmann::json("-inf");
  out["band_hi"] = std::isfinite(band_hi) ? nlohmann::json(band_hi) : nlohmann::json("inf");
  out["pass"] = pass;
  out["degenerate"] = degenerate;
  out["note"] = note;
  out["seed"] = seed;
  out["config"] = j;
  return out.dump(2);
}

std::string StudyReport::to_csv() const {
  std::ostringstream os;
  os << "grid,error,stderr\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    os << fmt_double(grid[i]) << ',' << fmt_double(errors[i]) << ','
       << fmt_double(stderrs[i]) << '\n';
  return os.str();
}

}  // namespace stablemv
