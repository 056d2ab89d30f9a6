#include "stablemv/drift.hpp"

#include <cmath>
#include <stdexcept>

#include "stablemv/noise.hpp"

namespace stablemv {

void DriftSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("DriftSpec: dim must be >= 1");
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("DriftSpec: beta must lie in (0,1)");
  if (!(kappa >= 1.0)) throw std::invalid_argument("DriftSpec: kappa must be >= 1");
  if (holder_amp < 0.0 || interaction_amp < 0.0)
    throw std::invalid_argument("DriftSpec: amplitudes must be nonnegative");
  if (kind == DriftKind::Mollified) {
    if (!base) throw std::invalid_argument("DriftSpec: mollified drift lacks a base");
    if (mollify_n < 1) throw std::invalid_argument("DriftSpec: mollify_n must be >= 1");
    base->validate();
  }
}

void DriftSpec::check_compatible(double alpha) const {
  validate();
  if (!(kappa < alpha))
    throw std::invalid_argument("DriftSpec: kappa must lie in [1, alpha)");
  if (!(2.0 * beta + alpha > 2.0))
    throw std::invalid_argument("2*beta + alpha > 2 violated");
}

double phi_beta(double s, double beta) {
  double m = std::pow(std::fabs(s), beta);
  if (m > 1.0) m = 1.0;
  return s < 0.0 ? -m : m;
}

namespace {

constexpr int kNodesPerAxis = 129;

// Quadrature table for the bump rho(z) ~ exp(-1/(1-|z|^2)), |z| < 1,
// scaled to support radius 1/n. Weights normalized to sum 1, so the
// discrete convolution is an average and |b^n| <= |b| holds exactly.
void build_mollifier_quadrature(int dim, int n, std::vector<double>& offsets,
                                std::vector<double>& weights) {
  const double r = 1.0 / n;
  const double h = 2.0 * r / kNodesPerAxis;
  int total = 1;
  for (int i = 0; i < dim; ++i) total *= kNodesPerAxis;
  offsets.clear();
  weights.clear();
  offsets.reserve(static_cast<std::size_t>(total) * dim);
  weights.reserve(total);
  double wsum = 0.0;
  std::vector<double> y(dim);
  for (int k = 0; k < total; ++k) {
    int rem = k;
    double z2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      int idx = rem % kNodesPerAxis;
      rem /= kNodesPerAxis;
      y[i] = -r + (idx + 0.5) * h;
      double z = y[i] * n;
      z2 += z * z;
    }
    double w = z2 < 1.0 ? std::exp(-1.0 / (1.0 - z2)) : 0.0;
    if (w > 0.0) {
      offsets.insert(offsets.end(), y.begin(), y.end());
      weights.push_back(w);
      wsum += w;
    }
  }
  for (double& w : weights) w /= wsum;
}

void holder_part(const DriftSpec& s, const double* x, double* out) {
  for (int i = 0; i < s.dim; ++i) out[i] = s.holder_amp * phi_beta(x[i], s.beta);
}

}  // namespace

FrozenDrift::FrozenDrift(const DriftSpec& spec, const EmpiricalMeasure& mu) : spec_(&spec) {
  const DriftSpec& eff = spec.kind == DriftKind::Mollified ? *spec.base : spec;
  if (eff.dim != mu.dim())
    throw std::invalid_argument("eval_drift: dimension mismatch");
  interaction_.assign(eff.dim, 0.0);
  if (eff.kind == DriftKind::HolderMean && eff.interaction_amp > 0.0) {
    for (int j = 0; j < mu.count(); ++j) {
      const double* y = mu.point(j);
      for (int i = 0; i < eff.dim; ++i) interaction_[i] += std::tanh(y[i]);
    }
    for (int i = 0; i < eff.dim; ++i)
      interaction_[i] *= eff.interaction_amp / mu.count();
  }
  if (spec.kind == DriftKind::Mollified)
    build_mollifier_quadrature(eff.dim, spec.mollify_n, quad_offsets_, quad_weights_);
}

void FrozenDrift::eval(const double* x, double* out) const {
  const DriftSpec& s = *spec_;
  switch (s.kind) {
    case DriftKind::Zero:
      for (int i = 0; i < s.dim; ++i) out[i] = 0.0;
      return;
    case DriftKind::HolderMean:
      holder_part(s, x, out);
      for (int i = 0; i < s.dim; ++i) out[i] += interaction_[i];
      return;
    case DriftKind::Mollified: {
      const DriftSpec& b = *s.base;
      const int d = b.dim;
      std::vector<double> shifted(d), acc(d, 0.0), tmp(d);
      for (std::size_t k = 0; k < quad_weights_.size(); ++k) {
        for (int i = 0; i < d; ++i)
          shifted[i] = x[i] - quad_offsets_[k * d + i];
        holder_part(b, shifted.data(), tmp.data());
        for (int i = 0; i < d; ++i) acc[i] += quad_weights_[k] * tmp[i];
      }
      for (int i = 0; i < d; ++i) out[i] = acc[i] + interaction_[i];
      return;
    }
  }
}

void eval_drift(const DriftSpec& spec, const double* x, const EmpiricalMeasure& mu,
                double* out) {
  FrozenDrift(spec, mu).eval(x, out);
}

std::vector<double> eval_drift(const DriftSpec& spec, const std::vector<double>& x,
                               const EmpiricalMeasure& mu) {
  int d = spec.kind == DriftKind::Mollified ? spec.base->dim : spec.dim;
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("eval_drift: dimension mismatch");
  std::vector<double> out(d);
  eval_drift(spec, x.data(), mu, out.data());
  return out;
}

DriftSpec mollify_drift(const DriftSpec& spec, int n) {
  if (spec.kind == DriftKind::Mollified) throw std::invalid_argument("already mollified");
  if (n < 1) throw std::invalid_argument("mollify_drift: n must be >= 1");
  if (spec.dim > 2)
    throw std::invalid_argument("mollify_drift: quadrature supports dim <= 2 only");
  spec.validate();
  DriftSpec out = spec;
  out.kind = DriftKind::Mollified;
  out.base = std::make_shared<DriftSpec>(spec);
  out.mollify_n = n;
  return out;
}

AdmissibilityReport verify_admissible(const DriftSpec& spec, int sample_count,
                                      std::uint64_t seed) {
  if (sample_count < 100)
    throw std::invalid_argument("verify_admissible: sample_count must be >= 100");
  spec.validate();
  const DriftSpec& eff = spec.kind == DriftKind::Mollified ? *spec.base : spec;
  const int d = eff.dim;
  const int cloud = 8;

  NoiseStream rs{seed, 0};
  std::uint32_t draw = 0;
  auto u01 = [&](void) {
    return rng::uniform01(rs, rng::kPurposeScratch, 0, draw++);
  };
  auto rand_point = [&](std::vector<double>& x) {
    for (int i = 0; i < d; ++i) x[i] = 6.0 * u01() - 3.0;
  };
  auto rand_cloud = [&](void) {
    std::vector<double> pts(static_cast<std::size_t>(cloud) * d);
    for (double& v : pts) v = 6.0 * u01() - 3.0;
    return EmpiricalMeasure(d, std::move(pts));
  };

  AdmissibilityReport rep;
  std::vector<double> x(d), y(d), bx(d), by(d);
  for (int s = 0; s < sample_count; ++s) {
    EmpiricalMeasure mu = rand_cloud();
    EmpiricalMeasure mu2 = rand_cloud();
    rand_point(x);
    rand_point(y);
    // include nearby pairs, where the Holder ratio peaks
    if (s % 2 == 0)
      for (int i = 0; i < d; ++i) y[i] = x[i] + 0.02 * (2.0 * u01() - 1.0);

    eval_drift(spec, x.data(), mu, bx.data());
    eval_drift(spec, y.data(), mu, by.data());
    double num = 0.0, dist2 = 0.0, sup = 0.0;
    for (int i = 0; i < d; ++i) {
      num = std::max(num, std::fabs(bx[i] - by[i]));
      dist2 += (x[i] - y[i]) * (x[i] - y[i]);
      sup = std::max(sup, std::fabs(bx[i]));
    }
    rep.sup_norm = std::max(rep.sup_norm, sup);
    if (dist2 > 0.0)
      rep.max_holder_ratio =
          std::max(rep.max_holder_ratio, num / std::pow(dist2, 0.5 * eff.beta));

    eval_drift(spec, x.data(), mu2, by.data());
    double mnum = 0.0;
    for (int i = 0; i < d; ++i) mnum = std::max(mnum, std::fabs(bx[i] - by[i]));
    double w = wasserstein_exact(eff.kappa, mu, mu2);
    if (w > 0.0)
      rep.max_measure_ratio = std::max(rep.max_measure_ratio, mnum / w);
  }

  rep.holder_limit = 2.0 * eff.holder_amp;
  rep.measure_limit = eff.interaction_amp;
  rep.sup_limit = eff.sup_bound();
  const double tol = 1e-9;
  rep.pass = rep.max_holder_ratio <= rep.holder_limit + tol &&
             rep.max_measure_ratio <= rep.measure_limit + tol &&
             rep.sup_norm <= rep.sup_limit + tol;
  return rep;
}

}  // namespace stablemv
