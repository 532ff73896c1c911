#include "longmem/innovations.hpp"

#include <cmath>

#include "longmem/errors.hpp"

namespace longmem {

namespace {

const TwoSidedParetoModel& require_pareto(const InnovationModel& model) {
  const auto* p = std::get_if<TwoSidedParetoModel>(&model);
  if (!p) throw Error("no tail index");
  return *p;
}

double pareto_mu_raw(const TwoSidedParetoModel& m) {
  return (2.0 * m.p - 1.0) * m.alpha * m.x0 / (m.alpha - 1.0);
}

// Integrals of the two-sided density alpha * x0^alpha |x|^{-alpha-1}
// (mass p above x0, 1-p below -x0) over an interval [lo, hi].
// moment = 0: probability, 1: E[X 1{.}], 2: E[X^2 1{.}].

double one_side_piece(const TwoSidedParetoModel& m, double mass, double a, double b,
                      int moment) {
  // integral over [a, b] intersected with [x0, inf) of the positive-side
  // density, with sign handled by the caller for the mirrored side.
  a = std::max(a, m.x0);
  if (b <= a) return 0.0;
  double al = m.alpha;
  double c = mass * al * std::pow(m.x0, al);
  double e = static_cast<double>(moment) - al;  // exponent of x after x^moment * x^{-alpha-1}
  // integral of c * x^{e-1} dx = c * (b^e - a^e)/e  (e != 0 since alpha not integer <= 2)
  double bi = std::isinf(b) ? 0.0 : std::pow(b, e);
  return c * (bi - std::pow(a, e)) / e;
}

double pareto_interval(const TwoSidedParetoModel& m, double lo, double hi, int moment) {
  if (hi <= lo) return 0.0;
  // positive side: x in [max(lo, x0), hi]
  double pos = one_side_piece(m, m.p, lo, hi, moment);
  // negative side: x in [lo, min(hi, -x0)]; substitute y = -x in [max(-hi, x0), -lo]
  double neg = one_side_piece(m, 1.0 - m.p, std::max(-hi, m.x0), -lo, moment);
  if (moment == 1) neg = -neg;
  return pos + neg;
}

}  // namespace

void validate(const InnovationModel& model) {
  if (const auto* g = std::get_if<GaussianModel>(&model)) {
    if (!(g->sigma > 0.0)) throw Error("sigma must be positive");
  } else if (const auto* s = std::get_if<StudentTypeModel>(&model)) {
    if (!(s->nu > 4.0)) throw Error("nu must exceed 4");
    if (!(s->scale > 0.0)) throw Error("scale must be positive");
  } else {
    const auto& p = std::get<TwoSidedParetoModel>(model);
    if (!(p.alpha > 2.0 && p.alpha < 4.0)) throw Error("alpha must lie in (2, 4)");
    if (!(p.p >= 0.0 && p.p <= 1.0)) throw Error("p must lie in [0, 1]");
    if (!(p.x0 > 0.0)) throw Error("x0 must be positive");
  }
}

double mean_shift(const InnovationModel& model) {
  if (const auto* p = std::get_if<TwoSidedParetoModel>(&model)) return pareto_mu_raw(*p);
  return 0.0;
}

InnovationSampler::InnovationSampler(const InnovationModel& model, std::uint64_t seed)
    : model_(model), rs_(seed) {
  validate(model_);
}

double InnovationSampler::next() {
  if (const auto* g = std::get_if<GaussianModel>(&model_)) {
    return g->sigma * rs_.normal();
  }
  if (const auto* s = std::get_if<StudentTypeModel>(&model_)) {
    return s->scale * rs_.student_t(s->nu);
  }
  const auto& p = std::get<TwoSidedParetoModel>(model_);
  // sign first, magnitude second; the order is part of the seed contract
  double sign = rs_.uniform_open() < p.p ? 1.0 : -1.0;
  double mag = p.x0 * std::pow(rs_.uniform_open(), -1.0 / p.alpha);
  return sign * mag - pareto_mu_raw(p);
}

Eigen::VectorXd sample(const InnovationModel& model, std::int64_t n, std::uint64_t seed) {
  InnovationSampler s(model, seed);
  Eigen::VectorXd out(n);
  for (std::int64_t i = 0; i < n; ++i) out[i] = s.next();
  return out;
}

MomentReport moments(const InnovationModel& model) {
  validate(model);
  MomentReport r;
  if (const auto* g = std::get_if<GaussianModel>(&model)) {
    r.sigma2 = g->sigma * g->sigma;
    r.eta = 3.0;
  } else if (const auto* s = std::get_if<StudentTypeModel>(&model)) {
    r.sigma2 = s->scale * s->scale * s->nu / (s->nu - 2.0);
    r.eta = 3.0 * (s->nu - 2.0) / (s->nu - 4.0);
  } else {
    const auto& p = std::get<TwoSidedParetoModel>(model);
    double mu = pareto_mu_raw(p);
    double m2_raw = p.alpha * p.x0 * p.x0 / (p.alpha - 2.0);
    r.sigma2 = m2_raw - mu * mu;
    r.alpha = p.alpha;
  }
  return r;
}

double norming_a(const InnovationModel& model, double N) {
  const auto& p = require_pareto(model);
  if (!(N > 0.0)) throw Error("N must be positive");
  return p.x0 * std::pow(N, 1.0 / p.alpha);
}

double truncated_b(const InnovationModel& model, double N) {
  const auto& p = require_pareto(model);
  double a = norming_a(model, N);
  // E[Z_raw^2 1{|Z_raw| <= a}] = alpha x0^2/(alpha-2) (1 - (a/x0)^{2-alpha})
  return p.alpha * p.x0 * p.x0 / (p.alpha - 2.0) *
         (1.0 - std::pow(a / p.x0, 2.0 - p.alpha));
}

double truncated_second_moment(const InnovationModel& model, double a) {
  const auto& p = require_pareto(model);
  if (!(a > 0.0)) throw Error("truncation level must be positive");
  double mu = pareto_mu_raw(p);
  // E[(X - mu)^2 1{mu - a <= X <= mu + a}] for the raw variable X
  double lo = mu - a, hi = mu + a;
  double m2 = pareto_interval(p, lo, hi, 2);
  double m1 = pareto_interval(p, lo, hi, 1);
  double m0 = pareto_interval(p, lo, hi, 0);
  return m2 - 2.0 * mu * m1 + mu * mu * m0;
}

TailCentering tail_centering(const InnovationModel& model, double N) {
  const auto& p = require_pareto(model);
  double a = norming_a(model, N);
  double m2_raw = p.alpha * p.x0 * p.x0 / (p.alpha - 2.0);
  TailCentering tc;
  tc.value = N / (a * a) * (m2_raw - truncated_b(model, N));
  tc.limit = p.alpha / (p.alpha - 2.0);
  return tc;
}

TruncationSpec truncation_spec(const InnovationModel& model, double t) {
  validate(model);
  if (!(t > 0.0)) throw Error("truncation level must be positive");
  TruncationSpec spec;
  spec.t = t;
  if (const auto* p = std::get_if<TwoSidedParetoModel>(&model)) {
    double mu = pareto_mu_raw(*p);
    // mu(T) = E[(X - mu) 1{|X - mu| <= T}]
    double m1 = pareto_interval(*p, mu - t, mu + t, 1);
    double m0 = pareto_interval(*p, mu - t, mu + t, 0);
    spec.mu_t = m1 - mu * m0;
  } else {
    spec.mu_t = 0.0;  // symmetric variants
  }
  spec.bound = t + 2.0 * std::abs(spec.mu_t);
  return spec;
}

Eigen::VectorXd truncate_sample(const Eigen::VectorXd& z, const InnovationModel& model,
                                double t, std::uint64_t seed) {
  TruncationSpec spec = truncation_spec(model, t);
  Eigen::VectorXd out(z.size());
  if (spec.mu_t == 0.0) {
    // symmetric model: plain truncation is already mean-zero
    for (Eigen::Index i = 0; i < z.size(); ++i)
      out[i] = std::abs(z[i]) <= t ? z[i] : 0.0;
    return out;
  }
  double s = spec.mu_t > 0.0 ? 1.0 : -1.0;
  double amp = std::abs(spec.mu_t);
  RandomStream rs(seed);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double w = std::abs(z[i]) <= t ? z[i] : 0.0;
    out[i] = w - 2.0 * s * amp * rs.uniform_open();
  }
  return out;
}

}  // namespace longmem
