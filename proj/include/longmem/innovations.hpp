#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <variant>

#include "longmem/rng.hpp"

namespace longmem {

struct GaussianModel {
  double sigma = 1.0;
};

// scale * t_nu variate; requires nu > 4 so the fourth moment is finite.
// unit-variance scaling corresponds to scale = sqrt((nu-2)/nu).
struct StudentTypeModel {
  double nu = 6.0;
  double scale = 1.0;
};

// Two-sided Pareto with tail P[|Z_raw| > x] = (x/x0)^(-alpha) for x >= x0 and
// tail balance P[Z_raw > x] / P[|Z_raw| > x] = p. Draws are analytically
// mean-centered: Z = Z_raw - mu_raw with mu_raw = (2p-1) * alpha * x0 / (alpha-1).
struct TwoSidedParetoModel {
  double alpha = 3.0;
  double p = 0.5;
  double x0 = 1.0;
};

using InnovationModel = std::variant<GaussianModel, StudentTypeModel, TwoSidedParetoModel>;

void validate(const InnovationModel& model);

// Mean shift applied to the Pareto variant (0 for the symmetric ones).
double mean_shift(const InnovationModel& model);

// Sequential sampler over one stream; draw order is pinned by the seed.
class InnovationSampler {
 public:
  InnovationSampler(const InnovationModel& model, std::uint64_t seed);
  double next();

 private:
  InnovationModel model_;
  RandomStream rs_;
};

Eigen::VectorXd sample(const InnovationModel& model, std::int64_t n, std::uint64_t seed);

struct MomentReport {
  double sigma2 = 1.0;
  std::optional<double> eta;    // E Z^4 / sigma^4; absent when the fourth moment is infinite
  std::optional<double> alpha;  // tail index in (2,4); absent for finite-fourth-moment variants
};

MomentReport moments(const InnovationModel& model);

// a_N solving N * P[|Z_raw| > a_N] = 1. Throws Error("no tail index") for
// finite-fourth-moment variants.
double norming_a(const InnovationModel& model, double N);

// b_N = E[Z_raw^2 * 1{|Z_raw| <= a_N}] of the raw (uncentered) variable, in
// closed form. The raw and centered variables coincide for p = 1/2.
double truncated_b(const InnovationModel& model, double N);

// E[Z^2 * 1{|Z| <= a}] of the centered variable, in closed form. Coincides
// with truncated_b at the balance point p = 1/2. Throws Error("no tail
// index") for finite-fourth-moment variants, like the other tail functionals.
double truncated_second_moment(const InnovationModel& model, double a);

struct TailCentering {
  double value;  // N * a_N^(-2) * (E Z_raw^2 - b_N)
  double limit;  // alpha / (alpha - 2)
};

TailCentering tail_centering(const InnovationModel& model, double N);

struct TruncationSpec {
  double t;       // truncation level T
  double mu_t;    // mu(T) = E[Z * 1{|Z| <= T}] of the centered variable, closed form
  double bound;   // a.s. bound on |Z(T)|: T + 2|mu(T)|
};

TruncationSpec truncation_spec(const InnovationModel& model, double t);

// Z(T) = Z * 1{|Z| <= T} - 2 * eps * sign(mu(T)) with eps ~ U[0, |mu(T)|]
// drawn independently per element from a stream derived from `seed`
// (separate from any innovation stream). Exactly mean-zero; equals
// z * 1{|z| <= T} when the model is symmetric.
Eigen::VectorXd truncate_sample(const Eigen::VectorXd& z, const InnovationModel& model,
                                double t, std::uint64_t seed);

}  // namespace longmem
