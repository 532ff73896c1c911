#pragma once

#include <Eigen/Dense>

namespace longmem {

// Two-sample Kolmogorov-Smirnov statistic (sup distance between empirical
// CDFs), by a merge scan over both sorted samples.
double ks_two_sample(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Empirical q-quantile with linear interpolation between order statistics
// (position q*(n-1)). `sorted` must be ascending.
double quantile_sorted(const Eigen::VectorXd& sorted, double q);
double quantile(const Eigen::VectorXd& a, double q);

double iqr(const Eigen::VectorXd& a);

// Max absolute difference of empirical quantiles of a and b over `points`
// evenly spaced probabilities in [lo, hi], normalized by the interquartile
// range of a.
double quantile_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         double lo = 0.05, double hi = 0.95, int points = 19);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least-squares fit of log(y) against log(x); all inputs must be positive.
LineFit fit_loglog(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double mean(const Eigen::VectorXd& a);
double sample_variance(const Eigen::VectorXd& a);  // denominator n-1
double pearson_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace longmem
