#include "longmem/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "longmem/errors.hpp"

namespace longmem {

namespace {

Eigen::VectorXd sorted_copy(const Eigen::VectorXd& a) {
  Eigen::VectorXd s = a;
  std::sort(s.data(), s.data() + s.size());
  return s;
}

}  // namespace

double ks_two_sample(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0 || b.size() == 0) throw Error("samples must be nonempty");
  Eigen::VectorXd sa = sorted_copy(a), sb = sorted_copy(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  Eigen::Index i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double quantile_sorted(const Eigen::VectorXd& sorted, double q) {
  if (sorted.size() == 0) throw Error("samples must be nonempty");
  if (q <= 0.0) return sorted[0];
  if (q >= 1.0) return sorted[sorted.size() - 1];
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<Eigen::Index>(std::floor(pos));
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double quantile(const Eigen::VectorXd& a, double q) {
  return quantile_sorted(sorted_copy(a), q);
}

double iqr(const Eigen::VectorXd& a) {
  Eigen::VectorXd s = sorted_copy(a);
  return quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
}

double quantile_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         double lo, double hi, int points) {
  if (points < 2) throw Error("at least two band points required");
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) throw Error("invalid quantile band");
  Eigen::VectorXd sa = sorted_copy(a), sb = sorted_copy(b);
  double denom = quantile_sorted(sa, 0.75) - quantile_sorted(sa, 0.25);
  if (!(denom > 0.0)) throw Error("reference sample has zero interquartile range");
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    double q = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    worst = std::max(worst, std::abs(quantile_sorted(sa, q) - quantile_sorted(sb, q)));
  }
  return worst / denom;
}

LineFit fit_loglog(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("need at least two points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw Error("log-log fit needs positive data");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  LineFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

double mean(const Eigen::VectorXd& a) {
  if (a.size() == 0) throw Error("samples must be nonempty");
  return a.mean();
}

double sample_variance(const Eigen::VectorXd& a) {
  if (a.size() < 2) throw Error("need at least two samples");
  double m = a.mean();
  return (a.array() - m).square().sum() / static_cast<double>(a.size() - 1);
}

double pearson_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) throw Error("need two equal-length samples");
  double ma = a.mean(), mb = b.mean();
  Eigen::ArrayXd da = a.array() - ma, db = b.array() - mb;
  double cov = (da * db).sum();
  double va = da.square().sum(), vb = db.square().sum();
  if (!(va > 0.0 && vb > 0.0)) throw Error("zero variance in correlation input");
  return cov / std::sqrt(va * vb);
}

}  // namespace longmem
