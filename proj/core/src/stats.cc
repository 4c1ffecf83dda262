#include "icv/stats.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "icv/error.h"

namespace icv {
namespace stats {
namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kQuadratureTolerance = 1e-12;
constexpr unsigned kMaxDepth = 18;

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double NormalPdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Distribution of the range of `k` independent standard normals:
// P(R <= w) = k * integral phi(z) [Phi(z) - Phi(z - w)]^(k-1) dz.
double NormalRangeCdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  auto integrand = [&](double z) {
    const double inner = NormalCdf(z) - NormalCdf(z - w);
    return NormalPdf(z) * std::pow(std::max(inner, 0.0), k - 1);
  };
  // phi(z) is negligible outside [-8.5, 8.5]; split at the integrand's
  // support edges to help the adaptive rule.
  const double lo = -8.5;
  const double hi = 8.5;
  const double mid = std::clamp(w / 2.0, lo, hi);
  double total = gauss_kronrod<double, 31>::integrate(
                     integrand, lo, mid, kMaxDepth, kQuadratureTolerance) +
                 gauss_kronrod<double, 31>::integrate(
                     integrand, mid, hi, kMaxDepth, kQuadratureTolerance);
  return std::clamp(k * total, 0.0, 1.0);
}

}  // namespace

double Mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / values.size();
}

double SampleStdDev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = Mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / (values.size() - 1));
}

double FDistributionSf(double x, double d1, double d2) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  boost::math::fisher_f_distribution<double> dist(d1, d2);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double StudentizedRangeCdf(double q, int groups, double df) {
  if (groups < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "studentized range needs at least two groups");
  }
  if (q <= 0.0) return 0.0;
  if (df <= 0.0 || df > 1e6) return NormalRangeCdf(q, groups);

  // Q = R / S with S = sqrt(chi2_df / df); integrate P(R <= q s) against
  // the density of S.
  const double log_norm = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) -
                          (0.5 * df - 1.0) * std::log(2.0);
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double log_density =
        log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
    return std::exp(log_density) * NormalRangeCdf(q * s, groups);
  };
  // S concentrates around 1 with spread about 1/sqrt(2 df).
  const double spread = 1.0 / std::sqrt(df);
  const double lo = std::max(0.0, 1.0 - 12.0 * spread);
  const double hi = 1.0 + 12.0 * spread + 4.0;
  double total = 0.0;
  const double cuts[] = {lo, std::max(lo, 1.0 - 2.0 * spread), 1.0,
                         1.0 + 2.0 * spread, hi};
  for (int i = 0; i + 1 < 5; ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += gauss_kronrod<double, 31>::integrate(
        integrand, cuts[i], cuts[i + 1], kMaxDepth, kQuadratureTolerance);
  }
  return std::clamp(total, 0.0, 1.0);
}

AnovaResult OneWayAnova(const std::vector<std::vector<double>> &groups) {
  if (groups.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "ANOVA needs at least two groups");
  }
  size_t total_n = 0;
  double grand_sum = 0.0;
  for (const auto &g : groups) {
    if (g.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ANOVA needs at least two observations per group");
    }
    total_n += g.size();
    for (double v : g) grand_sum += v;
  }
  const double grand_mean = grand_sum / total_n;

  AnovaResult r;
  for (const auto &g : groups) {
    const double m = Mean(g);
    r.ss_between += g.size() * (m - grand_mean) * (m - grand_mean);
    for (double v : g) r.ss_within += (v - m) * (v - m);
  }
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(total_n - groups.size());
  r.ms_within = r.ss_within / r.df_within;
  if (r.ss_within == 0.0) {
    throw Error(ErrorCode::kUndefined,
                "F statistic undefined: zero within-group variance");
  }
  const double ms_between = r.ss_between / r.df_between;
  r.f = ms_between / r.ms_within;
  r.p = FDistributionSf(r.f, r.df_between, r.df_within);
  return r;
}

std::vector<TukeyComparison> TukeyHsd(
    const std::vector<std::vector<double>> &groups) {
  const AnovaResult anova = OneWayAnova(groups);
  const int k = static_cast<int>(groups.size());
  std::vector<TukeyComparison> out;
  for (size_t a = 0; a < groups.size(); ++a) {
    for (size_t b = a + 1; b < groups.size(); ++b) {
      TukeyComparison c;
      c.a = a;
      c.b = b;
      c.diff = Mean(groups[b]) - Mean(groups[a]);
      const double se = std::sqrt(anova.ms_within / 2.0 *
                                  (1.0 / groups[a].size() +
                                   1.0 / groups[b].size()));
      c.q = std::abs(c.diff) / se;
      c.p = 1.0 - StudentizedRangeCdf(c.q, k, anova.df_within);
      c.p = std::clamp(c.p, 0.0, 1.0);
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace stats
}  // namespace icv
