#ifndef ICV_STATS_H_
#define ICV_STATS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace icv {
namespace stats {

double Mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double SampleStdDev(std::span<const double> values);

// Upper tail P(X > x) of the F(d1, d2) distribution.
double FDistributionSf(double x, double d1, double d2);

// P(Q <= q) for the studentized range of `groups` means with `df` error
// degrees of freedom. df <= 0 or a very large df uses the normal limit.
double StudentizedRangeCdf(double q, int groups, double df);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  int df_between = 0;
  int df_within = 0;
  double ms_within = 0.0;
};

// One-way ANOVA. Needs >= 2 groups of >= 2 observations each. Throws
// Error(kUndefined) when the within-group variance is zero, which covers
// the all-values-identical case.
AnovaResult OneWayAnova(const std::vector<std::vector<double>> &groups);

struct TukeyComparison {
  size_t a = 0;
  size_t b = 0;
  double diff = 0.0;  // mean(b) - mean(a)
  double q = 0.0;
  double p = 1.0;
};

// Tukey HSD (Tukey-Kramer for unequal sizes) over every pair a < b.
std::vector<TukeyComparison> TukeyHsd(
    const std::vector<std::vector<double>> &groups);

}  // namespace stats
}  // namespace icv

#endif  // ICV_STATS_H_
