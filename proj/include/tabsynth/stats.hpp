#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tabsynth {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  std::size_t n = 0;
};

MeanStd aggregate(std::span<const double> values);
/// Drops missing entries first.
MeanStd aggregate(std::span<const std::optional<double>> values);

/// "0.638±0.060"
std::string format_mean_std(const MeanStd& m, int digits = 3);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

/// Student's two-sample t-test with pooled variance.
TTest ttest_two_sample(std::span<const double> a, std::span<const double> b);
/// Paired t-test on a[i] - b[i].
TTest ttest_paired(std::span<const double> a, std::span<const double> b);

struct NormalityTest {
  double k2 = 0.0;
  double p = 1.0;
  double z_skew = 0.0;
  double z_kurtosis = 0.0;
};

/// D'Agostino-Pearson omnibus K^2 test; needs n >= 8.
NormalityTest dagostino_pearson(std::span<const double> a);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Two-sided p-value of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// "*" for p < 0.05, "◇" for 0.05 <= p < 0.1, empty otherwise.
std::string significance_marker(double p);

}  // namespace tabsynth
