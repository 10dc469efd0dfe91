#include "tabsynth/stats.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

struct Moments {
  double mean = 0.0;
  double m2 = 0.0;  // central moments, biased (divide by n)
  double m3 = 0.0;
  double m4 = 0.0;
};

Moments moments(std::span<const double> a) {
  Moments m;
  const auto n = static_cast<double>(a.size());
  for (double v : a) m.mean += v;
  m.mean /= n;
  for (double v : a) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

MeanStd aggregate(std::span<const double> values) {
  if (values.size() < 2) {
    throw InsufficientDataError("aggregation needs at least 2 values, got " + std::to_string(values.size()));
  }
  MeanStd out;
  out.n = values.size();
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(out.n);
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(out.n - 1));
  return out;
}

MeanStd aggregate(std::span<const std::optional<double>> values) {
  std::vector<double> present;
  for (const auto& v : values) {
    if (v) present.push_back(*v);
  }
  return aggregate(std::span<const double>(present));
}

std::string format_mean_std(const MeanStd& m, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f±%.*f", digits, m.mean, digits, m.std);
  return buf;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete_beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("degrees of freedom must be > 0");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

TTest ttest_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InsufficientDataError("t-test needs at least 2 values per group");
  const auto ma = aggregate(a);
  const auto mb = aggregate(b);
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  TTest r;
  r.df = na + nb - 2.0;
  const double pooled = ((na - 1.0) * ma.std * ma.std + (nb - 1.0) * mb.std * mb.std) / r.df;
  if (!(pooled > 0.0)) throw DegenerateDataError("pooled variance is zero");
  const double se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  r.t = (ma.mean - mb.mean) / se;
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

TTest ttest_paired(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("paired t-test needs equal-length samples");
  if (a.size() < 2) throw InsufficientDataError("paired t-test needs at least 2 pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const auto m = aggregate(std::span<const double>(diff));
  if (!(m.std > 0.0)) throw DegenerateDataError("differences have zero variance");
  TTest r;
  r.df = static_cast<double>(a.size()) - 1.0;
  r.t = m.mean / (m.std / std::sqrt(static_cast<double>(a.size())));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

NormalityTest dagostino_pearson(std::span<const double> a) {
  if (a.size() < 8) {
    throw InsufficientDataError("normality test needs at least 8 values, got " + std::to_string(a.size()));
  }
  const auto mo = moments(a);
  if (!(mo.m2 > 0.0)) throw DegenerateDataError("sample has zero variance");
  const auto n = static_cast<double>(a.size());

  // Skewness transform.
  const double b1 = mo.m3 / std::pow(mo.m2, 1.5);
  double y = b1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  if (y == 0.0) y = 1.0;
  const double ya = y / alpha;
  const double z_skew = delta * std::log(ya + std::sqrt(ya * ya + 1.0));

  // Kurtosis transform.
  const double b2 = mo.m4 / (mo.m2 * mo.m2);
  const double expected = 3.0 * (n - 1.0) / (n + 1.0);
  const double var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double x = (b2 - expected) / std::sqrt(var_b2);
  const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                            std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
  const double big_a =
      6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double term1 = 1.0 - 2.0 / (9.0 * big_a);
  const double denom = 1.0 + x * std::sqrt(2.0 / (big_a - 4.0));
  const double term2 = denom == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                    : std::copysign(std::cbrt((1.0 - 2.0 / big_a) / std::abs(denom)), denom);
  const double z_kurt = (term1 - term2) / std::sqrt(2.0 / (9.0 * big_a));

  NormalityTest r;
  r.z_skew = z_skew;
  r.z_kurtosis = z_kurt;
  r.k2 = z_skew * z_skew + z_kurt * z_kurt;
  r.p = std::exp(-0.5 * r.k2);
  return r;
}

std::string significance_marker(double p) {
  if (p < 0.05) return "*";
  if (p < 0.1) return "◇";
  return {};
}

}  // namespace tabsynth
