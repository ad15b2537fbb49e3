#include "velvet/stats.hpp"

#include <cmath>
#include <limits>

#include "velvet/error.hpp"

namespace velvet {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEpsilon) break;
  }
  return h;
}

double sample_variance(std::span<const double> xs, double mean) {
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace

MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  out.n = xs.size();
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() >= 2) out.std = std::sqrt(sample_variance(xs, out.mean));
  return out;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw DomainError("student_t_two_sided_p: df must be positive");
  if (std::isinf(t)) return 0.0;
  const double p = incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return std::min(1.0, std::max(0.0, p));
}

ComparisonResult welch_ttest(std::span<const double> a, std::span<const double> b, double alpha,
                             std::string metric) {
  auto check_side = [](std::span<const double> xs, const char* side) {
    if (xs.size() < 2)
      throw DomainError(std::string("welch_ttest: sample ") + side + " needs at least 2 values");
  };
  check_side(a, "a");
  check_side(b, "b");
  const MeanStd sa = mean_std(a);
  const MeanStd sb = mean_std(b);
  const double var_a = sample_variance(a, sa.mean);
  const double var_b = sample_variance(b, sb.mean);
  if (!(var_a > 0.0)) throw DomainError("welch_ttest: sample a has zero variance");
  if (!(var_b > 0.0)) throw DomainError("welch_ttest: sample b has zero variance");

  const double ra = var_a / static_cast<double>(a.size());
  const double rb = var_b / static_cast<double>(b.size());
  ComparisonResult out;
  out.metric = std::move(metric);
  out.alpha = alpha;
  out.mean_a = sa.mean;
  out.mean_b = sb.mean;
  out.t_statistic = (sa.mean - sb.mean) / std::sqrt(ra + rb);
  out.degrees_of_freedom =
      (ra + rb) * (ra + rb) /
      (ra * ra / static_cast<double>(a.size() - 1) + rb * rb / static_cast<double>(b.size() - 1));
  out.p_value = student_t_two_sided_p(out.t_statistic, out.degrees_of_freedom);
  out.significant = out.p_value < alpha;
  return out;
}

}  // namespace velvet
