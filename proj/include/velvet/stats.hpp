#pragma once

#include <span>
#include <string>

namespace velvet {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1); 0 when n < 2
  std::size_t n = 0;
};

MeanStd mean_std(std::span<const double> xs);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Two-sided tail P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct ComparisonResult {
  std::string metric;
  std::string a_label;
  std::string b_label;
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;  // Welch-Satterthwaite
  double p_value = 1.0;
  double alpha = 0.05;
  bool significant = false;  // p < alpha
  double mean_a = 0.0;
  double mean_b = 0.0;
};

/// Welch two-sample t-test. Throws DomainError naming the offending side
/// when it has fewer than two values or zero variance.
ComparisonResult welch_ttest(std::span<const double> a, std::span<const double> b,
                             double alpha = 0.05, std::string metric = {});

}  // namespace velvet
