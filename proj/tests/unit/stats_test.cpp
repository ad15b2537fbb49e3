#include <gtest/gtest.h>

#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "velvet/error.hpp"
#include "velvet/stats.hpp"

namespace velvet {
namespace {

const std::vector<double> kA = {27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1,
                                21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4};
const std::vector<double> kB = {27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0,
                                24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4};
const std::vector<double> kA2 = {19.8, 20.4, 19.6, 17.8, 18.5, 18.9, 18.3, 18.9, 19.5, 22.0};
const std::vector<double> kB2 = {28.2, 26.6, 20.1, 23.3, 25.2, 22.1, 17.7, 27.6, 20.6, 13.7,
                                 23.2, 17.5, 20.6, 18.0, 23.9, 21.6, 24.3, 20.4, 23.9, 13.3};

// Independent route: textbook Welch statistic, Boost's t distribution.
struct Reference {
  double t, df, p;
};

Reference boost_welch(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& x) {
    double m = 0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::pair{m, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 / ((va / na) * (va / na) / (na - 1) + (vb / nb) * (vb / nb) / (nb - 1));
  boost::math::students_t dist(df);
  return {t, df, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)))};
}

TEST(MeanStd, Basics) {
  const std::vector<double> xs = {2, 4, 4, 4, 5, 5, 7, 9};
  const auto m = mean_std(xs);
  EXPECT_EQ(m.mean, 5.0);
  EXPECT_NEAR(m.std, std::sqrt(32.0 / 7.0), 1e-15);
  EXPECT_EQ(m.n, 8u);
  EXPECT_EQ(mean_std(std::vector<double>{3.0}).std, 0.0);
  EXPECT_EQ(mean_std(std::vector<double>{}).n, 0u);
}

TEST(IncompleteBeta, KnownValues) {
  EXPECT_EQ(incomplete_beta(2, 3, 0), 0.0);
  EXPECT_EQ(incomplete_beta(2, 3, 1), 1.0);
  EXPECT_NEAR(incomplete_beta(1, 1, 0.3), 0.3, 1e-15);
  // I_x(2,1) = x^2; I_x(1,2) = 1-(1-x)^2.
  EXPECT_NEAR(incomplete_beta(2, 1, 0.4), 0.16, 1e-14);
  EXPECT_NEAR(incomplete_beta(1, 2, 0.4), 0.64, 1e-14);
  EXPECT_NEAR(incomplete_beta(0.5, 0.5, 0.5), 0.5, 1e-14);
}

TEST(StudentT, MatchesBoost) {
  std::mt19937_64 rng(83);
  for (int i = 0; i < 500; ++i) {
    const double df = std::uniform_real_distribution<double>(1.0, 200.0)(rng);
    const double t = std::uniform_real_distribution<double>(-8.0, 8.0)(rng);
    boost::math::students_t dist(df);
    const double want = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    EXPECT_NEAR(student_t_two_sided_p(t, df), want, 1e-12) << "t=" << t << " df=" << df;
  }
  EXPECT_EQ(student_t_two_sided_p(0.0, 10.0), 1.0);
}

// Frozen scipy.stats.ttest_ind(equal_var=False) outputs.
TEST(WelchTTest, FrozenReferenceValues) {
  const auto r = welch_ttest(kA, kB);
  EXPECT_NEAR(r.t_statistic, -2.455356398286006, 1e-12);
  EXPECT_NEAR(r.degrees_of_freedom, 24.988529290231416, 1e-10);
  EXPECT_NEAR(r.p_value, 0.021378001462866985, 1e-12);
  EXPECT_TRUE(r.significant);

  const auto r2 = welch_ttest(kA2, kB2, 0.01);
  EXPECT_NEAR(r2.t_statistic, -2.225512039969852, 1e-12);
  EXPECT_NEAR(r2.degrees_of_freedom, 24.524634944257343, 1e-10);
  EXPECT_NEAR(r2.p_value, 0.035484530830010325, 1e-12);
  EXPECT_FALSE(r2.significant);
  EXPECT_EQ(r2.alpha, 0.01);
}

TEST(WelchTTest, MatchesBoostOnRandomSamples) {
  std::mt19937_64 rng(89);
  for (int i = 0; i < 50; ++i) {
    std::normal_distribution<double> da(rng() % 10, 1.0 + static_cast<double>(rng() % 5));
    std::normal_distribution<double> db(rng() % 10, 1.0 + static_cast<double>(rng() % 5));
    std::vector<double> a(2 + rng() % 40), b(2 + rng() % 40);
    for (auto& v : a) v = da(rng);
    for (auto& v : b) v = db(rng);
    const auto got = welch_ttest(a, b);
    const auto want = boost_welch(a, b);
    EXPECT_NEAR(got.t_statistic, want.t, 1e-9);
    EXPECT_NEAR(got.degrees_of_freedom, want.df, 1e-9);
    EXPECT_NEAR(got.p_value, want.p, 1e-9);
  }
}

TEST(WelchTTest, IdenticalSamples) {
  const auto r = welch_ttest(kA, kA);
  EXPECT_EQ(r.t_statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_FALSE(r.significant);
}

TEST(WelchTTest, LargeShiftIsSignificant) {
  std::vector<double> shifted = kA;
  for (auto& v : shifted) v += 50.0;
  const auto r = welch_ttest(kA, shifted);
  EXPECT_LT(r.p_value, 1e-6);
  EXPECT_TRUE(r.significant);
}

TEST(WelchTTest, SwapSymmetry) {
  const auto ab = welch_ttest(kA2, kB2);
  const auto ba = welch_ttest(kB2, kA2);
  EXPECT_EQ(ab.t_statistic, -ba.t_statistic);
  EXPECT_EQ(ab.p_value, ba.p_value);
  EXPECT_EQ(ab.degrees_of_freedom, ba.degrees_of_freedom);
}

TEST(WelchTTest, DegenerateInputsNameTheSide) {
  const std::vector<double> one = {1.0};
  const std::vector<double> flat = {2.0, 2.0, 2.0};
  try {
    welch_ttest(one, kB);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("sample a "), std::string::npos);
  }
  try {
    welch_ttest(kA, flat);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("sample b "), std::string::npos);
  }
}

}  // namespace
}  // namespace velvet
