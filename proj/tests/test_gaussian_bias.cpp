#include "biaslab/gaussian_bias.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace biaslab;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kRootTwoPi = std::sqrt(2.0 * std::numbers::pi);

// Composite Simpson rule on [a, b] with n (even) panels.
template <typename F>
double simpson(F f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

double density(double x, double m, double s) {
    const double z = (x - m) / s;
    return std::exp(-0.5 * z * z) / (s * kRootTwoPi);
}

// E[min(N1, N2)] = mu1 - E[max(D, 0)] with D = N1 - N2 ~ N(mu1 - mu2, theta),
// integrated numerically rather than through the closed form.
double quadrature_min2(double mu1, double mu2, double s1, double s2, double rho) {
    const double theta = std::sqrt(s1 * s1 + s2 * s2 - 2.0 * rho * s1 * s2);
    const double m = mu1 - mu2;
    const double lo = std::max(0.0, m - 12.0 * theta);
    const double positive_part = simpson([&](double x) { return x * density(x, m, theta); }, lo, m + 12.0 * theta);
    return mu1 - positive_part;
}

// Expected maximum of three iid N(0, 1): integral of x * 3 phi(x) Phi(x)^2.
double quadrature_max3_standard() {
    return simpson(
        [](double x) {
            const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
            return x * 3.0 * density(x, 0.0, 1.0) * cdf * cdf;
        },
        -12.0, 12.0);
}

void expect_within_se(double analytic, const McEstimate& est, double n_se = 4.0) {
    EXPECT_LE(std::abs(est.mean - analytic), n_se * est.standard_error)
        << "analytic " << analytic << " mc " << est.mean << " se " << est.standard_error;
}

}  // namespace

TEST(Theta, Examples) {
    EXPECT_DOUBLE_EQ(theta_of(1.0, 1.0, 1.0), 0.0);
    EXPECT_NEAR(theta_of(1.0, 1.0, 0.0), 1.41421356, 1e-8);
}

TEST(Theta, MatchesSampleStdOfDifference) {
    const double s1 = 0.5, s2 = 1.5, rho = 0.3;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    const int n = 10000000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z1 = n01(rng), z2 = n01(rng);
        const double x = s1 * z1;
        const double y = s2 * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2);
        const double d = x - y;
        sum += d;
        sumsq += d * d;
    }
    const double mean = sum / n;
    const double var = (sumsq - n * mean * mean) / (n - 1);
    const double sd = std::sqrt(var);
    // Standard error of a sample standard deviation of a Gaussian.
    const double se = sd / std::sqrt(2.0 * (n - 1));
    EXPECT_LE(std::abs(theta_of(s1, s2, rho) - sd), 4.0 * se);
}

TEST(Theta, RejectsBadArguments) {
    EXPECT_THROW(theta_of(0.0, 1.0, 0.0), std::domain_error);
    EXPECT_THROW(theta_of(1.0, 1.0, 1.5), std::domain_error);
}

TEST(StdNormal, PdfCdf) {
    EXPECT_NEAR(std_normal_pdf(0.0), 0.39894228, 1e-8);
    EXPECT_EQ(std_normal_cdf(0.0), 0.5);
    const double integrated = simpson([](double x) { return density(x, 0.0, 1.0); }, -12.0, 1.96);
    EXPECT_NEAR(std_normal_cdf(1.96), integrated, 5e-4);
    EXPECT_NEAR(std_normal_cdf(1.96), 0.9750, 5e-4);
}

TEST(ExpectedMin2, PerfectlyCorrelatedIdenticalVariables) {
    EXPECT_DOUBLE_EQ(expected_min2(CorrelatedGaussianSpec::make({3.0, 3.0}, {1.0, 1.0}, 1.0)), 3.0);
}

TEST(ExpectedMin2, IndependentStandardNormals) {
    const auto spec = CorrelatedGaussianSpec::make({0.0, 0.0}, {1.0, 1.0}, 0.0);
    const double value = expected_min2(spec);
    EXPECT_NEAR(value, -kSqrt2 / kRootTwoPi, 1e-12);
    EXPECT_NEAR(value, -0.5642, 1e-4);
    expect_within_se(value, mc_order_stat_oracle(spec, {OrderStatistic::Min2}, 10000000, 1));
}

TEST(ExpectedMin2, UnequalMeansAgainstQuadratureAndMonteCarlo) {
    const auto spec = CorrelatedGaussianSpec::make({1.0, 0.5}, {0.8, 1.2}, 0.4);
    const double value = expected_min2(spec);
    EXPECT_NEAR(value, quadrature_min2(1.0, 0.5, 0.8, 1.2, 0.4), 1e-9);
    expect_within_se(value, mc_order_stat_oracle(spec, {OrderStatistic::Min2}, 10000000, 2));
}

TEST(ExpectedMin2, RandomSpecsAgainstQuadrature) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mu(-3.0, 3.0), sigma(0.1, 3.0), rho(-0.99, 0.99);
    for (int i = 0; i < 50; ++i) {
        const double m1 = mu(rng), m2 = mu(rng), s1 = sigma(rng), s2 = sigma(rng), r = rho(rng);
        const auto spec = CorrelatedGaussianSpec::make({m1, m2}, {s1, s2}, r);
        EXPECT_NEAR(expected_min2(spec), quadrature_min2(m1, m2, s1, s2, r), 1e-8);
        // max = N1 + N2 - min
        EXPECT_NEAR(expected_max2(spec), m1 + m2 - quadrature_min2(m1, m2, s1, s2, r), 1e-8);
    }
}

TEST(ExpectedMin2, DegenerateThetaFallsBackToMinOfMeans) {
    EXPECT_DOUBLE_EQ(expected_min2(CorrelatedGaussianSpec::make({2.0, -1.0}, {1.0, 1.0}, 1.0)), -1.0);
    EXPECT_DOUBLE_EQ(expected_max2(CorrelatedGaussianSpec::make({2.0, -1.0}, {1.0, 1.0}, 1.0)), 2.0);
}

TEST(EqualMeans, Min2Examples) {
    EXPECT_EQ(expected_min2_equal_means(0.0, 0.0), 0.0);
    EXPECT_NEAR(expected_min2_equal_means(1.0, kSqrt2), 1.0 - kSqrt2 / kRootTwoPi, 1e-15);
    EXPECT_NEAR(expected_min2_equal_means(1.0, kSqrt2), 0.4358, 1e-4);
}

TEST(EqualMeans, Min2SpecializesGeneralForm) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> mu(-5.0, 5.0), theta(0.01, 4.0);
    for (int i = 0; i < 100; ++i) {
        const double m = mu(rng), t = theta(rng);
        // Independent pair with sigma = t / sqrt(2) has pairwise deviation t.
        const auto spec = CorrelatedGaussianSpec::make({m, m}, {t / kSqrt2, t / kSqrt2}, 0.0);
        EXPECT_NEAR(expected_min2_equal_means(m, t), expected_min2(spec), 1e-12);
    }
}

TEST(EqualMeans, Max2) {
    EXPECT_EQ(expected_max2_equal_means(0.0, 0.0), 0.0);
    const double value = expected_max2_equal_means(0.0, kSqrt2);
    EXPECT_NEAR(value, 0.5642, 1e-4);
    const auto spec = CorrelatedGaussianSpec::make({0.0, 0.0}, {1.0, 1.0}, 0.0);
    expect_within_se(value, mc_order_stat_oracle(spec, {OrderStatistic::Max2}, 10000000, 3));
}

TEST(EqualMeans, Max3) {
    EXPECT_EQ(expected_max3_equal_means(0.0, 0.0), 0.0);
    const double value = expected_max3_equal_means(0.0, kSqrt2);
    EXPECT_NEAR(value, 3.0 * kSqrt2 / (2.0 * kRootTwoPi), 1e-15);
    EXPECT_NEAR(value, 0.8463, 1e-4);
    EXPECT_NEAR(value, quadrature_max3_standard(), 1e-9);
    const auto spec = CorrelatedGaussianSpec::make({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 0.0);
    expect_within_se(value, mc_order_stat_oracle(spec, {OrderStatistic::Max3}, 10000000, 4));
    EXPECT_NEAR(expected_max3_equal_means(2.0, 1.0), 2.5984, 1e-4);
}

TEST(EqualMeans, TcuError) {
    EXPECT_EQ(expected_tcu_error(0.0, 0.0), 0.0);
    const double value = expected_tcu_error(0.0, kSqrt2);
    EXPECT_NEAR(value, -0.2821, 1e-4);
    const auto spec = CorrelatedGaussianSpec::make({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 0.0);
    expect_within_se(value, mc_order_stat_oracle(spec, {OrderStatistic::MinMax}, 10000000, 5));
}

TEST(EqualMeans, TcuIsMidpointOfMinAndMean) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> mu(-5.0, 5.0), theta(0.0, 4.0);
    for (int i = 0; i < 1000; ++i) {
        const double m = mu(rng), t = theta(rng);
        EXPECT_NEAR(expected_tcu_error(m, t), 0.5 * (expected_min2_equal_means(m, t) + m), 1e-12);
    }
}

TEST(WeightedError, Examples) {
    EXPECT_EQ(expected_weighted_error(0.0, 1.7, 2.0), 1.7);
    EXPECT_EQ(expected_weighted_error(1.0, 0.0, kSqrt2), expected_min2_equal_means(0.0, kSqrt2));
    EXPECT_NEAR(expected_weighted_error(0.5, 0.0, kSqrt2), expected_tcu_error(0.0, kSqrt2), 1e-15);
    EXPECT_NEAR(expected_weighted_error(1.0, 0.0, kSqrt2), -0.5642, 1e-4);
    EXPECT_THROW(expected_weighted_error(1.1, 0.0, 1.0), std::domain_error);
    EXPECT_THROW(expected_weighted_error(0.5, 0.0, -1.0), std::domain_error);
}

TEST(WeightedError, MonteCarloForBothWeightedForms) {
    const auto spec = CorrelatedGaussianSpec::make({0.3, 0.3, 0.3}, {1.2, 1.2, 1.2}, 0.25);
    const double theta = theta_of(1.2, 1.2, 0.25);
    const std::vector<StatisticRequest> stats{{OrderStatistic::WeightedTwin, 0.3},
                                              {OrderStatistic::WeightedThird, 0.3},
                                              {OrderStatistic::Single, 0.0}};
    const auto est = mc_order_stat_oracle(spec, stats, 2000000, 6);
    expect_within_se(expected_weighted_error(0.3, 0.3, theta), est[0]);
    expect_within_se(expected_weighted_error(0.3, 0.3, theta), est[1]);
    expect_within_se(0.3, est[2]);
}

TEST(Oracle, IdenticalVariablesHaveZeroMin) {
    const auto spec = CorrelatedGaussianSpec::make({0.0, 0.0}, {1.0, 1.0}, 1.0);
    const auto est = mc_order_stat_oracle(spec, {OrderStatistic::Min2}, 100000, 7);
    EXPECT_LE(std::abs(est.mean), 4.0 * est.standard_error);
}

TEST(Oracle, DeterministicAndSharedStreamMatchesSingle) {
    const auto spec = CorrelatedGaussianSpec::make({0.1, -0.2, 0.4}, {1.0, 0.7, 1.3}, 0.2);
    const auto a = mc_order_stat_oracle(spec, {OrderStatistic::MinMax}, 50000, 8);
    const auto b = mc_order_stat_oracle(spec, {OrderStatistic::MinMax}, 50000, 8);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.standard_error, b.standard_error);
    const auto many =
        mc_order_stat_oracle(spec, {{OrderStatistic::Min2}, {OrderStatistic::MinMax}, {OrderStatistic::Max3}}, 50000, 8);
    EXPECT_EQ(many[1].mean, a.mean);
    EXPECT_EQ(many[1].standard_error, a.standard_error);
}

TEST(Oracle, RejectsInvalidRequests) {
    const auto two = CorrelatedGaussianSpec::make({0.0, 0.0}, {1.0, 1.0}, 0.0);
    EXPECT_THROW(mc_order_stat_oracle(two, {OrderStatistic::Min2}, 100, 1), std::domain_error);
    EXPECT_THROW(mc_order_stat_oracle(two, {OrderStatistic::Max3}, 100000, 1), std::domain_error);
    // Three exchangeable variables need rho >= -1/2 for a valid covariance.
    const CorrelatedGaussianSpec bad{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, -0.6};
    EXPECT_THROW(mc_order_stat_oracle(bad, {OrderStatistic::Max3}, 100000, 1), std::domain_error);
}

TEST(Spec, Validation) {
    EXPECT_THROW(CorrelatedGaussianSpec::make({0.0}, {1.0}, 0.0), std::domain_error);
    EXPECT_THROW(CorrelatedGaussianSpec::make({0.0, 0.0}, {1.0, -1.0}, 0.0), std::domain_error);
    EXPECT_THROW(CorrelatedGaussianSpec::make({0.0, 0.0}, {1.0, 1.0, 1.0}, 0.0), std::domain_error);
    EXPECT_THROW(CorrelatedGaussianSpec::make({0.0, 0.0}, {1.0, 1.0}, -1.2), std::domain_error);
}
